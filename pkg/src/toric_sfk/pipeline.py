"""Verification suites run over one construction, aggregated into a report.

Each suite is a pure function of the ansatz and the configuration, so they
can run on a worker pool; results are always collected in the fixed order of
``SUITES`` so that reports are deterministic.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import boundary as bd
from .ansatz import CONICAL, CUSP, SMOOTH, Ansatz, GridSpec, build, closure_residual, harmonicity_residual, positivity_scan
from .asymptotics import decay_fit
from .catalog import hwang_singer_profile, is_hwang_singer
from .config import RunConfig
from .errors import ToricSFKError
from .geometry import hess_from_chart, interior_mesh, inverter_for, momentum_profile, scalar_curvature_many
from .polytope import MomentPolytope, NutParameter
from .report import SuiteResult, VerificationReport

PROFILE_TAUS = (0.01, 0.1, 1.0, 2.0, 4.0, 10.0, 100.0)


def default_variant(polytope: MomentPolytope) -> str:
    if polytope.cusp_set:
        return CUSP
    if polytope.cone_angles:
        return CONICAL
    return SMOOTH


def construct(polytope: MomentPolytope, nut: NutParameter, config: RunConfig) -> Ansatz:
    variant = config.variant or default_variant(polytope)
    if variant == SMOOTH and polytope.cone_angles:
        polytope = MomentPolytope(polytope.edges, polytope.cusp_set, {}, polytope.mode)
    return build(polytope, nut, variant=variant, recenter=config.recenter)


# ------------------------------------------------------------------ suites


def suite_positivity(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    return positivity_scan(a, GridSpec.default(a, cfg.grid))


def suite_harmonicity(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    grid = GridSpec.default(a, cfg.harmonic_grid)
    coarse = harmonicity_residual(a, grid, rel_step=1e-3)
    fine = harmonicity_residual(a, grid, rel_step=5e-4)
    ratio = coarse / fine if fine > 0 else math.inf
    tol = cfg.tolerances.harmonicity
    ok = coarse <= tol and (ratio >= cfg.tolerances.curvature_ratio or coarse < 1e-12)
    return SuiteResult("harmonicity", ok, coarse, tol, {"fine": fine, "ratio": ratio})


def suite_closure(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    HH, RR = GridSpec.default(a, cfg.harmonic_grid).mesh()
    res = closure_residual(a, HH, RR)
    return SuiteResult("closure", res <= cfg.tolerances.closure, res, cfg.tolerances.closure)


def _mesh(a: Ansatz, cfg: RunConfig) -> np.ndarray:
    return interior_mesh(a, cfg.mesh)


def suite_r_consistency(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    x = _mesh(a, cfg)
    H, r = inverter_for(a).solve(x, tol=cfg.tolerances.newton)
    hess = hess_from_chart(a, H, r)
    det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] * hess[:, 1, 0]
    res = float(np.max(np.abs(r**2 * det - 1)))
    sym = float(np.max(np.abs(hess[:, 0, 1] - hess[:, 1, 0]) / np.abs(hess).max(axis=(1, 2))))
    tol = cfg.tolerances
    ok = res <= tol.r_consistency and sym <= tol.symmetry
    return SuiteResult("r_consistency", ok, res, tol.r_consistency, {"points": len(x), "symmetry": sym})


def suite_scalar_flatness(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    x = _mesh(a, cfg)
    tol = cfg.tolerances
    h = tol.curvature_h
    s1 = np.abs(scalar_curvature_many(x, a, h))
    s2 = np.abs(scalar_curvature_many(x, a, h / 2))
    m1, m2 = float(s1.max()), float(s2.max())
    ratio = m1 / m2 if m2 > 0 else math.inf
    # Richardson estimate of the h -> 0 limit, i.e. what is left once the
    # O(h^2) truncation error is removed
    limit = float(np.max(np.abs(4 * s2 - s1) / 3))
    exact = m1 <= 1e-9
    ok = exact or (ratio >= tol.curvature_ratio and limit <= tol.curvature)
    return SuiteResult(
        "scalar_flatness",
        ok,
        m1,
        tol.curvature,
        {"points": len(x), "h": h, "max_abs_s_h": m1, "max_abs_s_h2": m2, "ratio": ratio, "richardson": limit},
    )


def suite_boundary_trace(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    tol = cfg.tolerances.trace
    try:
        traces = bd.boundary_trace(a, tol=tol)
        info = bd.check_traces(a, traces, tol)
    except ToricSFKError as exc:
        return SuiteResult("boundary_trace", False, math.inf, tol, {"error": str(exc)})
    numeric = bd.trace_numeric_residual(a)
    info["numeric_residual"] = numeric
    info["traces"] = [
        {"edge": t.edge + 1, "interval": [str(v) for v in t.interval], "c": [str(v) for v in t.c], "v": list(t.v)}
        for t in traces
    ]
    res = max(float(info["max_residual"]), numeric)
    return SuiteResult("boundary_trace", res <= tol, res, tol, info)


def suite_edges(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    reports = []
    for j in range(a.d):
        try:
            rep = bd.cusp_residual(a, j) if j in a.cusp_set() else bd.guillemin_residual(a, j)
            reports.append(rep.to_dict())
        except ToricSFKError as exc:
            reports.append({"edge": j + 1, "pass": False, "error": str(exc)})
    ok = all(r["pass"] for r in reports)
    worst = min((r.get("fitted_order", 0.0) for r in reports), default=math.inf)
    return SuiteResult("edge_classes", ok, worst, bd.MIN_ORDER, {"edges": reports})


def suite_det_product(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    out = bd.det_product_check(a)
    worst = max(v["max"] / v["min"] for v in out["sequences"].values())
    return SuiteResult("det_product", out["pass"], worst, 10.0, {
        "delta_min": out["delta_min"],
        "delta_max": out["delta_max"],
        "failed": out["failed"],
    })


def suite_cone_angles(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    out = bd.cone_angle_identity(a)
    ok = all(v["pass"] for v in out.values())
    res = max((abs(float(v["residual"])) for v in out.values()), default=0.0)
    return SuiteResult("cone_angle_identity", ok, res, 0.0, {"edges": out})


def suite_asymptotics(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    rep = decay_fit(a, max_slope=cfg.tolerances.decay_slope)
    slopes = [ray["slope"] for ray in rep.rays]
    return SuiteResult("asymptotics", rep.passed, max(slopes), cfg.tolerances.decay_slope, rep.to_dict())


def suite_profile(a: Ansatz, cfg: RunConfig) -> SuiteResult:
    if not a.cusp_set():
        return SuiteResult("momentum_profile", True, 0.0, None, {"skipped": "no cusp edge"})
    table = momentum_profile(a, PROFILE_TAUS)
    details = {"table": [[t, v] for t, v in table]}
    if is_hwang_singer(a.polytope):
        rel = max(abs(v - hwang_singer_profile(t)) / hwang_singer_profile(t) for t, v in table)
        details["closed_form_max_rel_error"] = rel
        return SuiteResult("momentum_profile", rel <= 1e-9, rel, 1e-9, details)
    return SuiteResult("momentum_profile", True, 0.0, None, details)


SUITES: tuple[tuple[str, Callable[[Ansatz, RunConfig], SuiteResult]], ...] = (
    ("positivity", suite_positivity),
    ("harmonicity", suite_harmonicity),
    ("closure", suite_closure),
    ("r_consistency", suite_r_consistency),
    ("scalar_flatness", suite_scalar_flatness),
    ("boundary_trace", suite_boundary_trace),
    ("edge_classes", suite_edges),
    ("det_product", suite_det_product),
    ("cone_angle_identity", suite_cone_angles),
    ("asymptotics", suite_asymptotics),
    ("momentum_profile", suite_profile),
)


def _guarded(name, fn, a, cfg) -> SuiteResult:
    try:
        return fn(a, cfg)
    except ToricSFKError as exc:
        return SuiteResult(name, False, math.inf, None, {"error": f"{type(exc).__name__}: {exc}"})


def verify(ansatz: Ansatz, config: RunConfig | None = None, only: tuple[str, ...] | None = None) -> VerificationReport:
    cfg = config or RunConfig()
    chosen = [(n, f) for n, f in SUITES if only is None or n in only]
    if ansatz.variant != CONICAL:
        chosen = [(n, f) for n, f in chosen if n != "cone_angle_identity"]
    # build the shared inverter once, before the workers race for it
    inverter_for(ansatz)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_guarded, n, f, ansatz, cfg) for n, f in chosen]
            results = [fut.result() for fut in futures]
    else:
        results = [_guarded(n, f, ansatz, cfg) for n, f in chosen]
    report = VerificationReport(
        metadata={
            "variant": ansatz.variant,
            "nut": list(ansatz.nut.as_array()),
            "gauge_shift": str(ansatz.shift),
            "grid": cfg.grid,
            "mesh": cfg.mesh,
        }
    )
    for r in results:
        report.add(r)
    return report
