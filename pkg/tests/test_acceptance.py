"""Acceptance criteria, one check per criterion.

Run directly (``python3 tests/test_acceptance.py``) to print one PASS/FAIL
line per criterion, or through pytest, where the same lines appear in the
terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from toric_sfk import NutParameter, build
from toric_sfk.ansatz import GridSpec, positivity_scan
from toric_sfk.asymptotics import ALE, EXCEPTIONAL_TN, GENERALIZED_TN, PRODUCT, classify, decay_fit
from toric_sfk.boundary import (
    LEVELS,
    boundary_trace,
    check_traces,
    cone_angle_identity,
    cusp_residual,
    trace_numeric_residual,
    with_corrupted_lambda,
)
from toric_sfk.catalog import BATTERY, five_edge, hwang_singer, hwang_singer_profile, strip
from toric_sfk.conical import InterpolationFamily, conical_construct, degeneration_profile
from toric_sfk.errors import BoundaryMismatch, InadmissibleNut
from toric_sfk.geometry import hess_from_chart, interior_mesh, inverter_for, momentum_profile, scalar_curvature_many
from toric_sfk.polytope import derive_constants, validate

RESULTS: dict[int, tuple[bool, str]] = {}

TAUS = (0.01, 0.1, 1, 2, 4, 10, 100)


def _record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    return ok


def _battery(names=("c2", "hs", "five")):
    for name in names:
        factory, nuts = BATTERY[name]
        for nu in nuts:
            yield f"{name} nu={nu}", build(factory(), NutParameter(nu))


def _random_interior(ansatz, n, rng, margin=0.02):
    poly = ansatz.polytope
    verts = np.array([[float(c) for c in v] for v in poly.vertices()])
    lo, hi = verts.min(axis=0) - 1.0, verts.max(axis=0) + 4.0
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi, size=(4 * n, 2))
        keep = np.all(poly.ell(x) >= margin, axis=1)
        out.extend(x[keep])
    return np.array(out[:n])


# ------------------------------------------------------------------ criteria


def criterion_1():
    t0 = time.perf_counter()
    a = build(hwang_singer(), NutParameter())
    table = momentum_profile(a, TAUS)
    rel = max(abs(v - hwang_singer_profile(t)) / hwang_singer_profile(t) for t, v in table)
    dt = time.perf_counter() - t0
    return _record(1, rel <= 1e-9 and dt < 1, f"HS profile max rel error {rel:.2e}, {dt:.2f} s")


def criterion_2():
    t0 = time.perf_counter()
    a = build(hwang_singer(), NutParameter())
    c = derive_constants(a.polytope)
    ok = tuple(c.a_prime) == (Fraction(-1), Fraction(0)) and c.lambda_caps == {1: Fraction(1)}
    ok &= all(isinstance(v, Fraction) for v in (*c.a_prime, *c.lambda_caps.values()))
    rep = cusp_residual(a, 1)
    ok &= rep.alpha == c.lambda_caps[1] / 2 == Fraction(1, 2) and rep.passed
    dt = time.perf_counter() - t0
    return _record(2, ok and dt < 1, f"a' = {tuple(map(str, c.a_prime))}, Lambda_2 = {c.lambda_caps[1]}, alpha = {rep.alpha}, {dt:.2f} s")


def criterion_3():
    t0 = time.perf_counter()
    count, bad = 0, []
    for label, a in _battery():
        res = positivity_scan(a, GridSpec.default(a, 256))
        count += 1
        if not res.passed:
            bad.append(label)
    dt = time.perf_counter() - t0
    return _record(3, not bad and count >= 6 and dt < 30, f"{count} configurations on 256^2 grids, failures {bad}, {dt:.1f} s")


def criterion_4():
    t0 = time.perf_counter()
    variants = {
        "cusp": build(hwang_singer(), NutParameter()),
        "smooth": build(hwang_singer(cusp=False), NutParameter()),
        "conical 1/2": conical_construct(hwang_singer(cusp=False), {1: Fraction(1, 2)}),
    }
    parts, ok = [], True
    for name, a in variants.items():
        mesh = interior_mesh(a, 50)
        s1 = float(np.abs(scalar_curvature_many(mesh, a, 1e-3)).max())
        s2 = float(np.abs(scalar_curvature_many(mesh, a, 5e-4)).max())
        ratio = s1 / s2 if s2 > 0 else math.inf
        ok &= s1 <= 1e-4 and ratio >= 3.5
        parts.append(f"{name}: {s1:.1e} (x{ratio:.2f})")
    dt = time.perf_counter() - t0
    return _record(4, ok and dt < 300, "; ".join(parts) + f", {dt:.1f} s")


def criterion_5():
    rng = np.random.default_rng(20261016)
    worst = 0.0
    for label, a in _battery():
        x = _random_interior(a, 1000, rng)
        H, r = inverter_for(a).solve(x, tol=1e-12)
        hess = hess_from_chart(a, H, r)
        det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] * hess[:, 1, 0]
        worst = max(worst, float(np.max(np.abs(r**2 * det - 1))))
    return _record(5, worst <= 1e-8, f"max |r^2 det Hess u - 1| = {worst:.2e} over 1000 points x 9 configurations")


def criterion_6():
    ok, worst, parts = True, 0.0, []
    configs = list(_battery()) + [("strip", build(strip(), NutParameter((0, -1))))]
    for label, a in configs:
        try:
            info = check_traces(a, boundary_trace(a))
            num = trace_numeric_residual(a)
            worst = max(worst, float(info["max_residual"]), num)
            ok &= num <= 1e-10 and info["excised"] == [k + 1 for k in a.cusp_set()]
        except BoundaryMismatch as exc:
            ok = False
            parts.append(f"{label}: {exc}")
    return _record(6, ok, f"max trace residual {worst:.1e}, vertices exact, cusp vertices excised" + "".join(parts))


def criterion_7():
    ok, n, parts = True, 0, []
    for label, a in _battery(("hs", "five")):
        for k in a.cusp_set():
            rep = cusp_residual(a, k, levels=LEVELS)
            n += 1
            lam = a.constants.lambda_caps[k]
            good = rep.passed and rep.alpha == float(lam / 2) and abs(rep.details["alpha_fitted"] - float(lam / 2)) < 1e-3
            ok &= good
            if not good:
                parts.append(f" {label} edge {k + 1}")
    return _record(7, ok and min(LEVELS) <= 1e-5, f"{n} cusp edges bounded down to l = {min(LEVELS):g}, alpha = Lambda/2" + "".join(parts))


def criterion_8():
    ok, parts = True, []
    for theta in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        a = conical_construct(hwang_singer(cusp=False), {1: theta})
        v = cone_angle_identity(a)[2]
        ok &= v["exact"] and v["residual"] == 0 and isinstance(v["residual"], Fraction)
        parts.append(f"theta={theta}: {v['lhs']} = {v['length']}")
    return _record(8, ok, "; ".join(parts))


def criterion_9():
    fam = InterpolationFamily(hwang_singer())
    mesh = interior_mesh(fam.cusp, 50)
    prof = degeneration_profile(fam, mesh, (0.9, 0.99, 0.999), (0.1, 0.01, 0.001))
    hi, lo = prof["toward_smooth"], prof["toward_cusp"]
    dec = hi[0.999] < hi[0.99] < hi[0.9] and lo[0.001] < lo[0.01] < lo[0.1]
    bound = hi[0.999] <= 10 * hi[0.99] and lo[0.001] <= 10 * lo[0.01]
    x = np.array([[1.0, 0.5]])
    s1 = fam.scalar_curvature(x, 0.5, 1e-3)[0]
    s2 = fam.scalar_curvature(x, 0.5, 5e-4)[0]
    noise = abs(s1 - s2) * 4 / 3
    ok = dec and bound and abs(s2) > 10 * noise
    return _record(
        9,
        ok,
        f"|u^t - u_AS|: {hi[0.99]:.3g} -> {hi[0.999]:.3g}; |u^t - u| mod const: {lo[0.01]:.3g} -> {lo[0.001]:.3g}; "
        f"s(theta=1/2) = {s2:.4f} vs noise {noise:.1e}",
    )


def criterion_10():
    cases = {
        ALE: build(hwang_singer(), NutParameter()),
        GENERALIZED_TN: build(hwang_singer(), NutParameter((1, -2))),
        EXCEPTIONAL_TN: build(hwang_singer(), NutParameter((1, 0))),
        PRODUCT: build(strip(), NutParameter((0, -1))),
    }
    ok, parts = True, []
    for kind, a in cases.items():
        assert classify(a.polytope, a.nut).kind == kind
        rep = decay_fit(a, max_slope=-1.9)
        slopes = [ray["slope"] for ray in rep.rays]
        ok &= rep.passed and len(slopes) >= 5
        parts.append(f"{kind}: {len(slopes)} rays, worst slope {max(slopes):.2f}")
    return _record(10, ok, "; ".join(parts))


def criterion_11():
    ok, parts = True, []
    for label, a in (("hs", build(hwang_singer(), NutParameter())), ("five", build(five_edge(), NutParameter()))):
        for k in a.cusp_set():
            try:
                boundary_trace(with_corrupted_lambda(a, k, Fraction(11, 10)))
                ok = False
                parts.append(f"{label} edge {k + 1} not caught")
            except BoundaryMismatch:
                pass
    bad_nu = NutParameter((-1, 1))
    ok &= not validate(hwang_singer(), bad_nu).valid
    try:
        build(hwang_singer(), bad_nu)
        ok = False
        parts.append("bad nut accepted")
    except InadmissibleNut:
        pass
    return _record(11, ok, "Lambda x 1.1 breaks the traces; nu = (-1, 1) rejected" + "".join(f"; {p}" for p in parts))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


def summary_lines():
    return [f"{'PASS' if ok else 'FAIL'} criterion {n:>2}: {detail}" for n, (ok, detail) in sorted(RESULTS.items())]


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{i + 1}" for i in range(len(CRITERIA))])
def test_acceptance(check):
    ok = check()
    n = CRITERIA.index(check) + 1
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {RESULTS[n][1]}")
    assert ok, RESULTS[n][1]


if __name__ == "__main__":
    for check in CRITERIA:
        try:
            check()
        except Exception as exc:  # report and keep going
            _record(CRITERIA.index(check) + 1, False, f"{type(exc).__name__}: {exc}")
    print("\n".join(summary_lines()))
