"""Boundary behaviour of the momentum map and of the symplectic potential.

Two kinds of checks live here.  The trace of x on r = 0 is piecewise affine
and is handled in exact rational arithmetic.  Everything else uses approach
sequences: points marching toward an edge (or vertex) with the distance
parameter ``l`` running through 1e-2 ... 1e-5, on which a quantity is
declared bounded when successive differences shrink like ``l**p`` with a
fitted order ``p`` bounded away from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ansatz import CONICAL, CUSP, Ansatz
from .errors import BoundaryMismatch, DegenerateDelta, NotACuspEdge, UnboundedResidual
from .geometry import hess_from_chart, inverter_for
from .polytope import det2

LEVELS = (1e-2, 1e-3, 1e-4, 1e-5)
MIN_ORDER = 0.5


@dataclass(frozen=True)
class BoundaryTrace:
    """x(H, 0) = c + H v for H in (H_lo, H_hi); lands on edge ``edge`` (0-based)."""

    interval: tuple
    c: tuple
    v: tuple
    edge: int

    def point(self, H):
        return (self.c[0] + H * self.v[0], self.c[1] + H * self.v[1])


@dataclass
class EdgeReport:
    edge: int  # 1-based in reports
    kind: str
    max_residual: float
    fitted_order: float
    passed: bool
    alpha: float | None = None
    beta: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "edge": self.edge,
            "class": self.kind,
            "max_residual": self.max_residual,
            "fitted_order": self.fitted_order,
            "pass": self.passed,
        }
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.beta is not None:
            out["beta"] = self.beta
        return out


# ------------------------------------------------------------------ traces


def _exact_data(ansatz: Ansatz):
    normals = ansatz.scaled_normals_exact()
    breaks = [Fraction(a) - ansatz.shift if isinstance(a, Fraction) else a - float(ansatz.shift) for a in ansatz.raw_breaks()]
    lam = {k: ansatz.constants.lambda_caps[k] for k in ansatz.cusp_set()}
    n1 = ansatz.polytope.edges[0].normal
    offset = (-ansatz.shift * n1[1], ansatz.shift * n1[0])
    return normals, breaks, lam, offset


def boundary_trace(ansatz: Ansatz, check: bool = True, tol: float = 1e-10) -> list[BoundaryTrace]:
    """Piecewise-affine image of the axis r = 0.

    On the interval where ``H_i < 0`` exactly for ``i < t`` the map is
    ``Phi = nu_t H + sum_{i<t} (nu_{i+1} - nu_i) a_i - sum_{k in I, k-1 < t} Lambda_k nu_k``
    and ``x = (Phi_2, -Phi_1)`` plus the gauge offset; it should land on edge t.
    Intervals of zero length (cusp edges) produce no trace.
    """
    normals, breaks, lam, offset = _exact_data(ansatz)
    d = len(normals)
    traces = []
    for t in range(d):
        hi = -breaks[t - 1] if t > 0 else math.inf
        lo = -breaks[t] if t < d - 1 else -math.inf
        if not lo < hi:
            continue
        slope = normals[t]
        const = [Fraction(0), Fraction(0)] if all(isinstance(b, Fraction) for b in breaks) else [0.0, 0.0]
        for i in range(t):
            for m in range(2):
                const[m] += (normals[i + 1][m] - normals[i][m]) * breaks[i]
        for k, L in lam.items():
            if k - 1 < t:
                nk = ansatz.polytope.edges[k].normal
                for m in range(2):
                    const[m] -= L * nk[m]
        v = (slope[1], -slope[0])
        c = (const[1] + offset[0], -const[0] + offset[1])
        traces.append(BoundaryTrace((lo, hi), c, v, t))
    if check:
        check_traces(ansatz, traces, tol)
    return traces


def _ell(edge, x):
    return edge.normal[0] * x[0] + edge.normal[1] * x[1] + edge.offset


def check_traces(ansatz: Ansatz, traces: Sequence[BoundaryTrace], tol: float = 1e-10) -> dict:
    """Raise :class:`BoundaryMismatch` unless each trace lies on its edge and
    the interval endpoints are the polytope's vertices."""
    poly = ansatz.polytope
    worst = 0.0
    for tr in traces:
        edge = poly.edges[tr.edge]
        slope_res = tr.v[0] * edge.normal[0] + tr.v[1] * edge.normal[1]
        const_res = _ell(edge, tr.c)
        res = max(abs(float(slope_res)), abs(float(const_res)))
        worst = max(worst, res)
        if res > (0 if _is_exact(slope_res, const_res) else tol):
            raise BoundaryMismatch(
                f"trace on H in {tuple(float(b) for b in tr.interval)} misses edge {tr.edge + 1}",
                interval=tr.interval,
                residual=res,
            )
        for end, vidx in ((tr.interval[1], tr.edge - 1), (tr.interval[0], tr.edge)):
            if math.isinf(end) or not 0 <= vidx < poly.d - 1:
                continue
            p = tr.point(end)
            vert = poly.vertex(vidx)
            gap = max(abs(float(p[0] - vert[0])), abs(float(p[1] - vert[1])))
            worst = max(worst, gap)
            if gap > (0 if _is_exact(p[0] - vert[0], p[1] - vert[1]) else tol):
                raise BoundaryMismatch(
                    f"trace endpoint {tuple(float(c) for c in p)} differs from vertex {vidx + 1}",
                    interval=tr.interval,
                    residual=gap,
                )
    covered = sorted(tr.edge for tr in traces)
    expected = [i for i in range(poly.d) if i not in set(ansatz.cusp_set())]
    if covered != expected:
        raise BoundaryMismatch(f"traces cover edges {covered}, expected {expected}")
    return {"max_residual": worst, "excised": [k + 1 for k in ansatz.cusp_set()]}


def _is_exact(*vals) -> bool:
    return all(isinstance(v, (Fraction, int)) for v in vals)


def trace_numeric_residual(ansatz: Ansatz, r: float = 1e-9, samples: int = 7) -> float:
    """max |l_edge(x(H, r))| for H sampled inside each trace interval at small r."""
    worst = 0.0
    for tr in boundary_trace(ansatz, check=False):
        lo, hi = float(tr.interval[0]), float(tr.interval[1])
        if math.isinf(lo):
            lo = hi - 10
        if math.isinf(hi):
            hi = lo + 10
        H = np.linspace(lo, hi, samples + 2)[1:-1]
        x = ansatz.moment_map(H, np.full_like(H, r), np.longdouble)
        e = ansatz.polytope.edges[tr.edge]
        ell = x[:, 0] * e.normal[0] + x[:, 1] * e.normal[1] + np.longdouble(float(e.offset))
        worst = max(worst, float(np.abs(ell).max()))
    return worst


# ------------------------------------------------------------------ boundedness


def fitted_order(levels: Sequence[float], values: np.ndarray, floor: float = 0.0) -> tuple[float, np.ndarray]:
    """Fit |f(l_{n+1}) - f(l_n)| ~ l_{n+1}^p; returns (p, diffs).  ``inf`` if all diffs <= floor."""
    values = np.asarray(values, dtype=float).reshape(len(levels), -1)
    diffs = np.max(np.abs(np.diff(values, axis=0)), axis=-1)
    if np.all(diffs <= floor):
        return math.inf, diffs
    ell = np.asarray(levels[1:], dtype=float)
    y = np.log(np.maximum(diffs, max(floor, 1e-300)))
    p = np.polyfit(np.log(ell), y, 1)[0]
    return float(p), diffs


def is_bounded(levels, values, floor: float = 0.0) -> tuple[bool, float, np.ndarray]:
    p, diffs = fitted_order(levels, values, floor)
    if math.isinf(p):
        return True, p, diffs
    tail = diffs[1:] <= diffs[:-1] * 1.05 + floor
    return bool(p >= MIN_ORDER and np.all(tail)), p, diffs


def _edge_anchor(ansatz: Ansatz, j: int, frac: float) -> np.ndarray:
    """A point on edge j: ``frac`` of the way along a finite edge, or at distance
    1 + 2 frac from the vertex along an unbounded edge."""
    poly = ansatz.polytope
    if 0 < j < poly.d - 1:
        a = np.array([float(c) for c in poly.vertex(j - 1)])
        b = np.array([float(c) for c in poly.vertex(j)])
        return a + frac * (b - a)
    vidx = 0 if j == 0 else poly.d - 2
    v = np.array([float(c) for c in poly.vertex(vidx)]) if poly.d > 1 else np.zeros(2)
    return v + (1 + 2 * frac) * poly.edge_direction(j)


def approach_points(ansatz: Ansatz, j: int, frac: float, levels=LEVELS) -> np.ndarray:
    """Points with l_j = level on the inward normal ray through an anchor of edge j."""
    nu = np.array(ansatz.polytope.edges[j].normal, dtype=float)
    anchor = _edge_anchor(ansatz, j, frac)
    return np.array([anchor + lev * nu / (nu @ nu) for lev in levels])


def _chart_sequence(ansatz: Ansatz, pts: np.ndarray):
    """Extended-precision inversion, polished from a double-precision solve."""
    inv = inverter_for(ansatz)
    H, r = inv.solve(pts, dtype=np.float64)
    guess = np.stack([H, r], -1)
    return inv.solve(pts.astype(np.longdouble), guess=guess, dtype=np.longdouble, tol=1e-17)


def _path_integral(ansatz: Ansatz, grad_fn, pts: np.ndarray, n: int = 16) -> np.ndarray:
    """w(p_m) - w(p_0) along the polyline p_0, p_1, ... by Gauss-Legendre in log(l)."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    out = [0.0]
    for a, b in zip(pts[:-1], pts[1:]):
        t = 0.5 * (nodes + 1)
        seg = a + t[:, None] * (b - a)
        H, r = _chart_sequence(ansatz, seg)
        g = grad_fn(seg, H, r)
        out.append(out[-1] + 0.5 * float(np.sum(weights * (g @ (b - a)))))
    return np.array(out)


def _model_terms(ansatz: Ansatz, x: np.ndarray, skip: Sequence[int], coeff: dict):
    """Gradient and Hessian of sum_j coeff_j l_j log l_j over j not in ``skip``."""
    poly = ansatz.polytope
    grad = np.zeros_like(x, dtype=float)
    hess = np.zeros(x.shape[:-1] + (2, 2))
    for j, e in enumerate(poly.edges):
        if j in skip:
            continue
        nu = np.array(e.normal, dtype=float)
        ell = x @ nu + float(e.offset)
        c = coeff.get(j, 0.5)
        grad += c * (np.log(ell) + 1)[..., None] * nu
        hess += c * (1 / ell)[..., None, None] * np.outer(nu, nu)
    return grad, hess


def guillemin_coefficients(ansatz: Ansatz) -> dict:
    if ansatz.variant == CONICAL:
        return {j: 0.5 / float(th) for j, th in ansatz.polytope.cone_angles.items()}
    return {}


def guillemin_residual(ansatz: Ansatz, j: int, fracs=(0.25, 0.5, 0.75), levels=LEVELS, raise_on_fail=False) -> EdgeReport:
    """Bounded w = u - sum c_i l_i log l_i near edge j (0-based), with w, dw, d2w tested."""
    if j in ansatz.cusp_set():
        raise ValueError(f"edge {j + 1} is a cusp edge; use cusp_residual")
    coeff = guillemin_coefficients(ansatz)
    skip = set(ansatz.cusp_set())
    worst_order = math.inf
    worst_res = 0.0
    ok_all = True
    per_ray = []
    for frac in fracs:
        pts = approach_points(ansatz, j, frac, levels)
        H, r = _chart_sequence(ansatz, pts)
        xi = ansatz.xi(H, r, np.longdouble).astype(float)
        hess = hess_from_chart(ansatz, H, r, np.longdouble).astype(float)

        def grad_w(seg, Hs, rs):
            g, _ = _model_terms(ansatz, seg, skip, coeff)
            return ansatz.xi(Hs, rs, np.longdouble).astype(float) - g

        mg, mh = _model_terms(ansatz, pts, skip, coeff)
        gw = xi - mg
        hw = hess - mh
        w = _path_integral(ansatz, grad_w, pts)
        scale = 1 + np.abs(gw).max() + np.abs(hw).max()
        floor = 1e-9 * scale
        results = [is_bounded(levels, q, floor) for q in (w, gw, hw)]
        order = min(res[1] for res in results)
        ok = all(res[0] for res in results)
        worst_order = min(worst_order, order)
        worst_res = max(worst_res, float(np.abs(hw).max()), float(np.abs(gw).max()))
        ok_all &= ok
        per_ray.append({"frac": frac, "order": order, "pass": ok})
    kind = "conical" if j in coeff else "guillemin"
    rep = EdgeReport(j + 1, kind, worst_res, worst_order, ok_all, details={"rays": per_ray, "coefficient": coeff.get(j, 0.5)})
    if raise_on_fail and not ok_all:
        raise UnboundedResidual(f"edge {j + 1}: residual not bounded (fitted order {worst_order:.3g})")
    return rep


def cusp_parameters(ansatz: Ansatz, k: int) -> tuple[Fraction, Fraction]:
    """(alpha, beta) with alpha = Lambda_k / 2 and beta = det(nu_{k+1}, nu_{k-1}) / 2."""
    poly = ansatz.polytope
    lam = ansatz.constants.lambda_caps[k]
    dt = det2(poly.edges[k + 1].normal, poly.edges[k - 1].normal)
    return lam / 2, Fraction(dt, 2)


def cusp_residual(ansatz: Ansatz, k: int, fracs=(0.25, 0.5, 0.75), levels=LEVELS, raise_on_fail=False) -> EdgeReport:
    """Test u + (alpha + beta l_k) log l_k - 1/2 sum_{j != k} l_j log l_j for bounded value and gradient.

    Both signs of beta are attempted; the one giving a bounded residual is
    reported.  alpha is also fitted independently from the 1/l_k blow-up of
    the normal derivative of u.
    """
    if ansatz.variant != CUSP or k not in ansatz.cusp_set():
        raise NotACuspEdge(f"edge {k + 1} is not a cusp edge of this construction")
    alpha, beta_signed = cusp_parameters(ansatz, k)
    nu = np.array(ansatz.polytope.edges[k].normal, dtype=float)
    lk_off = float(ansatz.polytope.edges[k].offset)
    skip = set(ansatz.cusp_set())
    attempts = {}
    alpha_fits = []
    rays = []
    for frac in fracs:
        pts = approach_points(ansatz, k, frac, levels)
        H, r = _chart_sequence(ansatz, pts)
        xi = ansatz.xi(H, r, np.longdouble).astype(float)
        mg, _ = _model_terms(ansatz, pts, skip, {})
        ell = pts @ nu + lk_off
        # the 1/l_k coefficient of d u / d(nu_k) is -|nu_k|^2 alpha
        alpha_fits.append(float(-(ell * (xi @ nu))[-1] / (nu @ nu)))
        rays.append((pts, H, r, xi, mg, ell))
    for sign in (+1, -1):
        beta = sign * abs(float(beta_signed))
        ok_all = True
        worst = 0.0
        order_min = math.inf
        for pts, H, r, xi, mg, ell in rays:

            def cusp_grad(e):
                return (beta * (np.log(e) + 1) + float(alpha) / e)[..., None] * nu

            gw = xi + cusp_grad(ell) - mg

            def grad_w(seg, Hs, rs):
                e = seg @ nu + lk_off
                g, _ = _model_terms(ansatz, seg, skip, {})
                return ansatz.xi(Hs, rs, np.longdouble).astype(float) + cusp_grad(e) - g

            w = _path_integral(ansatz, grad_w, pts)
            scale = 1 + np.abs(gw).max()
            floor = 1e-9 * scale
            res = [is_bounded(levels, q, floor) for q in (w, gw)]
            ok_all &= all(t[0] for t in res)
            order_min = min(order_min, min(t[1] for t in res))
            worst = max(worst, float(np.abs(gw).max()))
        attempts[sign] = (ok_all, order_min, worst, beta)
    chosen = attempts[+1] if attempts[+1][0] or not attempts[-1][0] else attempts[-1]
    if attempts[+1][0] and attempts[-1][0]:
        chosen = attempts[+1] if attempts[+1][1] >= attempts[-1][1] else attempts[-1]
    passed, order, worst, beta = chosen
    alpha_fit = float(np.mean(alpha_fits))
    alpha_ok = abs(alpha_fit - float(alpha)) <= 1e-3 * max(1.0, abs(float(alpha)))
    rep = EdgeReport(
        k + 1,
        "cusp",
        worst,
        order,
        bool(passed and alpha_ok),
        alpha=float(alpha),
        beta=beta,
        details={
            "alpha_fitted": alpha_fit,
            "beta_formula": float(beta_signed),
            "sign_attempts": {str(s): {"pass": a[0], "order": a[1]} for s, a in attempts.items()},
            "lambda": float(ansatz.constants.lambda_caps[k]),
        },
    )
    if raise_on_fail and not rep.passed:
        raise UnboundedResidual(f"cusp edge {k + 1}: residual not bounded for either sign of beta")
    return rep


def cusp_collapse_order(ansatz: Ansatz, k: int, H_offsets=(0.3, -0.3), rs=(1e-1, 1e-2, 1e-3, 1e-4)) -> float:
    """Fitted order of |l_k(x(H, r)) - rho_{k-1}| in r along vertical lines near the cusp point."""
    A = ansatz.arrays(np.longdouble)
    nu = ansatz.polytope.edges[k].normal
    off = np.longdouble(float(ansatz.polytope.edges[k].offset))
    orders = []
    for dh in H_offsets:
        H = np.full(len(rs), -A.breaks[k - 1] + np.longdouble(dh))
        r = np.array(rs, dtype=np.longdouble)
        x = ansatz.moment_map(H, r, np.longdouble)
        ell = x[:, 0] * nu[0] + x[:, 1] * nu[1] + off
        rho = np.hypot(H + A.breaks[k - 1], r)
        gap = np.abs(ell - rho).astype(float)
        if np.all(gap < 1e-17):
            orders.append(math.inf)
            continue
        orders.append(float(np.polyfit(np.log(rs), np.log(np.maximum(gap, 1e-300)), 1)[0]))
    return min(orders)


# ------------------------------------------------------------------ delta


def delta_estimates(ansatz: Ansatz, pts: np.ndarray) -> np.ndarray:
    """r^2 / (prod_i l_i * prod_{k in I} l_k) at momentum points."""
    H, r = _chart_sequence(ansatz, np.asarray(pts, dtype=float))
    ell = ansatz.polytope.ell(pts)
    prod = np.prod(ell, axis=-1)
    for k in ansatz.cusp_set():
        prod = prod * ell[:, k]
    return (r.astype(float) ** 2) / prod


def det_product_check(ansatz: Ansatz, levels=LEVELS, raise_on_fail=False) -> dict:
    """delta stays in a compact subset of (0, inf) when approaching every edge and vertex."""
    poly = ansatz.polytope
    sequences = {}
    for j in range(poly.d):
        for frac in (0.25, 0.5, 0.75):
            sequences[f"edge{j + 1}@{frac}"] = approach_points(ansatz, j, frac, levels)
    for v in range(poly.d - 1):
        vert = np.array([float(c) for c in poly.vertex(v)])
        n = np.array(poly.edges[v].normal, dtype=float) + np.array(poly.edges[v + 1].normal, dtype=float)
        n = n / np.linalg.norm(n)
        sequences[f"vertex{v + 1}"] = np.array([vert + lev * n for lev in levels])
    lo, hi = math.inf, 0.0
    per = {}
    failed = []
    for name, pts in sequences.items():
        delta = delta_estimates(ansatz, pts)
        ratio = float(delta.max() / delta.min())
        per[name] = {"min": float(delta.min()), "max": float(delta.max())}
        lo, hi = min(lo, float(delta.min())), max(hi, float(delta.max()))
        # a factor 10 drift over three decades of l would signal a missing power
        if not (np.all(np.isfinite(delta)) and delta.min() > 0 and ratio < 10):
            failed.append(name)
    out = {"delta_min": lo, "delta_max": hi, "sequences": per, "failed": failed, "pass": not failed}
    if raise_on_fail and failed:
        raise DegenerateDelta(f"delta degenerates along {failed}")
    return out


# ------------------------------------------------------------------ cone angles


def cone_angle_identity(ansatz: Ansatz) -> dict:
    """2 pi (a^theta_j - a^theta_{j-1}) |nu_j|^2 / theta_j versus L_j, per conical edge (1-based keys)."""
    c = ansatz.constants
    out = {}
    for j, th in sorted(ansatz.polytope.cone_angles.items()):
        lhs_over_2pi = (c.a_theta[j] - c.a_theta[j - 1]) * ansatz.polytope.edges[j].norm2 / th
        rhs_over_2pi = (c.a_prime[j] - c.a_prime[j - 1]) * ansatz.polytope.edges[j].norm2
        exact = isinstance(lhs_over_2pi, Fraction) and isinstance(rhs_over_2pi, Fraction)
        residual = lhs_over_2pi - rhs_over_2pi
        out[j + 1] = {
            "theta": float(th),
            "lhs": 2 * math.pi * float(lhs_over_2pi),
            "length": c.lengths[j],
            "residual": residual if exact else float(residual) * 2 * math.pi,
            "exact": exact,
            "pass": residual == 0 if exact else abs(float(residual)) < 1e-12,
        }
    return out


def with_corrupted_lambda(ansatz: Ansatz, k: int, factor: Fraction = Fraction(11, 10)) -> Ansatz:
    """Copy of ``ansatz`` whose Lambda_k is scaled (a negative control for the trace check)."""
    lam = dict(ansatz.constants.lambda_caps)
    lam[k] = lam[k] * factor
    return Ansatz(ansatz.polytope, replace(ansatz.constants, lambda_caps=lam), ansatz.nut, ansatz.variant, ansatz.shift)
