"""Momentum-side geometry: inverse momentum map, potential, Hessian, curvature.

The symplectic potential ``u`` satisfies ``du = xi . dx``.  Because
``Dx = r * adj(D xi)^T`` the Hessian ``D xi (Dx)^{-1}`` collapses to
``D xi D xi^T / (r det D xi)``, so ``det Hess u = r^{-2}``; both forms are
available and the tests compare them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .ansatz import Ansatz, ChartPoint
from .errors import NoConvergence, OutsidePolytope, PathExitsPolytope, StencilExitsPolytope
from .polytope import _ext_gcd

NEWTON_TOL = 1e-12
MAX_ITER = 100


@dataclass
class MetricSample:
    x: np.ndarray
    H: float
    r: float
    hess_u: np.ndarray
    hess_u_inv: np.ndarray
    scalar_residual: float
    r_consistency: float

    def to_record(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "H": float(self.H),
            "r": float(self.r),
            "u11": float(self.hess_u[0, 0]),
            "u12": float(self.hess_u[0, 1]),
            "u22": float(self.hess_u[1, 1]),
            "s": float(self.scalar_residual),
            "r_consistency": float(self.r_consistency),
        }


@dataclass
class PotentialValue:
    u: float
    grad_u: np.ndarray


# ------------------------------------------------------------------ inversion


class MomentInverter:
    """Batch Newton solver for x(H, r) = target in the variables (H, log r).

    Initial guesses come from a k-d tree over an atlas of forward-mapped chart
    points; the atlas is denser near the breakpoints where the map bends.
    """

    def __init__(self, ansatz: Ansatz, atlas_size: int = 96):
        self.ansatz = ansatz
        b = ansatz.breakpoints()
        lo, hi = float(b.min()), float(b.max())
        span = hi - lo if hi > lo else 1.0
        hs = [np.linspace(lo - 40 * span, hi + 40 * span, atlas_size)]
        for c in b:
            hs.append(c + span * np.sinh(np.linspace(-4, 4, atlas_size // 2)) / 8)
        Hs = np.unique(np.concatenate(hs))
        rs = span * np.geomspace(1e-7, 1e3, atlas_size)
        HH, RR = np.meshgrid(Hs, rs, indexing="ij")
        HH, RR = HH.ravel(), RR.ravel()
        # polar patches around each breakpoint resolve the cusp points, where
        # the momentum map depends on the angle but hardly on the radius
        rho = span * np.geomspace(1e-9, 1.0, 60)
        phi = np.linspace(0.01, np.pi - 0.01, 60)
        P, F = np.meshgrid(rho, phi, indexing="ij")
        for c in np.unique(b):
            HH = np.concatenate([HH, c + (P * np.cos(F)).ravel()])
            RR = np.concatenate([RR, (P * np.sin(F)).ravel()])
        self._chart = np.stack([HH, np.log(RR)], axis=-1)
        xs = ansatz.moment_map(HH, RR)
        ok = np.all(np.isfinite(xs), axis=-1)
        self._chart = self._chart[ok]
        self._tree = cKDTree(xs[ok])

    def guess(self, x: np.ndarray) -> np.ndarray:
        _, idx = self._tree.query(x)
        z = self._chart[idx]
        # candidates are ranked after one Newton step: near an edge the raw
        # residual barely sees r, so it would favour poor atlas points
        best = self._after_step(z, x)
        for cand in self._edge_guesses(x) + self._cusp_guesses(x):
            res = self._after_step(cand, x)
            better = np.isfinite(res) & (res < best)
            z[better] = cand[better]
            best[better] = res[better]
        return z

    def _after_step(self, z, x):
        with np.errstate(all="ignore"):
            res = self._residual(z, x, np.float64)
            r = np.exp(z[:, 1])
            J = self.ansatz.dx(z[:, 0], r)
            J[..., :, 1] *= r[:, None]
            step = -_solve2(J, res)
            step[:, 1] = np.clip(step[:, 1], -2, 2)
            out = np.linalg.norm(self._residual(z + step, x, np.float64), axis=-1)
        return np.where(np.isfinite(out), out, np.inf)

    def _edge_guesses(self, x: np.ndarray):
        """Near a non-cusp edge l_j the trace x(H, 0) is affine in H and
        l_j ~ kappa r^2; invert that model edge by edge."""
        b = self.ansatz.breakpoints()
        span = float(b.max() - b.min()) or 1.0
        cusps = set(self.ansatz.cusp_set())
        d = self.ansatz.d
        rs = 1e-4 * span
        out = []
        for j in range(d):
            if j in cusps:
                continue
            hi = b[j - 1] if j > 0 else b[0] + 3 * span
            lo = b[j] if j < d - 1 else b[-1] - 3 * span
            Ha, Hb = lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)
            e = self.ansatz.polytope.edges[j]
            nu = np.array(e.normal, dtype=float)
            with np.errstate(all="ignore"):
                P = self.ansatz.moment_map(np.array([Ha, Hb]), np.array([rs, rs]))
                t = (x - P[0]) @ (P[1] - P[0]) / ((P[1] - P[0]) @ (P[1] - P[0]))
                H = Ha + t * (Hb - Ha)
                lj = self.ansatz.moment_map(H, np.full_like(H, rs)) @ nu + float(e.offset)
                kappa = lj / rs**2
                ell = x @ nu + float(e.offset)
                r = np.sqrt(np.clip(ell / kappa, 1e-300, None))
            out.append(np.stack([H, np.log(r)], -1))
        return out

    def _cusp_guesses(self, x: np.ndarray):
        """Near a cusp edge l_k, x ~ x(rho = l_k, phi) with the position along
        the edge affine in (1 - cos phi) / 2; invert that leading-order model."""
        A = self.ansatz.arrays()
        out = []
        for k in self.ansatz.cusp_set():
            c = -A.breaks[k - 1]
            e = self.ansatz.polytope.edges[k]
            ell = x @ np.array(e.normal, dtype=float) + float(e.offset)
            rho = np.clip(ell, 1e-300, None)
            eps = 1e-9
            p0 = self.ansatz.moment_map(np.array([c + eps]), np.array([eps * 1e-3]))[0]
            p1 = self.ansatz.moment_map(np.array([c - eps]), np.array([eps * 1e-3]))[0]
            s = np.clip((x - p0) @ (p1 - p0) / ((p1 - p0) @ (p1 - p0)), 1e-6, 1 - 1e-6)
            phi = np.arccos(1 - 2 * s)
            out.append(np.stack([c + rho * np.cos(phi), np.log(rho * np.sin(phi))], -1))
        return out

    def solve(self, x, guess=None, dtype=np.float64, tol: float = NEWTON_TOL, check_inside: bool = True):
        """Return arrays (H, r) with moment_map(H, r) = x; shapes follow ``x[..., 0]``."""
        x = np.asarray(x, dtype=dtype)
        shape = x.shape[:-1]
        flat = x.reshape(-1, 2)
        if check_inside:
            ell = self.ansatz.polytope.ell(flat.astype(float))
            if np.any(ell <= 0):
                bad = flat[np.argmax(np.any(ell <= 0, axis=-1))]
                raise OutsidePolytope(f"x = {bad.astype(float).tolist()} is not interior (some l_i(x) <= 0)")
        if guess is None:
            z = self.guess(flat.astype(float)).astype(dtype)
        else:
            g = np.asarray(guess, dtype=dtype).reshape(-1, 2)
            z = np.stack([g[:, 0], np.log(g[:, 1])], axis=-1)
        z = z.copy()
        scale = 1 + np.linalg.norm(flat.astype(float), axis=-1)
        res = self._residual(z, flat, dtype)
        err = np.linalg.norm(res, axis=-1).astype(float)
        active = err > tol * scale
        it = 0
        while np.any(active):
            it += 1
            if it > MAX_ITER:
                worst = int(np.argmax(np.where(active, err / scale, -1)))
                raise NoConvergence(
                    f"Newton did not converge for x = {flat[worst].astype(float).tolist()} "
                    f"(residual {err[worst]:.3e}); point may be too close to the boundary"
                )
            ia = np.nonzero(active)[0]
            za = z[ia]
            r = np.exp(za[:, 1])
            J = self.ansatz.dx(za[:, 0], r, dtype)
            J[..., :, 1] *= r[:, None]
            step = -_solve2(J, res[ia])
            lam = np.ones(len(ia), dtype=dtype)
            # cap the log r move so a single step cannot leap many decades
            big = np.abs(step[:, 1]) > 2
            lam[big] = 2 / np.abs(step[big, 1])
            accepted = np.zeros(len(ia), dtype=bool)
            new_res = res[ia].copy()
            new_z = za.copy()
            for _ in range(40):
                todo = ~accepted
                if not np.any(todo):
                    break
                trial = za[todo] + lam[todo, None] * step[todo]
                with np.errstate(all="ignore"):
                    try_res = self._residual(trial, flat[ia[todo]], dtype)
                tn = np.linalg.norm(try_res, axis=-1).astype(float)
                ok = np.isfinite(tn) & (tn < err[ia[todo]] * (1 - 1e-4 * lam[todo].astype(float)) + 1e-300)
                ok |= np.isfinite(tn) & (tn <= tol * scale[ia[todo]])
                tidx = np.nonzero(todo)[0]
                acc = tidx[ok]
                new_z[acc] = trial[ok]
                new_res[acc] = try_res[ok]
                accepted[acc] = True
                lam[tidx[~ok]] *= 0.5
            # a step that can no longer reduce the residual has hit rounding level
            stuck = ~accepted
            z[ia] = new_z
            res[ia] = new_res
            err[ia] = np.linalg.norm(new_res, axis=-1).astype(float)
            active[ia] = (err[ia] > tol * scale[ia]) & ~stuck
            if np.any(stuck):
                hopeless = ia[stuck][err[ia[stuck]] > 1e3 * tol * scale[ia[stuck]]]
                if len(hopeless):
                    w = hopeless[0]
                    raise NoConvergence(
                        f"line search stalled for x = {flat[w].astype(float).tolist()} (residual {err[w]:.3e})"
                    )
        H = z[:, 0].reshape(shape)
        r = np.exp(z[:, 1]).reshape(shape)
        return H, r

    def _residual(self, z, target, dtype):
        return self.ansatz.moment_map(z[:, 0], np.exp(z[:, 1]), dtype) - target


def _solve2(J, b):
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    return np.stack(
        [
            (J[..., 1, 1] * b[..., 0] - J[..., 0, 1] * b[..., 1]) / det,
            (-J[..., 1, 0] * b[..., 0] + J[..., 0, 0] * b[..., 1]) / det,
        ],
        axis=-1,
    )


_INVERTERS: dict[int, tuple[Ansatz, MomentInverter]] = {}


def inverter_for(ansatz: Ansatz) -> MomentInverter:
    key = id(ansatz)
    hit = _INVERTERS.get(key)
    if hit is None or hit[0] is not ansatz:
        if len(_INVERTERS) > 32:
            _INVERTERS.clear()
        hit = (ansatz, MomentInverter(ansatz))
        _INVERTERS[key] = hit
    return hit[1]


def invert_moment(x, ansatz: Ansatz, guess: ChartPoint | None = None, dtype=np.float64) -> ChartPoint:
    """Chart point (H, r) whose image under the momentum map is ``x``."""
    g = None if guess is None else np.array([[guess.H, guess.r]])
    H, r = inverter_for(ansatz).solve(np.asarray(x, dtype=dtype)[None, :], g, dtype)
    return ChartPoint(float(H[0]), float(r[0]))


def invert_many(x, ansatz: Ansatz, guess=None, dtype=np.float64):
    """Vectorised :func:`invert_moment`; returns arrays (H, r)."""
    return inverter_for(ansatz).solve(x, guess, dtype)


# ------------------------------------------------------------------ Hessians


def hess_from_chart(ansatz: Ansatz, H, r, dtype=np.float64) -> np.ndarray:
    """Hess u = D xi (Dx)^{-1}, composed from the two analytic Jacobians."""
    D = ansatz.dxi(H, r, dtype)
    J = ansatz.dx(H, r, dtype)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    inv = np.stack(
        [np.stack([J[..., 1, 1], -J[..., 0, 1]], -1), np.stack([-J[..., 1, 0], J[..., 0, 0]], -1)], -2
    ) / det[..., None, None]
    return D @ inv


def inverse_hess_from_chart(ansatz: Ansatz, H, r, dtype=np.float64) -> np.ndarray:
    """u^{ij} = r det(D xi) (D xi D xi^T)^{-1}, a rational expression in the Jacobian entries."""
    D = ansatz.dxi(H, r, dtype)
    G = D @ np.swapaxes(D, -1, -2)
    det = D[..., 0, 0] * D[..., 1, 1] - D[..., 0, 1] * D[..., 1, 0]
    adj = np.stack([np.stack([G[..., 1, 1], -G[..., 0, 1]], -1), np.stack([-G[..., 1, 0], G[..., 0, 0]], -1)], -2)
    r = np.asarray(r, dtype=dtype)
    return adj * (r / det)[..., None, None]


def hessian_u(x, ansatz: Ansatz, dtype=np.float64) -> np.ndarray:
    H, r = invert_many(np.asarray(x)[None, :], ansatz, dtype=dtype)
    return hess_from_chart(ansatz, H, r, dtype)[0]


def metric_sample(x, ansatz: Ansatz, h: float | None = None) -> MetricSample:
    x = np.asarray(x, dtype=float)
    H, r = invert_many(x[None, :], ansatz)
    hess = hess_from_chart(ansatz, H, r)[0]
    inv = inverse_hess_from_chart(ansatz, H, r)[0]
    rc = abs(float(r[0]) ** 2 * np.linalg.det(hess) - 1)
    s = scalar_curvature(x, ansatz, h) if h is not None else float("nan")
    return MetricSample(x, float(H[0]), float(r[0]), hess, inv, s, rc)


def r_consistency(ansatz: Ansatz, x) -> np.ndarray:
    """|r^2 det Hess u - 1| at each momentum point (Hessian from the composed Jacobians)."""
    x = np.asarray(x, dtype=float)
    H, r = invert_many(x, ansatz)
    hess = hess_from_chart(ansatz, H, r)
    return np.abs(r**2 * np.linalg.det(hess) - 1)


# ------------------------------------------------------------------ curvature

_OFFSETS_2 = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]




def scalar_curvature_many(
    x, ansatz: Ansatz, h: float | None = None, dtype=np.longdouble
) -> np.ndarray:
    """Scalar curvature at many interior momentum points.

    The chart point of each stencil node is found by Newton, warm-started from
    the stencil centre, in extended precision so that cancellation in the
    difference quotients stays far below the O(h^2) truncation error.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    ell = ansatz.polytope.ell(x)
    if h is None:
        h_arr = ell.min(axis=-1) / 10
    else:
        h_arr = np.full(len(x), float(h))
    if np.any(ell.min(axis=-1) <= 2 * h_arr * np.linalg.norm(ansatz.polytope.normals, axis=-1).max()):
        raise StencilExitsPolytope("stencil of half-width 2h leaves the polytope")
    inv = inverter_for(ansatz)
    H0, r0 = inv.solve(x, dtype=np.float64)
    xl = x.astype(dtype)
    hl = h_arr.astype(dtype)[:, None]
    centre = np.stack([H0, r0], -1)

    def uinv(points):
        H, r = inv.solve(points, guess=centre, dtype=dtype, tol=1e-17, check_inside=False)
        return inverse_hess_from_chart(ansatz, H, r, dtype)

    # offsets scale per point, so feed the stencil by hand
    vals = {}
    for off in _OFFSETS_2:
        vals[off] = uinv(xl + hl * np.asarray(off, dtype=dtype))
    h2 = hl[:, 0] ** 2
    d11 = (vals[(1, 0)][:, 0, 0] - 2 * vals[(0, 0)][:, 0, 0] + vals[(-1, 0)][:, 0, 0]) / h2
    d22 = (vals[(0, 1)][:, 1, 1] - 2 * vals[(0, 0)][:, 1, 1] + vals[(0, -1)][:, 1, 1]) / h2
    mixed = (vals[(1, 1)][:, 0, 1] - vals[(1, -1)][:, 0, 1] - vals[(-1, 1)][:, 0, 1] + vals[(-1, -1)][:, 0, 1]) / (
        4 * h2
    )
    return (-(d11 + d22 + 2 * mixed)).astype(float)


def scalar_curvature(x, ansatz: Ansatz, h: float | None = 1e-3) -> float:
    return float(scalar_curvature_many(np.asarray(x, dtype=float)[None, :], ansatz, h)[0])


def interior_mesh(ansatz: Ansatz, n: int = 50, margin: float = 0.1, extent: float = 2.0) -> np.ndarray:
    """An n x n tensor mesh over a box around the vertices, keeping nodes with all l_i >= margin."""
    poly = ansatz.polytope
    verts = np.array([[float(c) for c in v] for v in poly.vertices()]) if poly.d > 1 else np.zeros((1, 2))
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    span = max(1.0, float(np.max(hi - lo)))
    g1 = np.linspace(lo[0] - extent * span, hi[0] + extent * span, n)
    g2 = np.linspace(lo[1] - extent * span, hi[1] + extent * span, n)
    X1, X2 = np.meshgrid(g1, g2, indexing="ij")
    pts = np.stack([X1.ravel(), X2.ravel()], -1)
    keep = poly.ell(pts).min(axis=-1) >= margin
    return pts[keep]


# ------------------------------------------------------------------ potential

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _segment_integral(ansatz: Ansatz, a: np.ndarray, b: np.ndarray, tol: float, depth: int = 0) -> float:
    """Adaptive Gauss-Legendre for int_0^1 xi(x(t)) . (b - a) dt on the segment from a to b."""
    panels = [(0.0, 1.0)]
    total = 0.0
    for _ in range(30):
        if not panels:
            return total
        lo = np.array([p[0] for p in panels])
        hi = np.array([p[1] for p in panels])
        coarse = _panel_sum(ansatz, a, b, lo, hi, 12)
        fine = _panel_sum(ansatz, a, b, lo, hi, 24)
        err = np.abs(fine - coarse)
        width = hi - lo
        ok = err <= tol * np.maximum(width, 1e-6)
        total += float(fine[ok].sum())
        nxt = []
        for l, h_, good in zip(lo, hi, ok):
            if not good:
                m = 0.5 * (l + h_)
                nxt += [(l, m), (m, h_)]
        panels = nxt
    raise PathExitsPolytope("quadrature did not converge; segment passes too close to the boundary")


def _panel_sum(ansatz, a, b, lo, hi, n):
    nodes, weights = _gl(n)
    t = 0.5 * (hi[:, None] + lo[:, None]) + 0.5 * (hi - lo)[:, None] * nodes[None, :]
    pts = a + t[..., None] * (b - a)
    H, r = invert_many(pts.reshape(-1, 2), ansatz)
    xi = ansatz.xi(H, r).reshape(t.shape + (2,))
    integrand = xi @ (b - a)
    return 0.5 * (hi - lo) * (integrand * weights).sum(axis=-1)


def potential(
    x,
    ansatz: Ansatz,
    base_point,
    waypoints: Sequence | None = None,
    tol: float = 1e-12,
) -> PotentialValue:
    """u(x) - u(base_point), integrating xi . dx along a straight or polyline path."""
    x = np.asarray(x, dtype=float)
    base = np.asarray(base_point, dtype=float)
    path = [base] + [np.asarray(w, dtype=float) for w in (waypoints or [])] + [x]
    poly = ansatz.polytope
    for p in path:
        if np.any(poly.ell(p) <= 0):
            raise PathExitsPolytope(f"path node {p.tolist()} lies outside the open polytope")
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        total += _segment_integral(ansatz, a, b, tol)
    H, r = invert_many(x[None, :], ansatz)
    return PotentialValue(total, ansatz.xi(H, r)[0])


def potential_chart_path(ansatz: Ansatz, start: ChartPoint, end: ChartPoint, n: int = 64) -> float:
    """u(end) - u(start) integrating xi . Dx along the straight chart segment in (H, log r).

    This never calls the inverse momentum map and so serves as an independent
    check of :func:`potential`.
    """
    z0 = np.array([start.H, np.log(start.r)])
    z1 = np.array([end.H, np.log(end.r)])
    nodes, weights = _gl(n)
    t = 0.5 * (nodes + 1)
    z = z0 + t[:, None] * (z1 - z0)
    r = np.exp(z[:, 1])
    J = ansatz.dx(z[:, 0], r)
    dz = z1 - z0
    dxdt = J[..., 0] * dz[0] + J[..., 1] * (r * dz[1])[:, None]
    xi = ansatz.xi(z[:, 0], r)
    return float(0.5 * np.sum(weights * np.sum(xi * dxdt, axis=-1)))


# ------------------------------------------------------------------ momentum profile


def momentum_profile(ansatz: Ansatz, tau_values, cusp_edge: int | None = None) -> list[tuple[float, float]]:
    """Squared norm of the Killing field whose moment map is tau = 2 l_k.

    Evaluated on the line H = -a_{k-1} through the cusp point, where the
    r-coordinate is found by root finding on tau(r).  The quotient
    r |grad tau|^2 / |d(tau, y)/d(H, r)|, with y the lattice complement of
    tau, uses analytic partials.
    """
    k = cusp_edge if cusp_edge is not None else (ansatz.cusp_set()[0] if ansatz.cusp_set() else 1)
    A = ansatz.arrays()
    H0 = float(-A.breaks[k - 1])
    nk = np.array(ansatz.polytope.edges[k].normal, dtype=float)
    lk = float(ansatz.polytope.edges[k].offset)
    # y = w . x completes tau to lattice coordinates: det(nu_k, w) = 1
    p, q = ansatz.polytope.edges[k].normal
    _, s, t = _ext_gcd(int(p), int(q))
    w = np.array([-t, s], dtype=float)

    def tau_at(r):
        x = ansatz.moment_map(np.array([H0]), np.array([r]))[0]
        return 2 * (x @ nk + lk)

    out = []
    for tau in np.atleast_1d(np.asarray(tau_values, dtype=float)):
        lo, hi = 1e-12, 1.0
        while tau_at(hi) < tau:
            hi *= 2
            if hi > 1e12:
                raise ValueError(f"tau = {tau} is not reached on the profile line")
        r = brentq(lambda s: tau_at(s) - tau, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        J = ansatz.dx(np.array([H0]), np.array([r]))[0]
        dtau = 2 * (nk @ J)
        dy = w @ J
        num = r * (dtau[0] ** 2 + dtau[1] ** 2)
        den = dtau[0] * dy[1] - dtau[1] * dy[0]
        out.append((float(tau), float(num / abs(den))))
    return out


def killing_norm(ansatz: Ansatz, x, direction) -> np.ndarray:
    """u^{ij} v_i v_j: the squared length of the torus generator with weight ``direction``."""
    H, r = invert_many(np.atleast_2d(np.asarray(x, dtype=float)), ansatz)
    v = np.asarray(direction, dtype=float)
    return np.einsum("...i,...ij,...j->...", v, inverse_hess_from_chart(ansatz, H, r), v)


# ------------------------------------------------------------------ export


def export_metric_jsonl(ansatz: Ansatz, x_points, path: Union[str, Path], h: float | None = 1e-3) -> int:
    x_points = np.atleast_2d(np.asarray(x_points, dtype=float))
    H, r = invert_many(x_points, ansatz)
    hess = hess_from_chart(ansatz, H, r)
    s = scalar_curvature_many(x_points, ansatz, h) if h is not None else np.full(len(x_points), np.nan)
    rc = np.abs(r**2 * np.linalg.det(hess) - 1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for i in range(len(x_points)):
            rec = MetricSample(x_points[i], H[i], r[i], hess[i], np.linalg.inv(hess[i]), s[i], rc[i]).to_record()
            handle.write(json.dumps(rec, sort_keys=True) + "\n")
    return len(x_points)
