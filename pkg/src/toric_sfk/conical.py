"""Conical constructions and the explicit interpolation family.

Two objects live here.  ``conical_construct`` wires cone angles into the
harmonic ansatz (normals rescaled by 1/theta on conical edges and
breakpoints a^theta).  ``InterpolationFamily`` builds the potentials
u^theta that interpolate between the cusp potential (theta -> 0) and the
smooth potential (theta -> 1); these are generally not scalar-flat.

Conventions for the cusp edges i in I: alpha_i = -Lambda_i / 2 and
beta_i = det(nu_{i+1}, nu_{i-1}) / 2, so that near edge i the cusp potential
is (alpha_i + beta_i l_i) log l_i plus a smooth function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .ansatz import CONICAL, CUSP, SMOOTH, Ansatz, build
from .errors import AngleOutOfRange
from .geometry import hess_from_chart, inverter_for, potential
from .polytope import MomentPolytope, NutParameter, as_number, det2


@dataclass(frozen=True)
class ConicalData:
    angles: Mapping[int, Fraction]
    primed_normals: tuple
    a_theta: tuple

    @classmethod
    def from_ansatz(cls, ansatz: Ansatz) -> "ConicalData":
        return cls(dict(ansatz.polytope.cone_angles), tuple(ansatz.scaled_normals_exact()), ansatz.constants.a_theta)


def conical_construct(
    polytope: MomentPolytope,
    theta: Mapping[int, object],
    nut: NutParameter | None = None,
    recenter: int | None = None,
) -> Ansatz:
    """Ansatz with cone angle 2 pi theta_j along edge j (0-based keys).

    theta_j = 1 is the smooth edge and theta_j = 0 turns the edge into a cusp
    edge, so the singular factors 1/theta and 1/(1 - theta) never appear.
    """
    angles = {}
    cusps = list(polytope.cusp_set)
    for j, t in theta.items():
        t = as_number(t)
        if not 0 <= t <= 1:
            raise AngleOutOfRange(f"theta_{j + 1} = {t} outside [0, 1]")
        if t == 1:
            continue
        if t == 0:
            cusps.append(int(j))
        else:
            angles[int(j)] = t
    poly = MomentPolytope(polytope.edges, tuple(sorted(cusps)), angles, polytope.mode)
    if poly.cusp_set and angles:
        raise AngleOutOfRange("mixing cusp and conical edges is not supported")
    if angles:
        variant = CONICAL
    elif poly.cusp_set:
        variant = CUSP
    else:
        variant = SMOOTH
    return build(poly, nut, variant=variant, recenter=recenter)


# ------------------------------------------------------------------ model terms


def _ells(poly: MomentPolytope, x: np.ndarray) -> np.ndarray:
    return poly.ell(x)


def cusp_coefficients(ansatz: Ansatz) -> dict[int, tuple[float, float]]:
    """(alpha_i, beta_i) for each cusp edge, in the sign convention of the module docstring."""
    poly = ansatz.polytope
    out = {}
    for k in ansatz.cusp_set():
        lam = ansatz.constants.lambda_caps[k]
        out[k] = (-float(lam) / 2, det2(poly.edges[k + 1].normal, poly.edges[k - 1].normal) / 2)
    return out


def cusp_model(poly: MomentPolytope, coeffs: Mapping[int, tuple[float, float]], x: np.ndarray):
    """1/2 sum_{i not in I} l log l + sum_{i in I} (alpha + beta l) log l; value and Hessian."""
    ell = _ells(poly, x)
    val = np.zeros(ell.shape[:-1])
    hess = np.zeros(ell.shape[:-1] + (2, 2))
    for i, e in enumerate(poly.edges):
        nu = np.array(e.normal, dtype=float)
        nn = np.outer(nu, nu)
        li = ell[..., i]
        if i in coeffs:
            a, b = coeffs[i]
            val += (a + b * li) * np.log(li)
            hess += (b / li - a / li**2)[..., None, None] * nn
        else:
            val += 0.5 * li * np.log(li)
            hess += (0.5 / li)[..., None, None] * nn
    return val, hess


def interpolation_model(
    poly: MomentPolytope, coeffs: Mapping[int, tuple[float, float]], theta: Mapping[int, float], x: np.ndarray
):
    """Model part of u^theta (everything except the two smooth remainders); value and Hessian.

    For i in I with c = theta / (1 - theta):
      1/(2 theta) l log l + (beta - 1/(2 theta)) l log(l + c) + alpha log(l + c)
      - (beta - 1/2) l log(1/(1 - theta)) - alpha log(1/(1 - theta)).
    """
    ell = _ells(poly, x)
    val = np.zeros(ell.shape[:-1])
    hess = np.zeros(ell.shape[:-1] + (2, 2))
    for i, e in enumerate(poly.edges):
        nu = np.array(e.normal, dtype=float)
        nn = np.outer(nu, nu)
        li = ell[..., i]
        if i not in coeffs:
            val += 0.5 * li * np.log(li)
            hess += (0.5 / li)[..., None, None] * nn
            continue
        a, b = coeffs[i]
        th = float(theta[i])
        if th == 1.0:
            val += 0.5 * li * np.log(li)
            hess += (0.5 / li)[..., None, None] * nn
            continue
        c = th / (1 - th)
        L = -math.log1p(-th)
        lc = li + c
        val += (
            li * np.log(li) / (2 * th)
            + (b - 1 / (2 * th)) * li * np.log(lc)
            + a * np.log(lc)
            - (b - 0.5) * li * L
            - a * L
        )
        f2 = 1 / (2 * th * li) + (b - 1 / (2 * th)) * (1 / lc + c / lc**2) - a / lc**2
        hess += f2[..., None, None] * nn
    return val, hess


def interpolation_potential(
    x,
    theta: Mapping[int, float],
    cusp_potential_h: Callable[[np.ndarray], np.ndarray],
    smooth_potential_h: Callable[[np.ndarray], np.ndarray],
    polytope: MomentPolytope,
    coeffs: Mapping[int, tuple[float, float]],
) -> np.ndarray:
    """u^theta(x) from callbacks returning the smooth remainders h and h_AS."""
    for i, t in theta.items():
        if not 0 < float(t) <= 1:
            raise AngleOutOfRange(f"theta_{i + 1} = {t} outside (0, 1]")
    if set(theta) != set(coeffs):
        raise AngleOutOfRange("theta must be given for exactly the cusp edges")
    x = np.asarray(x, dtype=float)
    model, _ = interpolation_model(polytope, coeffs, theta, x)
    p_cusp = math.prod(1 - float(t) for t in theta.values())
    p_smooth = math.prod(float(t) for t in theta.values())
    return model + p_cusp * cusp_potential_h(x) + p_smooth * smooth_potential_h(x)


class InterpolationFamily:
    """u^theta for a polytope with cusp edges, with nut parameter zero.

    ``u`` (cusp) and ``u_AS`` (smooth) are normalised to vanish at
    ``base_point``; their smooth remainders h and h_AS follow by subtracting
    the model terms.  Hessians are analytic, so the scalar curvature of
    u^theta only needs finite differences of its inverse Hessian.
    """

    def __init__(self, polytope: MomentPolytope, base_point=None):
        if not polytope.cusp_set:
            raise ValueError("the interpolation family needs at least one cusp edge")
        self.cusp = build(polytope, NutParameter(), variant=CUSP)
        smooth_poly = MomentPolytope(polytope.edges, (), {}, polytope.mode)
        self.smooth = build(smooth_poly, NutParameter(), variant=SMOOTH)
        self.polytope = self.cusp.polytope
        self.coeffs = cusp_coefficients(self.cusp)
        if base_point is None:
            base_point = self._default_base()
        self.base_point = np.asarray(base_point, dtype=float)

    def _default_base(self):
        verts = np.array([[float(c) for c in v] for v in self.polytope.vertices()])
        centre = verts.mean(axis=0)
        inward = sum(np.array(e.normal, dtype=float) for e in self.polytope.edges)
        return centre + inward / np.linalg.norm(inward)

    def u(self, x) -> np.ndarray:
        return self._pot(self.cusp, x)

    def u_as(self, x) -> np.ndarray:
        return self._pot(self.smooth, x)

    def _pot(self, ansatz, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.array([potential(p, ansatz, self.base_point).u for p in x])

    def h(self, x) -> np.ndarray:
        return self.u(x) - cusp_model(self.polytope, self.coeffs, np.atleast_2d(x))[0]

    def h_as(self, x) -> np.ndarray:
        return self.u_as(x) - cusp_model(self.polytope, {}, np.atleast_2d(x))[0]

    def theta_map(self, theta) -> dict[int, float]:
        if isinstance(theta, Mapping):
            return {int(k): float(v) for k, v in theta.items()}
        return {k: float(theta) for k in self.coeffs}

    def potential(self, x, theta) -> np.ndarray:
        th = self.theta_map(theta)
        return interpolation_potential(np.atleast_2d(x), th, self.h, self.h_as, self.polytope, self.coeffs)

    def potentials(self, x, thetas) -> dict[float, np.ndarray]:
        """u^theta on points ``x`` for several uniform angles, reusing u and u_AS."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        hv, hav = self.h(x), self.h_as(x)
        return {
            float(t): interpolation_potential(x, self.theta_map(t), lambda _: hv, lambda _: hav, self.polytope, self.coeffs)
            for t in thetas
        }

    # -------------------------------------------------------------- Hessians
    def _hess(self, ansatz: Ansatz, x: np.ndarray, dtype, guess=None) -> np.ndarray:
        inv = inverter_for(ansatz)
        H, r = inv.solve(x, guess=guess, dtype=dtype, tol=1e-17 if dtype == np.longdouble else 1e-12)
        return hess_from_chart(ansatz, H, r, dtype)

    def hessian(self, x, theta, dtype=np.float64) -> np.ndarray:
        th = self.theta_map(theta)
        x = np.atleast_2d(np.asarray(x, dtype=dtype))
        xf = x.astype(float)
        _, m_th = interpolation_model(self.polytope, self.coeffs, th, xf)
        _, m_cusp = cusp_model(self.polytope, self.coeffs, xf)
        _, m_as = cusp_model(self.polytope, {}, xf)
        hu = self._hess(self.cusp, x, dtype)
        has = self._hess(self.smooth, x, dtype)
        p_cusp = math.prod(1 - t for t in th.values())
        p_smooth = math.prod(th.values())
        # model Hessians are only needed to double precision; they cancel exactly against nothing
        return (
            m_th.astype(dtype)
            + p_cusp * (hu - m_cusp.astype(dtype))
            + p_smooth * (has - m_as.astype(dtype))
        )

    def scalar_curvature(self, x, theta, h: float = 1e-3) -> np.ndarray:
        """-sum d_i d_j u^{ij} of u^theta by second-order central differences."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ld = np.longdouble
        offs = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
        vals = {}
        for o in offs:
            pts = x.astype(ld) + ld(h) * np.array(o, dtype=ld)
            hess = self.hessian(pts, theta, ld)
            det = hess[..., 0, 0] * hess[..., 1, 1] - hess[..., 0, 1] * hess[..., 1, 0]
            inv = np.stack(
                [np.stack([hess[..., 1, 1], -hess[..., 0, 1]], -1), np.stack([-hess[..., 1, 0], hess[..., 0, 0]], -1)],
                -2,
            ) / det[..., None, None]
            vals[o] = inv
        hh = ld(h) ** 2
        d11 = (vals[(1, 0)][:, 0, 0] - 2 * vals[(0, 0)][:, 0, 0] + vals[(-1, 0)][:, 0, 0]) / hh
        d22 = (vals[(0, 1)][:, 1, 1] - 2 * vals[(0, 0)][:, 1, 1] + vals[(0, -1)][:, 1, 1]) / hh
        mixed = (vals[(1, 1)][:, 0, 1] - vals[(1, -1)][:, 0, 1] - vals[(-1, 1)][:, 0, 1] + vals[(-1, -1)][:, 0, 1]) / (4 * hh)
        return (-(d11 + d22 + 2 * mixed)).astype(float)


def degeneration_profile(family: InterpolationFamily, mesh, thetas_high=(0.9, 0.99, 0.999), thetas_low=(0.1, 0.01, 0.001)) -> dict:
    """max over ``mesh`` of |u^theta - u_AS| (theta -> 1) and of |u^theta - u| modulo constants (theta -> 0)."""
    mesh = np.atleast_2d(np.asarray(mesh, dtype=float))
    pts = np.vstack([family.base_point[None, :], mesh])
    u = family.u(pts)
    uas = family.u_as(pts)
    hv = u - cusp_model(family.polytope, family.coeffs, pts)[0]
    hav = uas - cusp_model(family.polytope, {}, pts)[0]

    def ut(t):
        return interpolation_potential(pts, family.theta_map(t), lambda _: hv, lambda _: hav, family.polytope, family.coeffs)

    high = {}
    for t in thetas_high:
        diff = ut(t) - uas
        high[t] = float(np.max(np.abs(diff[1:])))
    low = {}
    for t in thetas_low:
        diff = ut(t) - u
        low[t] = float(np.max(np.abs(diff[1:] - diff[0])))
    return {"toward_smooth": high, "toward_cusp": low}
