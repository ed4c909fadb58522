"""End behaviour: classification of the asymptotic model and decay fits.

For strictly unbounded polytopes the large-rho expansion of ``r det D xi``
is compared with the closed-form leading term; in the parallel case the
comparison is against the product model, i.e. the nut-free smooth
construction on the same polytope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .ansatz import SMOOTH, Ansatz
from .errors import FitFailure, InadmissibleNut
from .polytope import PARALLEL, MomentPolytope, NutParameter, det2, nut_issues

ALE = "ALE"
GENERALIZED_TN = "generalized-TN"
EXCEPTIONAL_TN = "exceptional-TN"
PRODUCT = "product"

DEFAULT_RADII = (1e2, 1e3, 1e4, 1e5)
PHI_MARGIN = 0.05


@dataclass
class EndModel:
    kind: str
    leading: Callable[[np.ndarray, np.ndarray], np.ndarray]
    decay_exponent: float = 2.0
    description: str = ""


def classify(polytope: MomentPolytope, nut: NutParameter | Sequence[float]) -> EndModel:
    if not isinstance(nut, NutParameter):
        nut = NutParameter((float(nut[0]), float(nut[1])))
    bad = nut_issues(polytope, nut)
    if bad:
        raise InadmissibleNut("; ".join(bad))
    n1 = polytope.edges[0].normal
    nd = polytope.edges[-1].normal
    nu = nut.nu
    if polytope.mode == PARALLEL:
        return EndModel(PRODUCT, _no_leading, 2.0, "product of a round sphere and a hyperbolic plane")
    c1, cd, c0 = det2(nu, n1), det2(nu, nd), det2(nd, n1)

    def leading(H, r):
        rho = np.hypot(H, r)
        s = (rho - H) / (2 * rho)
        return c1 * (1 - s) + cd * s + c0 / (2 * rho)

    if nut.is_zero:
        return EndModel(ALE, leading, 2.0, f"r det D xi ~ {c0}/(2 rho)")
    if c1 > 0 and cd > 0:
        return EndModel(GENERALIZED_TN, leading, 2.0)
    return EndModel(EXCEPTIONAL_TN, leading, 2.0)


def _no_leading(H, r):
    raise NotImplementedError("the product model needs the reference construction; use decay_fit")


def gauge_residual_vector(ansatz: Ansatz) -> np.ndarray:
    """V = sum_i a_i (nu_i - nu_{i+1}) + sum_k Lambda_k nu_k in the ansatz's current gauge.

    For nu != 0 the expansion of r det D xi carries det(nu, V) r^2 / (2 rho^3);
    translating H by c changes V by c (nu_1 - nu_d).
    """
    A = ansatz.arrays()
    return -(A.breaks[:, None] * A.diffs).sum(axis=0) + A.cusp_weights.sum(axis=0)


def centered(ansatz: Ansatz) -> tuple[Ansatz, bool]:
    """Translate H so that det(nu, V) = 0 when possible; returns (ansatz, succeeded)."""
    A = ansatz.arrays()
    nu = A.nu
    if not np.any(nu):
        return ansatz, True
    den = det2(nu, A.normals[0] - A.normals[-1])
    num = det2(nu, gauge_residual_vector(ansatz))
    if abs(den) < 1e-14:
        return ansatz, abs(num) < 1e-14
    c = Fraction(num / den).limit_denominator(10**15)
    return ansatz.with_shift(ansatz.shift + c), True


@dataclass
class FitReport:
    kind: str
    rays: list[dict] = field(default_factory=list)
    gauge_shift: float = 0.0
    quantity: str = "r*detDxi"
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "quantity": self.quantity,
            "gauge_shift": self.gauge_shift,
            "pass": self.passed,
            "rays": self.rays,
        }


def default_rays(n: int = 7) -> np.ndarray:
    return np.linspace(PHI_MARGIN, math.pi - PHI_MARGIN, n)


def decay_fit(
    ansatz: Ansatz,
    rays: Sequence[float] | None = None,
    radii: Sequence[float] = DEFAULT_RADII,
    max_slope: float = -1.9,
    quantity: str | None = None,
    recenter: bool = True,
    raise_on_fail: bool = False,
) -> FitReport:
    """Fit the log-log slope of the residual against rho along rays (H, r) = rho (cos phi, sin phi).

    ``quantity`` is ``"r*detDxi"`` (default for strictly unbounded ends) or
    ``"detDxi"`` (default for the parallel case, where the comparison is
    det D xi against the product model).  Residuals at rounding level are
    reported as exact and pass.
    """
    model = classify(ansatz.polytope, ansatz.nut)
    shift0 = ansatz.shift
    work = ansatz
    if recenter and model.kind in (GENERALIZED_TN, EXCEPTIONAL_TN):
        work, ok = centered(ansatz)
    if quantity is None:
        quantity = "detDxi" if model.kind == PRODUCT else "r*detDxi"
    phis = default_rays() if rays is None else np.asarray(rays, dtype=float)
    radii = np.asarray(radii, dtype=float)
    ld = np.longdouble
    if model.kind == PRODUCT:
        ref = Ansatz(work.polytope, work.constants, NutParameter(), SMOOTH, work.shift)

        def leading(H, r):
            return ref.det_dxi(H, r, ld) * (r if quantity == "r*detDxi" else 1)

    else:

        def leading(H, r):
            base = model.leading(H, r)
            return base if quantity == "r*detDxi" else base / r

    out = []
    for phi in phis:
        H = (radii * math.cos(phi)).astype(ld)
        r = (radii * math.sin(phi)).astype(ld)
        val = work.det_dxi(H, r, ld)
        if quantity == "r*detDxi":
            val = val * r
        lead = leading(H, r)
        res = np.abs(val - lead).astype(float)
        floor = 64 * np.finfo(ld).eps * np.abs(lead).astype(float).max(initial=0) + 1e-300
        if np.all(res <= floor * 1e3):
            slope, exact = -math.inf, True
        else:
            slope = float(np.polyfit(np.log(radii), np.log(np.maximum(res, 1e-300)), 1)[0])
            exact = False
        out.append({"phi": float(phi), "slope": slope, "exact": exact, "pass": bool(slope <= max_slope)})
    rep = FitReport(model.kind, out, float(work.shift - shift0), quantity, all(o["pass"] for o in out))
    if raise_on_fail and not rep.passed:
        raise FitFailure(f"decay slopes {[o['slope'] for o in out]} exceed {max_slope}", slopes=[o["slope"] for o in out])
    return rep
