"""Harmonic ansatz on the half-plane: xi, its Jacobian, and the momentum map.

Everything is expressed through the breakpoints ``a_i`` (sorted increasingly)
and the normals ``nu_i``.  With ``H_i = H + a_i`` and ``rho_i = |(H_i, r)|``
the pair

    xi = nu_1 log r + 1/2 sum_i (nu_{i+1} - nu_i) log(H_i + rho_i)
         - 1/2 sum_{k in I} Lambda_k nu_k / rho_{k-1} + nu H

consists of axi-symmetric harmonic functions.  The momentum coordinates are
primitives of ``r (d xi_2/dr dH - d xi_2/dH dr)`` and its partner, and in
closed form read ``x = (Phi_2, -Phi_1)`` with

    Phi = nu_1 H - 1/2 sum_i (nu_{i+1} - nu_i)(rho_i - H_i)
          - 1/2 sum_k Lambda_k nu_k (rho_{k-1} - H_{k-1}) / rho_{k-1} - nu r^2 / 2.

``rho - H`` and ``log(H + rho)`` are evaluated without cancellation on both
sides of ``H_i = 0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import EvaluationOverflow, InadmissibleNut, InvalidPolytope, PositivityViolation
from .polytope import (
    MomentPolytope,
    NutParameter,
    PolytopeConstants,
    derive_constants,
    normalize,
    nut_issues,
    transform_nut,
    validate,
)
from .report import SuiteResult, VerificationReport

CUSP = "cusp"
SMOOTH = "smooth"
CONICAL = "conical"
VARIANTS = (CUSP, SMOOTH, CONICAL)


def to_dtype(value, dtype) -> np.ndarray:
    """Convert a Fraction (or float) to ``dtype`` without a float64 detour for Fractions."""
    if isinstance(value, Fraction):
        return dtype(value.numerator) / dtype(value.denominator)
    return dtype(value)


@dataclass(frozen=True)
class ChartPoint:
    """A point (H, r) of the upper half-plane."""

    H: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"chart point needs r > 0, got {self.r}")

    def caches(self, breaks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Hi = self.H + np.asarray(breaks, dtype=float)
        return Hi, np.hypot(Hi, self.r)


@dataclass(frozen=True)
class _Arrays:
    normals: np.ndarray  # (d, 2)
    diffs: np.ndarray  # (d-1, 2)
    breaks: np.ndarray  # (d-1,)
    cusp_rows: np.ndarray  # breakpoint index k-1 for every cusp edge k
    cusp_weights: np.ndarray  # (m, 2) = Lambda_k * nu_k
    nu: np.ndarray
    offset: np.ndarray


@dataclass(frozen=True)
class Ansatz:
    """All data needed to evaluate one construction.

    ``shift`` is the H-translation: the ansatz is evaluated with breakpoints
    ``a - shift`` so that ``H_new = H_old + shift``.  The momentum map is
    corrected by a constant so it always lands in the frame of ``polytope``.
    """

    polytope: MomentPolytope
    constants: PolytopeConstants
    nut: NutParameter
    variant: str = CUSP
    shift: Fraction = Fraction(0)
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    # -------------------------------------------------------------- data
    @property
    def d(self) -> int:
        return self.polytope.d

    def raw_breaks(self) -> tuple:
        if self.variant == SMOOTH:
            return self.constants.a_prime
        if self.variant == CUSP:
            return self.constants.a
        return self.constants.a_theta

    def cusp_set(self) -> tuple[int, ...]:
        return self.polytope.cusp_set if self.variant == CUSP else ()

    def scaled_normals_exact(self) -> list[tuple]:
        out = []
        for i, e in enumerate(self.polytope.edges):
            if self.variant == CONICAL and i in self.polytope.cone_angles:
                th = self.polytope.cone_angles[i]
                out.append((e.normal[0] / th, e.normal[1] / th))
            else:
                out.append((Fraction(e.normal[0]), Fraction(e.normal[1])))
        return out

    def arrays(self, dtype=np.float64) -> _Arrays:
        dtype = np.dtype(dtype).type
        if dtype in self._cache:
            return self._cache[dtype]
        normals = np.array(
            [[to_dtype(c, dtype) for c in n] for n in self.scaled_normals_exact()], dtype=dtype
        )
        breaks = np.array([to_dtype(a - self.shift, dtype) for a in self.raw_breaks()], dtype=dtype)
        cusps = self.cusp_set()
        rows = np.array([k - 1 for k in cusps], dtype=int)
        weights = np.array(
            [[to_dtype(self.constants.lambda_caps[k], dtype) * dtype(c) for c in self.polytope.edges[k].normal] for k in cusps],
            dtype=dtype,
        ).reshape(len(cusps), 2)
        nu = np.array([dtype(self.nut.nu[0]), dtype(self.nut.nu[1])], dtype=dtype)
        n1 = self.polytope.edges[0].normal
        off = (-self.shift * n1[1], self.shift * n1[0])
        offset = np.array([to_dtype(off[0], dtype), to_dtype(off[1], dtype)], dtype=dtype)
        arr = _Arrays(normals, np.diff(normals, axis=0), breaks, rows, weights, nu, offset)
        self._cache[dtype] = arr
        return arr

    def breakpoints(self) -> np.ndarray:
        """Values of H at which some H_i vanishes (the points -a_i, in this gauge)."""
        return -self.arrays().breaks

    # -------------------------------------------------------------- core
    def _pieces(self, H, r, dtype):
        A = self.arrays(dtype)
        H = np.asarray(H, dtype=dtype)
        r = np.asarray(r, dtype=dtype)
        if np.any(~(r > 0)):
            raise ValueError("all chart points need r > 0")
        Hi = H[..., None] + A.breaks
        rr = r[..., None]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho = np.hypot(Hi, rr)
            pos = Hi >= 0
            r2 = rr * rr
            # q = rho - H_i and p = rho + H_i, each formed without cancellation
            q = np.where(pos, r2 / (rho + Hi), rho - Hi)
            p = np.where(pos, rho + Hi, r2 / (rho - Hi))
            logp = np.where(pos, np.log(rho + Hi), 2 * np.log(rr) - np.log(rho - Hi))
        if not np.all(np.isfinite(logp)) or not np.all(np.isfinite(q)):
            raise EvaluationOverflow("H_i + rho_i left floating-point range")
        return A, H, r, Hi, rho, q, p, logp

    def xi(self, H, r, dtype=np.float64) -> np.ndarray:
        """xi(H, r), shape (..., 2)."""
        A, H, r, Hi, rho, q, p, logp = self._pieces(H, r, dtype)
        out = A.normals[0] * np.log(r)[..., None] + 0.5 * (logp @ A.diffs)
        if len(A.cusp_rows):
            out = out - 0.5 * ((1 / rho[..., A.cusp_rows]) @ A.cusp_weights)
        return out + H[..., None] * A.nu

    def dxi(self, H, r, dtype=np.float64) -> np.ndarray:
        """Jacobian [[dxi1/dH, dxi1/dr], [dxi2/dH, dxi2/dr]], shape (..., 2, 2)."""
        A, H, r, Hi, rho, q, p, logp = self._pieces(H, r, dtype)
        rr = r[..., None]
        col_h = A.nu + 0.5 * ((1 / rho) @ A.diffs)
        col_r = A.normals[0] / rr + 0.5 * ((rr / (rho * p)) @ A.diffs)
        if len(A.cusp_rows):
            rk = rho[..., A.cusp_rows]
            hk = Hi[..., A.cusp_rows]
            col_h = col_h + 0.5 * ((hk / rk**3) @ A.cusp_weights)
            col_r = col_r + 0.5 * ((rr / rk**3) @ A.cusp_weights)
        return np.stack([col_h, col_r], axis=-1)

    def det_dxi(self, H, r, dtype=np.float64) -> np.ndarray:
        D = self.dxi(H, r, dtype)
        return D[..., 0, 0] * D[..., 1, 1] - D[..., 0, 1] * D[..., 1, 0]

    def moment_map(self, H, r, dtype=np.float64) -> np.ndarray:
        """Momentum coordinates x(H, r), shape (..., 2), in the polytope's own frame."""
        A, H, r, Hi, rho, q, p, logp = self._pieces(H, r, dtype)
        phi = H[..., None] * A.normals[0] - 0.5 * (q @ A.diffs)
        if len(A.cusp_rows):
            phi = phi - 0.5 * ((q[..., A.cusp_rows] / rho[..., A.cusp_rows]) @ A.cusp_weights)
        phi = phi - 0.5 * (r * r)[..., None] * A.nu
        return np.stack([phi[..., 1], -phi[..., 0]], axis=-1) + A.offset

    def dx(self, H, r, dtype=np.float64) -> np.ndarray:
        """Jacobian of the momentum map [[dx1/dH, dx1/dr], [dx2/dH, dx2/dr]]."""
        return dx_from_dxi(self.dxi(H, r, dtype), np.asarray(r, dtype=dtype))

    def with_shift(self, shift) -> "Ansatz":
        return Ansatz(self.polytope, self.constants, self.nut, self.variant, Fraction(shift))


def dx_from_dxi(D: np.ndarray, r) -> np.ndarray:
    r = np.asarray(r)[..., None]
    row1 = np.stack([D[..., 1, 1], -D[..., 1, 0]], axis=-1) * r
    row2 = np.stack([-D[..., 0, 1], D[..., 0, 0]], axis=-1) * r
    return np.stack([row1, row2], axis=-2)


def build(
    polytope: MomentPolytope,
    nut: NutParameter | Sequence[float] | None = None,
    variant: str = CUSP,
    recenter: int | None = None,
    check: bool = True,
) -> Ansatz:
    """Validate, normalize and bundle a construction.

    ``recenter`` is a 1-based breakpoint index k; H is translated so that
    the k-th breakpoint sits at H = 0.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    if nut is None:
        nut = NutParameter()
    elif not isinstance(nut, NutParameter):
        nut = NutParameter((float(nut[0]), float(nut[1])))
    if check:
        report = validate(polytope)
        if not report.valid:
            normed, tr = normalize(polytope)
            report = validate(normed)
            if not report.valid:
                raise InvalidPolytope("; ".join(report.issues))
            polytope, nut = normed, transform_nut(nut, tr)
        elif polytope.edges[0].normal != (0, 1) or polytope.edges[0].offset != 0:
            polytope, tr = normalize(polytope)
            nut = transform_nut(nut, tr)
        bad = nut_issues(polytope, nut)
        if bad:
            raise InadmissibleNut("; ".join(bad))
    if variant == CONICAL and polytope.cusp_set:
        raise InvalidPolytope("the conical construction does not carry cusp edges")
    constants = derive_constants(polytope)
    shift = Fraction(0)
    ans = Ansatz(polytope, constants, nut, variant, shift)
    if recenter is not None:
        k = int(recenter) - 1
        raw = ans.raw_breaks()
        if not 0 <= k < len(raw):
            raise ValueError(f"recenter index {recenter} outside 1..{len(raw)}")
        ans = ans.with_shift(raw[k])
    return ans


# ------------------------------------------------------------------ module API


def _hr(point) -> tuple:
    if isinstance(point, ChartPoint):
        return point.H, point.r
    return point[0], point[1]


def xi_eval(point, ansatz: Ansatz, dtype=np.float64) -> np.ndarray:
    H, r = _hr(point)
    return ansatz.xi(H, r, dtype)


def dxi_eval(point, ansatz: Ansatz, dtype=np.float64) -> np.ndarray:
    H, r = _hr(point)
    return ansatz.dxi(H, r, dtype)


def moment_map(point, ansatz: Ansatz, dtype=np.float64) -> np.ndarray:
    H, r = _hr(point)
    return ansatz.moment_map(H, r, dtype)


# ------------------------------------------------------------------ grids


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid: uniform in H, log-spaced in r."""

    H_min: float
    H_max: float
    r_min: float
    r_max: float
    n_H: int = 256
    n_r: int = 256

    def __post_init__(self):
        if self.n_H < 2 or self.n_r < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (0 < self.r_min < self.r_max and self.H_min < self.H_max):
            raise ValueError("degenerate grid box")

    @classmethod
    def default(cls, ansatz: Ansatz, n: int = 256) -> "GridSpec":
        b = ansatz.breakpoints()
        lo, hi = float(b.min()), float(b.max())
        span = hi - lo if hi > lo else 1.0
        return cls(lo - 5 * span, hi + 5 * span, 1e-4 * span, 10 * span, n, n)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.linspace(self.H_min, self.H_max, self.n_H),
            np.geomspace(self.r_min, self.r_max, self.n_r),
        )

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        h, r = self.axes()
        return np.meshgrid(h, r, indexing="ij")


def det_decomposition(ansatz: Ansatz, H, r) -> dict[str, np.ndarray]:
    """Split det D xi into the groups that are separately non-negative.

    ``base`` is the determinant without nut and cusp terms, ``nut`` collects
    every term linear in nu, ``cusp_normal`` the cross terms between one
    cusp correction and the base columns (also reported per pair (i, k)),
    and ``cusp_cusp`` the products of two cusp corrections.
    """
    A, H, r, Hi, rho, q, p, logp = ansatz._pieces(H, r, np.float64)
    rr = r[..., None]
    P = 0.5 * ((1 / rho) @ A.diffs)
    Q = A.normals[0] / rr + 0.5 * ((rr / (rho * p)) @ A.diffs)
    out = {"base": P[..., 0] * Q[..., 1] - P[..., 1] * Q[..., 0]}
    nu = A.nu
    nut_term = nu[0] * Q[..., 1] - nu[1] * Q[..., 0]
    cn = np.zeros_like(out["base"])
    cc = np.zeros_like(out["base"])
    pairs = {}
    rows, ks = A.cusp_rows, list(ansatz.cusp_set())
    normals = A.normals
    m = normals.shape[0]
    for a_idx, (row, k) in enumerate(zip(rows, ks)):
        nk = normals[k]
        lam = float(ansatz.constants.lambda_caps[k])
        c = lam / (2 * rho[..., row] ** 3)
        hk = Hi[..., row]
        nut_term = nut_term + c * r * (nu[0] * nk[1] - nu[1] * nk[0])
        # A_j = (r^2 + H_{k-1} H_j) / rho_j with sentinels -H_{k-1} and +H_{k-1}
        Aj = (rr * rr + hk[..., None] * Hi) / rho
        full = np.concatenate([(-hk)[..., None], Aj, hk[..., None]], axis=-1)
        for i in range(m):
            dt = nk[0] * normals[i][1] - nk[1] * normals[i][0]
            if dt == 0:
                continue
            term = c / (2 * r) * dt * (full[..., i + 1] - full[..., i])
            pairs[(i + 1, k + 1)] = term
            cn = cn + term
        for b_idx in range(a_idx + 1, len(ks)):
            k2, row2 = ks[b_idx], rows[b_idx]
            n2 = normals[k2]
            c2 = float(ansatz.constants.lambda_caps[k2]) / (2 * rho[..., row2] ** 3)
            dt = nk[0] * n2[1] - nk[1] * n2[0]
            cc = cc + c * c2 * r * dt * (hk - Hi[..., row2])
    out["nut"] = nut_term
    out["cusp_normal"] = cn
    out["cusp_cusp"] = cc
    out["pairs"] = pairs
    return out


def positivity_scan(
    ansatz: Ansatz, grid: GridSpec | None = None, decomposition: bool = True, raise_on_fail: bool = False
) -> SuiteResult:
    grid = grid or GridSpec.default(ansatz)
    HH, RR = grid.mesh()
    det = ansatz.det_dxi(HH, RR)
    scale = np.abs(det).max()
    bad = ~(det > 0)
    details = {
        "grid": [grid.n_H, grid.n_r],
        "box": [grid.H_min, grid.H_max, grid.r_min, grid.r_max],
        "min_det": float(det.min()),
        "min_r_det": float((RR * det).min()),
    }
    passed = not bad.any()
    if passed and decomposition:
        parts = det_decomposition(ansatz, HH, RR)
        eps = np.finfo(float).eps * 64
        mins = {}
        total = parts["base"] + parts["nut"] + parts["cusp_normal"] + parts["cusp_cusp"]
        details["decomposition_sum_error"] = float(np.max(np.abs(total - det) / (np.abs(det) + np.abs(total))))
        for key in ("base", "nut", "cusp_normal", "cusp_cusp"):
            mins[key] = float((parts[key] / (np.abs(det) + scale * 1e-300)).min())
        pair_min = min((float((v / np.abs(det)).min()) for v in parts["pairs"].values()), default=0.0)
        mins["pairs"] = pair_min
        details["decomposition_min_relative"] = mins
        passed = all(v >= -eps for v in mins.values()) and details["decomposition_sum_error"] < 1e-8
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        node = (float(HH[idx]), float(RR[idx]))
        details["offending_node"] = node
        if raise_on_fail:
            raise PositivityViolation(f"det D xi = {det[idx]:.3e} <= 0 at (H, r) = {node}", node=node)
    return SuiteResult("positivity", bool(passed), max(0.0, -float(det.min())), 0.0, details)


def axisymmetric_laplacian(f, H, r, h) -> np.ndarray:
    """Second-order central-difference f_HH + f_rr + f_r / r (``f`` maps arrays to (..., k))."""
    H = np.asarray(H, dtype=float)
    r = np.asarray(r, dtype=float)
    h = np.broadcast_to(np.asarray(h, dtype=float), H.shape)[..., None]
    f0 = f(H, r)
    hp, hm = f(H + h[..., 0], r), f(H - h[..., 0], r)
    rp, rm = f(H, r + h[..., 0]), f(H, r - h[..., 0])
    return (hp + hm + rp + rm - 4 * f0) / h**2 + (rp - rm) / (2 * h * r[..., None])


def harmonicity_residual(
    ansatz: Ansatz, grid: GridSpec | None = None, rel_step: float = 1e-3, dtype=np.longdouble
) -> float:
    """Max axi-symmetric Laplacian of (xi_1, xi_2) over the grid.

    The step at each node is ``rel_step * min(r, min_i rho_i)`` so that the
    stencil never reaches the singular set; the residual is scaled by the
    square of that local length to make it dimensionless.
    """
    grid = grid or GridSpec.default(ansatz, 32)
    HH, RR = grid.mesh()
    breaks = ansatz.arrays().breaks
    local = np.minimum(RR, np.abs(HH[..., None] + breaks).min(axis=-1) if len(breaks) else RR)
    local = np.maximum(np.minimum(local, RR), 1e-300)
    keep = local > 1e-8 * max(1.0, float(np.abs(breaks).max(initial=0)))
    h = rel_step * local
    HH, RR, h = HH[keep], RR[keep], h[keep]
    res = axisymmetric_laplacian(
        lambda a, b: ansatz.xi(a, b, dtype), HH.astype(dtype), RR.astype(dtype), h.astype(dtype)
    )
    return float(np.max(np.abs(res) * (h[..., None] / rel_step) ** 2))


def closure_residual(ansatz: Ansatz, H, r, rel_step: float = 1e-5) -> float:
    """Max relative gap between finite differences of the momentum map and the
    Jacobian built from xi (i.e. how well x is a primitive of the prescribed forms)."""
    H = np.asarray(H, dtype=float)
    r = np.asarray(r, dtype=float)
    h = rel_step * np.maximum(r, 1e-300)
    ld = np.longdouble
    Hl, rl, hl = H.astype(ld), r.astype(ld), h.astype(ld)
    fd_H = (ansatz.moment_map(Hl + hl, rl, ld) - ansatz.moment_map(Hl - hl, rl, ld)) / (2 * hl[..., None])
    fd_r = (ansatz.moment_map(Hl, rl + hl, ld) - ansatz.moment_map(Hl, rl - hl, ld)) / (2 * hl[..., None])
    fd = np.stack([fd_H, fd_r], axis=-1).astype(float)
    an = ansatz.dx(H, r)
    scale = np.abs(an).max(axis=(-1, -2), keepdims=True)
    return float(np.max(np.abs(fd - an) / scale))


def export_grid_csv(ansatz: Ansatz, grid: GridSpec, path: Union[str, Path]) -> int:
    """Write H, r, xi1, xi2, x1, x2, detDxi for every node (row-major in (H, r))."""
    HH, RR = grid.mesh()
    xi = ansatz.xi(HH, RR)
    x = ansatz.moment_map(HH, RR)
    det = ansatz.det_dxi(HH, RR)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        w = csv.writer(handle)
        w.writerow(["H", "r", "xi1", "xi2", "x1", "x2", "detDxi"])
        for i in range(grid.n_H):
            for j in range(grid.n_r):
                w.writerow(
                    [
                        repr(float(HH[i, j])),
                        repr(float(RR[i, j])),
                        repr(float(xi[i, j, 0])),
                        repr(float(xi[i, j, 1])),
                        repr(float(x[i, j, 0])),
                        repr(float(x[i, j, 1])),
                        repr(float(det[i, j])),
                    ]
                )
    return grid.n_H * grid.n_r


def summarize_scan(ansatz: Ansatz, grid: GridSpec | None = None) -> VerificationReport:
    rep = VerificationReport(metadata={"variant": ansatz.variant})
    rep.add(positivity_scan(ansatz, grid))
    return rep
