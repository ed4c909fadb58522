"""Moment polytope data, validation, normalization and derived constants.

Edges are stored 0-based internally; the JSON layer (``load_polytope``,
``polytope_to_dict``) speaks 1-based indices.  Offsets and cone angles are
kept as :class:`fractions.Fraction` whenever the input is rational so that
the triangular solve for the breakpoints is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DegeneratePolytope, InvalidPolytope, NotDelzant

Number = Union[Fraction, float]

STRICT = "strict"
PARALLEL = "parallel"


def as_number(value) -> Number:
    """Coerce to an exact Fraction when possible, otherwise to float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        # decimal literals such as 0.5 or 1.25 are treated as the rational they spell
        return Fraction(repr(value))
    return float(value)


def det2(u, v):
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class Edge:
    normal: tuple[int, int]
    offset: Number

    def ell(self, x):
        """Affine function ``<x, normal> + offset`` (works on arrays of shape (..., 2))."""
        x = np.asarray(x)
        return x[..., 0] * float(self.normal[0]) + x[..., 1] * float(self.normal[1]) + float(self.offset)

    def ell_exact(self, x) -> Number:
        return x[0] * self.normal[0] + x[1] * self.normal[1] + self.offset

    @property
    def norm2(self) -> int:
        return self.normal[0] ** 2 + self.normal[1] ** 2


@dataclass(frozen=True)
class MomentPolytope:
    """Ordered edges plus the cusp index set and cone angles (0-based indices)."""

    edges: tuple[Edge, ...]
    cusp_set: tuple[int, ...] = ()
    cone_angles: Mapping[int, Number] = field(default_factory=dict)
    mode: str = STRICT

    @property
    def d(self) -> int:
        return len(self.edges)

    @property
    def normals(self) -> np.ndarray:
        return np.array([e.normal for e in self.edges], dtype=float)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([float(e.offset) for e in self.edges])

    def ell(self, x) -> np.ndarray:
        """All edge functions at ``x``; output shape (..., d)."""
        x = np.asarray(x, dtype=float)
        return x @ self.normals.T + self.offsets

    def vertex(self, i: int) -> tuple[Number, Number]:
        """Vertex shared by edges ``i`` and ``i + 1`` (exact when offsets are rational)."""
        (a1, b1), (a2, b2) = self.edges[i].normal, self.edges[i + 1].normal
        l1, l2 = self.edges[i].offset, self.edges[i + 1].offset
        det = a1 * b2 - b1 * a2
        if det == 0:
            raise DegeneratePolytope(f"edges {i + 1} and {i + 2} are parallel")
        x1 = (-l1 * b2 + l2 * b1) / det
        x2 = (-a1 * l2 + a2 * l1) / det
        return (x1, x2)

    def vertices(self) -> list[tuple[Number, Number]]:
        return [self.vertex(i) for i in range(self.d - 1)]

    def edge_direction(self, i: int) -> np.ndarray:
        """Unit tangent of edge ``i`` oriented away from its finite end (for unbounded edges)."""
        a, b = self.edges[i].normal
        v = np.array([b, -a], dtype=float)
        if i == self.d - 1:
            v = -v
        return v / np.hypot(*v)

    def contains(self, x, margin: float = 0.0) -> np.ndarray:
        return np.all(self.ell(x) > margin, axis=-1)

    def with_cusps(self, cusp_set: Iterable[int]) -> "MomentPolytope":
        return replace(self, cusp_set=tuple(sorted(cusp_set)))

    def with_cone_angles(self, angles: Mapping[int, Number]) -> "MomentPolytope":
        return replace(self, cone_angles={int(k): as_number(v) for k, v in angles.items()})


@dataclass(frozen=True)
class NutParameter:
    """The vector (alpha, beta) added as ``alpha*H, beta*H`` to the two harmonic functions."""

    nu: tuple[float, float] = (0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.nu[0] == 0 and self.nu[1] == 0

    def as_array(self) -> np.ndarray:
        return np.array([float(self.nu[0]), float(self.nu[1])])


@dataclass(frozen=True)
class PolytopeConstants:
    """Breakpoints and derived reals; all maps are keyed by 0-based edge index.

    ``a_prime[j]`` and ``a[j]`` sit between edge ``j`` and edge ``j + 1``.
    """

    a_prime: tuple[Number, ...]
    a: tuple[Number, ...]
    lambda_caps: Mapping[int, Number]
    a_theta: tuple[Number, ...]
    lengths: Mapping[int, float]
    exact: bool

    def gap(self, i: int) -> Number:
        return self.a_prime[i] - self.a_prime[i - 1]


@dataclass
class ValidationReport:
    valid: bool
    mode: str
    issues: list[str]

    def __bool__(self) -> bool:
        return self.valid

    def to_dict(self) -> dict:
        return {"valid": self.valid, "mode": self.mode, "issues": list(self.issues)}


@dataclass(frozen=True)
class NormalizationTransform:
    """x' = matrix_x @ x + shift; normals transform by ``matrix``; ``reversed`` relabels edges."""

    matrix: tuple[tuple[int, int], tuple[int, int]]
    reversed: bool
    shift: tuple[Number, Number]

    @property
    def matrix_x(self) -> np.ndarray:
        m = np.array(self.matrix, dtype=float)
        return np.linalg.inv(m).T


def validate(polytope: MomentPolytope, nut: NutParameter | None = None) -> ValidationReport:
    """Check every structural invariant and report failures instead of raising."""
    issues: list[str] = []
    d = polytope.d
    mode = polytope.mode
    if d < 2:
        issues.append(f"need at least 2 edges, got {d}")
        return ValidationReport(False, mode, issues)
    for i, e in enumerate(polytope.edges):
        a, b = e.normal
        if not (isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer))):
            issues.append(f"edge {i + 1}: normal {e.normal} is not an integer vector")
        elif math.gcd(abs(int(a)), abs(int(b))) != 1:
            issues.append(f"edge {i + 1}: normal {e.normal} is not primitive")
    for i in range(d - 1):
        dt = det2(polytope.edges[i].normal, polytope.edges[i + 1].normal)
        if dt != -1:
            issues.append(
                f"det(nu_{i + 1}, nu_{i + 2}) = {dt}, expected -1 (Delzant condition with orientation)"
            )
    n1, nd = polytope.edges[0].normal, polytope.edges[-1].normal
    if mode == STRICT:
        if det2(n1, nd) == 0:
            issues.append("strict mode requires non-parallel unbounded edges (det(nu_1, nu_d) != 0)")
        for i in range(1, d):
            if det2(n1, polytope.edges[i].normal) >= 0:
                issues.append(f"edge {i + 1}: normals turn by more than a half-plane; polytope not strictly unbounded")
                break
    elif mode == PARALLEL:
        if tuple(-c for c in n1) != tuple(nd):
            issues.append("parallel mode requires nu_d = -nu_1")
        for i in range(1, d - 1):
            if det2(n1, polytope.edges[i].normal) >= 0:
                issues.append(f"edge {i + 1}: interior normal not between nu_1 and nu_d")
                break
    else:
        issues.append(f"unknown mode {mode!r}")

    cusps = list(polytope.cusp_set)
    if cusps != sorted(set(cusps)):
        issues.append("cusp indices must be sorted and distinct")
    for k in cusps:
        if not 1 <= k <= d - 2:
            issues.append(f"cusp index {k + 1} is not an interior edge (non-adjacent index rule: 1 < i < d)")
    for k0, k1 in zip(cusps, cusps[1:]):
        if k1 <= k0 + 1:
            issues.append(f"cusp indices {k0 + 1} and {k1 + 1} are adjacent (non-adjacent index rule)")
    for j, theta in polytope.cone_angles.items():
        if not 1 <= j <= d - 2:
            issues.append(f"cone angle on edge {j + 1}: only finite interior edges may be conical")
        if not 0 < theta <= 1:
            issues.append(f"cone angle theta_{j + 1} = {theta} outside (0, 1]")
        if j in cusps:
            issues.append(f"edge {j + 1} is both cuspidal and conical")

    if not any("Delzant" in s or "primitive" in s or "integer" in s for s in issues):
        try:
            compute_a_prime(polytope)
        except DegeneratePolytope as exc:
            issues.append(str(exc))

    if nut is not None:
        issues.extend(nut_issues(polytope, nut))
    return ValidationReport(not issues, mode, issues)


def nut_issues(polytope: MomentPolytope, nut: NutParameter) -> list[str]:
    nu = nut.nu
    issues = []
    n1, nd = polytope.edges[0].normal, polytope.edges[-1].normal
    if polytope.mode == PARALLEL:
        if det2(nu, n1) != 0:
            issues.append(f"nut {tuple(nu)}: parallel mode needs det(nu, nu_1) = 0")
        for k in polytope.cusp_set:
            if det2(nu, polytope.edges[k].normal) < 0:
                issues.append(f"nut {tuple(nu)}: det(nu, nu_{k + 1}) < 0")
    else:
        if det2(nu, n1) < 0 or det2(nu, nd) < 0:
            issues.append(f"nut {tuple(nu)} outside the admissible cone bounded by -nu_1 and nu_d")
    return issues


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), (1 if a >= 0 else -1), 0)
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t


def normalize(polytope: MomentPolytope) -> tuple[MomentPolytope, NormalizationTransform]:
    """Map to the convention nu_1 = (0, 1), det(nu_i, nu_{i+1}) = -1, lambda_1 = 0."""
    d = polytope.d
    normals = [tuple(int(c) for c in e.normal) for e in polytope.edges]
    for n in normals:
        if math.gcd(abs(n[0]), abs(n[1])) != 1:
            raise NotDelzant(f"normal {n} is not primitive")
    dets = [det2(normals[i], normals[i + 1]) for i in range(d - 1)]
    if any(abs(t) != 1 for t in dets) or len(set(dets)) > 1:
        raise NotDelzant(f"consecutive determinants {dets} are not a constant +-1")

    edges = list(polytope.edges)
    cusps = list(polytope.cusp_set)
    angles = dict(polytope.cone_angles)
    reversed_ = bool(dets) and dets[0] == 1
    if reversed_:
        edges = edges[::-1]
        cusps = sorted(d - 1 - k for k in cusps)
        angles = {d - 1 - k: v for k, v in angles.items()}

    p, q = edges[0].normal
    g, s, t = _ext_gcd(int(p), int(q))
    # rows (q, -p) and (s, t) with s*p + t*q = 1 give det = 1 and M nu_1 = (0, 1)
    m = ((int(q), int(-p)), (int(s), int(t)))

    def act(n):
        return (m[0][0] * n[0] + m[0][1] * n[1], m[1][0] * n[0] + m[1][1] * n[1])

    new_edges = [Edge(act(e.normal), e.offset) for e in edges]
    lam1 = new_edges[0].offset
    # translate x2 by lam1 so the first edge becomes the x1-axis
    new_edges = [Edge(e.normal, e.offset - lam1 * e.normal[1]) for e in new_edges]
    out = MomentPolytope(tuple(new_edges), tuple(cusps), angles, polytope.mode)
    return out, NormalizationTransform(m, reversed_, (Fraction(0), lam1))


def transform_nut(nut: NutParameter, transform: NormalizationTransform) -> NutParameter:
    m = transform.matrix
    a, b = nut.nu
    return NutParameter((m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b))


def compute_a_prime(polytope: MomentPolytope) -> tuple[Number, ...]:
    """Forward substitution for sum_{i<=j} a'_i det(nu_{i+1}-nu_i, nu_{j+1}) = lambda_{j+1}."""
    nus = [e.normal for e in polytope.edges]
    lam = [e.offset for e in polytope.edges]
    d = len(nus)
    a: list[Number] = []
    for j in range(d - 1):
        rhs = lam[j + 1]
        for i in range(j):
            diff = (nus[i + 1][0] - nus[i][0], nus[i + 1][1] - nus[i][1])
            rhs = rhs - a[i] * det2(diff, nus[j + 1])
        diff = (nus[j + 1][0] - nus[j][0], nus[j + 1][1] - nus[j][1])
        diag = det2(diff, nus[j + 1])
        if diag != 1:
            raise NotDelzant(f"diagonal entry {diag} at j={j + 1}; polytope not normalized")
        a.append(rhs)
    for j in range(1, len(a)):
        if not a[j] > a[j - 1]:
            raise DegeneratePolytope(
                f"a'_{j + 1} = {a[j]} <= a'_{j} = {a[j - 1]}: edge {j + 1} has non-positive length"
            )
    return tuple(a)


def offsets_from_a_prime(normals: Sequence[tuple[int, int]], a_prime: Sequence[Number]) -> list[Number]:
    """Inverse of :func:`compute_a_prime` (lambda_1 = 0).  Used to build test polytopes."""
    lam: list[Number] = [Fraction(0)]
    for j in range(len(normals) - 1):
        total = Fraction(0) if all(isinstance(v, Fraction) for v in a_prime) else 0.0
        for i in range(j + 1):
            diff = (normals[i + 1][0] - normals[i][0], normals[i + 1][1] - normals[i][1])
            total += a_prime[i] * det2(diff, normals[j + 1])
        lam.append(total)
    return lam


def derive_constants(polytope: MomentPolytope) -> PolytopeConstants:
    ap = compute_a_prime(polytope)
    d = polytope.d
    exact = all(isinstance(v, Fraction) for v in ap) and all(
        isinstance(t, Fraction) for t in polytope.cone_angles.values()
    )
    lambda_caps = {k: ap[k] - ap[k - 1] for k in polytope.cusp_set}
    a = []
    a_theta = []
    for j in range(d - 1):
        shift = sum((ap[k - 1] - ap[k] for k in polytope.cusp_set if k <= j), Fraction(0))
        a.append(ap[j] + shift)
        tshift = sum(
            ((1 - th) * (ap[k - 1] - ap[k]) for k, th in polytope.cone_angles.items() if k <= j),
            Fraction(0),
        )
        a_theta.append(ap[j] + tshift)
    lengths = {
        i: 2 * math.pi * polytope.edges[i].norm2 * float(ap[i] - ap[i - 1]) for i in range(1, d - 1)
    }
    return PolytopeConstants(tuple(ap), tuple(a), lambda_caps, tuple(a_theta), lengths, exact)


def s_class_parameters(polytope: MomentPolytope, constants: PolytopeConstants, k: int) -> dict:
    """alpha = Lambda_k / 2 and both sign conventions of the log-linear coefficient."""
    nk_prev = polytope.edges[k - 1].normal
    nk_next = polytope.edges[k + 1].normal
    dt = det2(nk_next, nk_prev)
    return {
        "alpha": constants.lambda_caps[k] / 2,
        "beta_abs": abs(Fraction(dt, 2)),
        "det_next_prev": dt,
    }


# ---------------------------------------------------------------- JSON layer


def polytope_from_dict(payload: Mapping) -> tuple[MomentPolytope, NutParameter]:
    try:
        edges = tuple(
            Edge((int(e["normal"][0]), int(e["normal"][1])), as_number(e["lambda"]))
            for e in payload["edges"]
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InvalidPolytope(f"malformed edge list: {exc}") from exc
    for e, raw in zip(edges, payload["edges"]):
        if any(float(c) != int(c) for c in raw["normal"]):
            raise InvalidPolytope(f"normal {raw['normal']} is not integral")
    cusps = tuple(int(i) - 1 for i in payload.get("cusp_indices", []))
    angles = {int(k) - 1: as_number(v) for k, v in payload.get("cone_angles", {}).items()}
    mode = payload.get("mode", STRICT)
    nut_raw = payload.get("nut", [0, 0])
    nut = NutParameter((float(nut_raw[0]), float(nut_raw[1])))
    return MomentPolytope(edges, cusps, angles, mode), nut


def load_polytope(path: Union[str, Path]) -> tuple[MomentPolytope, NutParameter]:
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle, parse_float=Fraction)
    if not isinstance(payload, dict):
        raise InvalidPolytope("top-level JSON value must be an object")
    return polytope_from_dict(payload)


def _json_number(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return v


def polytope_to_dict(polytope: MomentPolytope, nut: NutParameter | None = None) -> dict:
    out = {
        "edges": [{"normal": list(e.normal), "lambda": _json_number(e.offset)} for e in polytope.edges],
        "cusp_indices": [k + 1 for k in polytope.cusp_set],
        "cone_angles": {str(k + 1): _json_number(v) for k, v in sorted(polytope.cone_angles.items())},
        "mode": polytope.mode,
    }
    if nut is not None:
        out["nut"] = [float(nut.nu[0]), float(nut.nu[1])]
    return out


def fraction_str(v: Number) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))
