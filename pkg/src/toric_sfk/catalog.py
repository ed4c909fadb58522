"""Reference polytopes used by the examples, scripts and tests."""

from __future__ import annotations

from fractions import Fraction

from .polytope import PARALLEL, Edge, MomentPolytope, offsets_from_a_prime


def complex_plane() -> MomentPolytope:
    """The quadrant {x1 >= 0, x2 >= 0}: flat C^2."""
    return MomentPolytope((Edge((0, 1), Fraction(0)), Edge((1, 0), Fraction(0))))


def hwang_singer(cusp: bool = True, cone_angle=None) -> MomentPolytope:
    """Quadrant with the corner cut by x1 + x2 = 1 (total space of O(-1)).

    With ``cusp`` the middle edge is cuspidal; ``cone_angle`` makes it conical instead.
    """
    edges = (Edge((0, 1), Fraction(0)), Edge((1, 1), Fraction(-1)), Edge((1, 0), Fraction(0)))
    if cone_angle is not None:
        return MomentPolytope(edges, (), {1: Fraction(cone_angle)})
    return MomentPolytope(edges, (1,) if cusp else ())


FIVE_EDGE_NORMALS = ((0, 1), (1, 1), (2, 1), (1, 0), (1, -1))


def five_edge(cusps: bool = True) -> MomentPolytope:
    """Five edges, cusps on edges 2 and 4 (1-based) when ``cusps``."""
    offsets = offsets_from_a_prime(FIVE_EDGE_NORMALS, [Fraction(k) for k in range(4)])
    edges = tuple(Edge(n, o) for n, o in zip(FIVE_EDGE_NORMALS, offsets))
    return MomentPolytope(edges, (1, 3) if cusps else ())


def strip(cusp: bool = False) -> MomentPolytope:
    """Half-strip {0 <= x2 <= 1, x1 >= 0}: two parallel unbounded edges."""
    edges = (Edge((0, 1), Fraction(0)), Edge((1, 0), Fraction(0)), Edge((0, -1), Fraction(1)))
    return MomentPolytope(edges, (1,) if cusp else (), {}, PARALLEL)


def hwang_singer_profile(tau):
    return 2 * tau**2 / (2 + tau)


def is_hwang_singer(polytope: MomentPolytope) -> bool:
    ref = hwang_singer()
    return (
        tuple(e.normal for e in polytope.edges) == tuple(e.normal for e in ref.edges)
        and tuple(e.offset for e in polytope.edges) == tuple(e.offset for e in ref.edges)
        and polytope.cusp_set == (1,)
    )


# name -> (polytope factory, admissible nut parameters: zero, interior, boundary)
BATTERY = {
    "c2": (complex_plane, ((0, 0), (1, -2), (0, -1))),
    "hs": (hwang_singer, ((0, 0), (1, -2), (1, 0))),
    "five": (five_edge, ((0, 0), (1, -3), (0, -1))),
    "strip": (strip, ((0, 0), (0, -1))),
}
