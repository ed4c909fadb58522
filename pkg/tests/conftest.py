import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from toric_sfk import NutParameter, build
from toric_sfk.catalog import complex_plane, five_edge, hwang_singer, strip
from toric_sfk.polytope import Edge, MomentPolytope, offsets_from_a_prime

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def hs_cusp():
    return build(hwang_singer(), NutParameter())


@pytest.fixture(scope="session")
def hs_recentered():
    return build(hwang_singer(), NutParameter(), recenter=1)


@pytest.fixture(scope="session")
def hs_smooth():
    return build(hwang_singer(cusp=False), NutParameter())


@pytest.fixture(scope="session")
def hs_conical():
    return build(hwang_singer(cone_angle=Fraction(1, 2)), NutParameter(), variant="conical")


@pytest.fixture(scope="session")
def c2():
    return build(complex_plane(), NutParameter())


@pytest.fixture(scope="session")
def five():
    return build(five_edge(), NutParameter((1, -3)))


@pytest.fixture(scope="session")
def strip_ansatz():
    return build(strip(), NutParameter((0, -1)))


@st.composite
def delzant_chains(draw, min_edges=2, max_edges=5):
    """Normalized strictly unbounded Delzant polytopes with random rational a'."""
    d = draw(st.integers(min_edges, max_edges))
    normals = [(0, 1), (1, draw(st.integers(-2, 2)))]
    while len(normals) < d:
        b = draw(st.integers(-1, 3))
        p, q = normals[-1], normals[-2]
        nxt = (b * p[0] - q[0], b * p[1] - q[1])
        if nxt[0] <= 0:
            break
        normals.append(nxt)
    steps = draw(st.lists(st.fractions(Fraction(1, 4), Fraction(3)), min_size=len(normals) - 2, max_size=len(normals) - 2))
    start = draw(st.fractions(Fraction(-3), Fraction(3)))
    ap = [start]
    for s in steps:
        ap.append(ap[-1] + s)
    offsets = offsets_from_a_prime(normals, ap)
    return MomentPolytope(tuple(Edge(n, o) for n, o in zip(normals, offsets))), ap


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
