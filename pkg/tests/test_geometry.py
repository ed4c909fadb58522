import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_sfk import ChartPoint, NutParameter, build
from toric_sfk.boundary import approach_points
from toric_sfk.catalog import five_edge, hwang_singer, hwang_singer_profile
from toric_sfk.conical import conical_construct
from toric_sfk.errors import OutsidePolytope, PathExitsPolytope, StencilExitsPolytope
from toric_sfk.geometry import (
    export_metric_jsonl,
    hess_from_chart,
    hessian_u,
    interior_mesh,
    inverse_hess_from_chart,
    invert_many,
    invert_moment,
    inverter_for,
    killing_norm,
    metric_sample,
    momentum_profile,
    potential,
    potential_chart_path,
    r_consistency,
    scalar_curvature,
    scalar_curvature_many,
)


@settings(max_examples=60, deadline=None)
@given(st.floats(-8, 8), st.floats(-6, 2))
def test_inversion_round_trip(H, logr):
    a = build(five_edge(), NutParameter((1, -3)))
    r = 10.0**logr
    x = a.moment_map(H, r)
    pt = invert_moment(x, a)
    np.testing.assert_allclose(a.moment_map(pt.H, pt.r), x, atol=1e-11 * (1 + np.abs(x).max()))
    # near r = 0 the map sees r only through r^2, so (H, r) is recovered
    # accurately only where it is well conditioned
    if logr >= -3:
        assert pt.H == pytest.approx(H, abs=1e-7 * max(1, abs(H)))
        assert pt.r == pytest.approx(r, rel=1e-6)


def test_inversion_near_every_edge_small_cone_angle():
    a = conical_construct(hwang_singer(cusp=False), {1: Fraction(1, 10)}, NutParameter((1, -2)))
    for j in range(3):
        for frac in (0.25, 0.5, 0.75):
            pts = approach_points(a, j, frac)
            H, r = inverter_for(a).solve(pts)
            np.testing.assert_allclose(a.moment_map(H, r), pts, atol=1e-11)


def test_inversion_rejects_exterior(hs_cusp):
    with pytest.raises(OutsidePolytope):
        invert_moment([0.2, 0.2], hs_cusp)


def test_inverse_hessian_is_inverse(hs_cusp):
    x = interior_mesh(hs_cusp, 12)
    H, r = invert_many(x, hs_cusp)
    prod = hess_from_chart(hs_cusp, H, r) @ inverse_hess_from_chart(hs_cusp, H, r)
    np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-10)


@pytest.mark.parametrize("x", [[1.0, 0.5], [2.5, 0.3], [0.4, 3.0]])
def test_hessian_is_jacobian_of_xi(hs_cusp, x):
    # Hess u = d xi / d x, by central differences through the inverse map
    x = np.array(x)
    h = 1e-6
    cols = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        p = invert_moment(x + e, hs_cusp)
        m = invert_moment(x - e, hs_cusp)
        cols.append((hs_cusp.xi(p.H, p.r) - hs_cusp.xi(m.H, m.r)) / (2 * h))
    fd = np.stack(cols, -1)
    np.testing.assert_allclose(hessian_u(x, hs_cusp), fd, rtol=1e-6)


def test_hessian_symmetric_and_r_consistent(five):
    x = interior_mesh(five, 20)
    H, r = invert_many(x, five)
    hess = hess_from_chart(five, H, r)
    np.testing.assert_allclose(hess[:, 0, 1], hess[:, 1, 0], rtol=1e-10)
    assert r_consistency(five, x).max() < 1e-8


def test_potential_path_independent(hs_cusp):
    base = np.array([1.2, 1.2])
    target = np.array([0.6, 2.5])
    straight = potential(target, hs_cusp, base).u
    bent = potential(target, hs_cusp, base, waypoints=[[3.0, 3.0]]).u
    assert straight == pytest.approx(bent, abs=1e-10)


def test_potential_against_chart_integral(hs_cusp):
    base, target = np.array([1.2, 1.2]), np.array([0.6, 2.5])
    p0, p1 = invert_moment(base, hs_cusp), invert_moment(target, hs_cusp)
    ref = potential_chart_path(hs_cusp, ChartPoint(p0.H, p0.r), ChartPoint(p1.H, p1.r))
    assert potential(target, hs_cusp, base).u == pytest.approx(ref, abs=1e-10)


def test_potential_gradient_is_xi(hs_smooth):
    base = np.array([1.0, 1.0])
    x = np.array([0.7, 1.9])
    h = 1e-5
    grad = [
        (potential(x + h * e, hs_smooth, base).u - potential(x - h * e, hs_smooth, base).u) / (2 * h)
        for e in np.eye(2)
    ]
    np.testing.assert_allclose(grad, potential(x, hs_smooth, base).grad_u, rtol=1e-6)


def test_potential_path_must_stay_inside(hs_cusp):
    with pytest.raises(PathExitsPolytope):
        potential([2.0, 0.5], hs_cusp, [1.0, 1.0], waypoints=[[0.3, 0.3]])


def test_flat_c2_has_zero_curvature(c2):
    x = interior_mesh(c2, 10)
    assert np.abs(scalar_curvature_many(x, c2, 1e-3)).max() < 1e-8


@pytest.mark.parametrize("fixture", ["hs_cusp", "hs_smooth", "hs_conical", "five"])
def test_curvature_second_order(fixture, request):
    a = request.getfixturevalue(fixture)
    x = interior_mesh(a, 12)
    s1 = np.abs(scalar_curvature_many(x, a, 1e-3)).max()
    s2 = np.abs(scalar_curvature_many(x, a, 5e-4)).max()
    assert s1 / s2 >= 3.5


def test_stencil_must_fit(hs_cusp):
    with pytest.raises(StencilExitsPolytope):
        scalar_curvature([1.0, 0.001], hs_cusp, 1e-3)


def test_interior_mesh_respects_margin(five):
    x = interior_mesh(five, 30, margin=0.2)
    assert five.polytope.ell(x).min() >= 0.2


def test_profile_closed_form(hs_recentered):
    taus = [0.01, 0.1, 1, 2, 4, 10, 100]
    for t, v in momentum_profile(hs_recentered, taus):
        assert v == pytest.approx(hwang_singer_profile(t), rel=1e-9)


@pytest.mark.parametrize("k", [1, 3])
def test_profile_matches_killing_norm(k):
    # independent route: Newton inversion plus the inverse Hessian
    a = build(five_edge(), NutParameter())
    H0 = -a.arrays().breaks[k - 1]
    nk = np.array(a.polytope.edges[k].normal, dtype=float)
    for r in (0.2, 1.0, 4.0):
        x = a.moment_map(np.array([H0]), np.array([r]))
        tau = 2 * a.polytope.ell(x)[0, k]
        (_, v), = momentum_profile(a, [tau], k)
        assert v == pytest.approx(2 * killing_norm(a, x, nk)[0], rel=1e-9)


def test_metric_export(hs_cusp, tmp_path):
    x = interior_mesh(hs_cusp, 8)
    n = export_metric_jsonl(hs_cusp, x, tmp_path / "m.jsonl", h=1e-3)
    lines = (tmp_path / "m.jsonl").read_text().splitlines()
    assert n == len(x) == len(lines)
    rec = json.loads(lines[0])
    assert {"x", "H", "r", "u11", "u12", "u22", "s", "r_consistency"} <= set(rec)


def test_metric_sample(hs_cusp):
    s = metric_sample([1.0, 1.0], hs_cusp, 1e-3)
    assert s.r_consistency < 1e-10
    assert abs(s.scalar_residual) < 1e-4
