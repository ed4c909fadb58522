import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toric_sfk import NutParameter, build
from toric_sfk.asymptotics import (
    ALE,
    EXCEPTIONAL_TN,
    GENERALIZED_TN,
    PRODUCT,
    centered,
    classify,
    decay_fit,
    gauge_residual_vector,
)
from toric_sfk.catalog import BATTERY, complex_plane, five_edge, hwang_singer, strip
from toric_sfk.errors import FitFailure, InadmissibleNut
from toric_sfk.polytope import det2


def test_classification():
    assert classify(hwang_singer(), (0, 0)).kind == ALE
    assert classify(hwang_singer(), (1, -2)).kind == GENERALIZED_TN
    assert classify(hwang_singer(), (1, 0)).kind == EXCEPTIONAL_TN
    assert classify(strip(), (0, -1)).kind == PRODUCT


@pytest.mark.parametrize("nu", [(-1, 1), (2, 1), (0, 1)])
def test_inadmissible_nut(nu):
    with pytest.raises(InadmissibleNut):
        classify(hwang_singer(), nu)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.0, 1.0))
def test_kind_is_scale_invariant(scale, mix):
    # HS admissible cone: alpha >= 0, beta <= 0
    nu = (scale * mix, -scale * (1 - mix))
    base = (mix, -(1 - mix))
    if max(abs(v) for v in base) < 1e-12:
        return
    assert classify(hwang_singer(), nu).kind == classify(hwang_singer(), base).kind


def test_ale_leading_term_is_group_order():
    m = classify(complex_plane(), (0, 0))
    rho = np.array([10.0, 100.0])
    # C^2: r det D xi -> 1/(2 rho)
    np.testing.assert_allclose(m.leading(rho, 0 * rho) * 2 * rho, 1.0)


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_battery_decay(name):
    factory, nuts = BATTERY[name]
    for nu in nuts:
        a = build(factory(), NutParameter(nu))
        rep = decay_fit(a)
        assert rep.passed, (name, nu, rep.rays)
        assert len(rep.rays) >= 5
        for ray in rep.rays:
            assert ray["exact"] or ray["slope"] < -1.9


def test_cusp_terms_do_not_change_leading_order():
    smooth = build(hwang_singer(cusp=False), NutParameter((1, -2)))
    cusp = build(hwang_singer(), NutParameter((1, -2)))
    assert classify(smooth.polytope, smooth.nut).kind == classify(cusp.polytope, cusp.nut).kind
    H = np.array([1e3, 1e4])
    r = np.array([1e3, 1e4])
    a = smooth.det_dxi(H, r) * r
    b = cusp.det_dxi(H, r) * r
    np.testing.assert_allclose(a, b, rtol=1e-2)


def test_centering_kills_subleading_term():
    a = build(five_edge(), NutParameter((1, -3)))
    c, ok = centered(a)
    assert ok
    assert abs(det2(c.nut.nu, gauge_residual_vector(c))) < 1e-9
    # without centering the next term is r^2 / rho^3, i.e. slope -1 on H = 0
    raw = decay_fit(a, recenter=False, rays=[math.pi / 2])
    assert raw.rays[0]["slope"] > -1.5


def test_fit_failure_raises():
    a = build(five_edge(), NutParameter((1, -3)))
    with pytest.raises(FitFailure):
        decay_fit(a, recenter=False, rays=[math.pi / 2], raise_on_fail=True)
