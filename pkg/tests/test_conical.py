from fractions import Fraction

import numpy as np
import pytest

from toric_sfk import NutParameter
from toric_sfk.ansatz import GridSpec, positivity_scan
from toric_sfk.boundary import cone_angle_identity, guillemin_residual
from toric_sfk.catalog import five_edge, hwang_singer
from toric_sfk.conical import (
    InterpolationFamily,
    conical_construct,
    cusp_coefficients,
    cusp_model,
    degeneration_profile,
    interpolation_model,
    interpolation_potential,
)
from toric_sfk.errors import AngleOutOfRange

POINTS = np.array([[1.0, 0.5], [0.8, 0.9], [2.0, 1.5], [1.3, 3.0]])


@pytest.fixture(scope="module")
def hs_family():
    return InterpolationFamily(hwang_singer())


def test_endpoints_route_to_other_variants():
    poly = hwang_singer(cusp=False)
    assert conical_construct(poly, {1: 1}).variant == "smooth"
    a = conical_construct(poly, {1: 0})
    assert a.variant == "cusp" and a.cusp_set() == (1,)
    assert conical_construct(poly, {1: Fraction(1, 3)}).variant == "conical"


@pytest.mark.parametrize("theta", [-0.1, 1.5])
def test_angle_out_of_range(theta):
    with pytest.raises(AngleOutOfRange):
        conical_construct(hwang_singer(cusp=False), {1: theta})


def test_interpolation_potential_domain(hs_family):
    x = POINTS[:1]
    with pytest.raises(AngleOutOfRange):
        hs_family.potential(x, 0.0)
    with pytest.raises(AngleOutOfRange):
        interpolation_potential(x, {0: 0.5}, hs_family.h, hs_family.h_as, hs_family.polytope, hs_family.coeffs)


@pytest.mark.parametrize("theta", ["1/10", "1/4", "1/2", "3/4", "9/10"])
def test_conical_positivity_and_guillemin(theta):
    a = conical_construct(hwang_singer(cusp=False), {1: Fraction(theta)})
    assert positivity_scan(a, GridSpec.default(a, 64)).passed
    rep = guillemin_residual(a, 1)
    assert rep.passed
    assert rep.details["coefficient"] == pytest.approx(1 / (2 * float(Fraction(theta))), rel=1e-12)
    assert cone_angle_identity(a)[2]["residual"] == 0


def test_cusp_coefficients_hs(hs_family):
    assert hs_family.coeffs == {1: (-0.5, 0.5)}


def test_five_edge_coefficients():
    fam = InterpolationFamily(five_edge())
    assert fam.coeffs == {1: (-0.5, 1.0), 3: (-0.5, 1.5)}


@pytest.mark.parametrize("theta", [0.2, 0.5, 0.8])
def test_model_hessian_matches_values(hs_family, theta):
    poly, coeffs, th = hs_family.polytope, hs_family.coeffs, {1: theta}
    h = 1e-4
    for x in POINTS:
        _, hess = interpolation_model(poly, coeffs, th, x[None, :])
        fd = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
                f = lambda p: interpolation_model(poly, coeffs, th, p[None, :])[0][0]
                fd[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
        np.testing.assert_allclose(hess[0], fd, rtol=1e-5, atol=1e-6)


def test_cusp_model_hessian_matches_values(hs_family):
    poly, coeffs, h = hs_family.polytope, hs_family.coeffs, 1e-4
    f = lambda p: cusp_model(poly, coeffs, p[None, :])[0][0]
    for x in POINTS:
        _, hess = cusp_model(poly, coeffs, x[None, :])
        d11 = (f(x + [h, 0]) - 2 * f(x) + f(x - [h, 0])) / h**2
        d22 = (f(x + [0, h]) - 2 * f(x) + f(x - [0, h])) / h**2
        np.testing.assert_allclose([hess[0, 0, 0], hess[0, 1, 1]], [d11, d22], rtol=1e-5)


def test_theta_one_is_smooth_potential(hs_family):
    np.testing.assert_allclose(hs_family.potential(POINTS, 1.0), hs_family.u_as(POINTS), atol=1e-10)


def test_family_hessian_matches_ansatz(hs_family):
    # theta = 1 reproduces the Hessian of the smooth construction
    hess = hs_family.hessian(POINTS, 1.0)
    ref = hs_family._hess(hs_family.smooth, POINTS, np.float64)
    np.testing.assert_allclose(hess, ref, rtol=1e-9)


def test_degeneration_monotone(hs_family):
    mesh = POINTS
    out = degeneration_profile(hs_family, mesh)
    hi = [out["toward_smooth"][t] for t in (0.9, 0.99, 0.999)]
    lo = [out["toward_cusp"][t] for t in (0.1, 0.01, 0.001)]
    assert hi[0] > hi[1] > hi[2] and hi[2] < 0.05
    assert lo[0] > lo[1] > lo[2] and lo[2] < 1e-3


def test_half_angle_member_not_scalar_flat(hs_family):
    x = POINTS[:1]
    s1 = hs_family.scalar_curvature(x, 0.5, 1e-3)
    s2 = hs_family.scalar_curvature(x, 0.5, 5e-4)
    estimator = abs(4 * s2[0] - 4 * s1[0]) / 3
    assert abs(s2[0]) > 10 * estimator
    assert abs(s2[0]) > 0.1
