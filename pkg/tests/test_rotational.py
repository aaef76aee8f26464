import math

import numpy as np
import pytest

from warpgeo.ambient import make_warp
from warpgeo.errors import InconsistentSeedError, InvalidConfigurationError, OutOfRangeError
from warpgeo.oracle import chart_metric, shape_operator
from warpgeo.rotational import (RotationalSpec, admitted, csc_verify, integrate_profile,
                                ode_coefficients, principal_data, rotational_chart, seed_point)
from warpgeo.shape import einstein_residuals


def two_t(eps):
    return make_warp("linear", eps, a=2.0, b=0.0)


def test_admitted_rows():
    assert admitted(1, "spherical", 1.0) and admitted(0, "spherical", -1.0)
    assert not admitted(1, "spherical", -1.0)
    assert admitted(-1, "parabolic", 0.0) and not admitted(0, "parabolic", -1.0)
    assert admitted(-1, "hyperbolic", -2.0) and not admitted(-1, "hyperbolic", 1.0)
    with pytest.raises(InvalidConfigurationError):
        RotationalSpec(1, "hyperbolic", -1.0, two_t(1))
    with pytest.raises(InvalidConfigurationError):
        RotationalSpec(0, "spherical", 0.0, two_t(1))


def test_coefficients_example():
    co = ode_coefficients(RotationalSpec(0, "spherical", 0.0, two_t(0)), 1.0, 1.0)
    assert (co.a2, co.a1, co.a0) == pytest.approx((1.25, -0.5, -0.75), abs=1e-15)
    assert co.delta == pytest.approx(4.0, abs=1e-14)


def test_coefficients_flat_limit():
    # chi' -> 0 as the warp steepens
    co = ode_coefficients(RotationalSpec(0, "spherical", 0.0, make_warp("linear", 0, (1e-9, 1.0), a=1e8, b=0.0)), 1.0, 1.0)
    assert co.a0 == pytest.approx(-1.0, abs=1e-12) and co.a1 == pytest.approx(0.0, abs=1e-12)
    assert co.delta == pytest.approx(4 * co.a2)


def test_coefficients_out_of_range():
    with pytest.raises(OutOfRangeError):
        ode_coefficients(RotationalSpec(0, "spherical", 0.0, make_warp("constant", 0)), 1.0, 1.0)


def test_seed_examples():
    spec = RotationalSpec(-1, "spherical", 0.0, two_t(-1))
    s0, y0 = seed_point(spec)
    assert math.sinh(y0) > 1 and ode_coefficients(spec, s0, y0).delta > 0
    spec = RotationalSpec(1, "spherical", 1.0, two_t(1))
    s0, y0 = seed_point(spec)
    assert y0 < s0 and ode_coefficients(spec, s0, y0).delta > 0
    spec = RotationalSpec(-1, "hyperbolic", -1.0, two_t(-1))
    s0, y0 = seed_point(spec)
    co = ode_coefficients(spec, s0, y0)
    assert s0 == 0.0 and co.a0 == pytest.approx(-1.0) and co.delta > 0


def test_inconsistent_seed():
    spec = RotationalSpec(0, "spherical", 0.0, two_t(0))
    with pytest.raises(InconsistentSeedError):
        integrate_profile(spec, seed=(1.0, 1000.0))


def test_integrate_example():
    curve = integrate_profile(RotationalSpec(0, "spherical", 0.0, two_t(0)), step=1e-3, span=0.5)
    assert curve.unit_speed_residual().max() < 1e-8
    assert curve.warp_residual().max() < 1e-8
    assert curve.span == pytest.approx(0.5) and curve.stop_reason == "span"
    assert curve.to_csv().splitlines()[0] == "s,phi,xi,phi_prime,xi_prime"
    assert np.all(curve.discriminant() > 0)


def test_minus_branch_and_backwards():
    spec = RotationalSpec(1, "spherical", 1.0, two_t(1))
    for branch, span in (("minus", 0.3), ("plus", -0.3)):
        curve = integrate_profile(spec, span=span, branch=branch)
        assert max(curve.unit_speed_residual().max(), curve.warp_residual().max()) < 1e-8
        assert csc_verify(curve).passed


def test_step_halving_convergence():
    spec = RotationalSpec(-1, "hyperbolic", -1.0, two_t(-1))
    ref = integrate_profile(spec, step=1.25e-3, span=0.4).phi[-1]
    errs = [abs(integrate_profile(spec, step=h, span=0.4).phi[-1] - ref) for h in (0.04, 0.02, 0.01)]
    assert errs[0] / errs[1] >= 4 and errs[1] / errs[2] >= 4


@pytest.mark.parametrize("eps,typ,c", [(0, "spherical", 0.0), (1, "spherical", 1.0),
                                       (-1, "parabolic", 0.0), (-1, "spherical", -1.0)])
def test_csc_verify(eps, typ, c):
    curve = integrate_profile(RotationalSpec(eps, typ, c, two_t(eps)), span=0.4)
    rep = csc_verify(curve)
    assert rep.passed and rep.samples > 100


def test_rotational_chart_metric(oracle_gate):
    curve = integrate_profile(RotationalSpec(1, "spherical", 1.0, two_t(1)), span=0.4)
    ch = rotational_chart(curve, 3, margin=0.05)
    u = ch.interior_grid(2, 0.1)
    g = chart_metric(ch, curve.spec.w, u)
    st = curve.evaluate(u[:, 0])
    psi = curve.spec.w.w(st[:, 1]) * curve.spec.f(st[:, 0])
    np.testing.assert_allclose(g[:, 0, 0], 1.0, atol=1e-6)
    np.testing.assert_allclose(g[:, 0, 1:], 0.0, atol=1e-6)
    np.testing.assert_allclose(g[:, 1, 1], psi ** 2, atol=1e-6)
    np.testing.assert_allclose(g[:, 2, 2], (psi * np.sin(u[:, 1])) ** 2, atol=1e-6)


@pytest.mark.parametrize("eps,typ,c", [(0, "spherical", 1.0), (1, "spherical", 1.0), (-1, "hyperbolic", -1.0)])
def test_principal_data_against_oracle(oracle_gate, eps, typ, c):
    curve = integrate_profile(RotationalSpec(eps, typ, c, two_t(eps)), span=0.4)
    ch = rotational_chart(curve, 3, margin=0.05)
    u = ch.interior_grid(2, 0.15)
    ev = shape_operator(ch, curve.spec.w, u)
    for k, x in enumerate(u):
        pd = principal_data(curve, x[0], 3)
        np.testing.assert_allclose(np.sort(pd.spectrum()), ev[k], atol=1e-4)


@pytest.mark.parametrize("eps,typ,c", [(0, "spherical", 1.0), (-1, "parabolic", -1.0), (-1, "hyperbolic", -1.0)])
def test_csc_is_einstein(eps, typ, c):
    n = 4
    curve = integrate_profile(RotationalSpec(eps, typ, c, two_t(eps)), span=0.4)
    for s in np.linspace(curve.s[0], curve.s[-1], 7)[1:-1]:
        assert einstein_residuals(principal_data(curve, s, n), (n - 1) * c).max_abs() < 1e-8
