import math

import numpy as np
import pytest

from warpgeo.cylinder import (build_cylinder, clifford_base, clifford_cylinder, closed_alpha_beta,
                              solve_omega, umbilic_base, verify_cylinder_einstein)
from warpgeo.ambient import alpha_beta_array
from warpgeo.errors import InvalidPartitionError, MismatchError, NoSolutionError
from warpgeo.oracle import shape_operator
from warpgeo.shape import count_distinct, einstein_residuals


def test_solve_omega_examples():
    sol = solve_omega(0.0, 5, -1.0)
    assert sol.kind == "linear" and sol.A == 1.0
    sol = solve_omega(-4.0, 5, -2 / 3)
    ts = np.linspace(*sol.interval, 11)
    np.testing.assert_allclose(sol.omega(ts), math.sqrt(2 / 3) * np.sinh(ts), rtol=1e-14)
    assert sol.residual(ts).max() < 1e-9
    sol = solve_omega(4.0, 5, -2 / 3)
    assert sol.kind == "sin" and 0 < sol.interval[0] < sol.interval[1] < math.pi
    np.testing.assert_allclose(sol.omega(1.0), math.sqrt(2 / 3) * math.sin(1.0))


@pytest.mark.parametrize("Lam,c", [(-4.0, -2 / 3), (-4.0, 0.5), (-4.0, 0.0), (4.0, -0.5), (0.0, -2.0),
                                   (0.0, 0.0)])
def test_omega_ode(Lam, c):
    sol = solve_omega(Lam, 5, c)
    w = sol.warp(1)
    ts = np.linspace(*sol.interval, 41)[1:-1]
    # omega'' = -Lambda omega / (n - 1)
    np.testing.assert_allclose(w.ddw(ts), -Lam / 4 * w.w(ts), atol=1e-9 * (1 + w.w(ts).max()))
    assert sol.residual(ts).max() < 1e-9 * (1 + w.w(ts).max() ** 2)
    a, b = closed_alpha_beta(sol, 1, ts)
    a2, b2 = alpha_beta_array(w, ts)
    np.testing.assert_allclose(a, a2, atol=1e-9)
    np.testing.assert_allclose(b, b2, atol=1e-9)
    assert sol.describe().startswith(sol.kind)


def test_no_solution():
    with pytest.raises(NoSolutionError):
        solve_omega(4.0, 5, 0.5)
    with pytest.raises(NoSolutionError):
        solve_omega(0.0, 5, 1.0)


def test_clifford_bases():
    b = clifford_base(5, 2)
    assert (b.c1, b.c2) == pytest.approx((2.0, 2.0))
    assert (b.r1, b.r2) == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)))
    assert (b.lambda0, b.mu0) == pytest.approx((1.0, -1.0)) and b.H0 == pytest.approx(0.0, abs=1e-14)
    assert b.c == pytest.approx(-2 / 3, abs=1e-14)
    b = clifford_base(6, 2)
    assert (b.c1, b.c2) == pytest.approx((3.0, 1.5))
    assert (b.lambda0, b.mu0) == pytest.approx((math.sqrt(2), -1 / math.sqrt(2)))
    assert b.H0 == pytest.approx(1 / math.sqrt(2)) and b.c == pytest.approx(-0.75, abs=1e-14)
    assert max(abs(r) for r in b.sigma0_residuals()) < 1e-12
    with pytest.raises(InvalidPartitionError):
        clifford_base(5, 3)


@pytest.mark.parametrize("n,k", [(5, 2), (6, 2)])
def test_clifford_base_shape(oracle_gate, n, k):
    b = clifford_base(n, k)
    ev = shape_operator(b.chart, None, b.chart.interior_grid(2, 0.1))
    want = sorted(v for v, m in b.curvatures for _ in range(m))
    np.testing.assert_allclose(ev, np.tile(want, (len(ev), 1)), atol=1e-4)


def test_cylinder_principal_data():
    cyl = clifford_cylinder(5, 2)
    for t in np.linspace(*cyl.warp.interval, 9)[1:-1]:
        pd = cyl.principal_data(t)
        om = cyl.warp.w(t)
        assert pd.spectrum() == pytest.approx([0, 1 / om, 1 / om, -1 / om, -1 / om])
        assert einstein_residuals(pd, -4.0).max_abs() < 1e-10
        assert count_distinct(pd.spectrum()) == 3


def test_cylinder_shape_against_oracle(oracle_gate):
    cyl = clifford_cylinder(5, 2)
    u = cyl.chart.interior_grid(2, 0.1)
    ev = shape_operator(cyl.chart, cyl.warp, u)
    for k, x in enumerate(u):
        np.testing.assert_allclose(np.sort(cyl.principal_data(x[0]).spectrum()), ev[k], atol=1e-4)


def test_perturbed_lambda_fails(oracle_gate):
    cyl = clifford_cylinder(5, 2, -4.0)
    ver = verify_cylinder_einstein(cyl, -3.9, grid=3)
    assert not ver.einstein.passed
    assert ver.einstein.max_residual == pytest.approx(0.1, abs=1e-3)


def test_flat_fixture(oracle_gate):
    base = umbilic_base(0, "hyperplane", None, 3)
    cyl = build_cylinder(solve_omega(0.0, 3, base.c), base)
    ver = verify_cylinder_einstein(cyl, 0.0, grid=3, spread_threshold=0.0)
    assert ver.einstein.max_residual < 1e-8


def test_umbilic_base_is_trivial(oracle_gate):
    base = umbilic_base(1, "sphere", 1.0, 4)
    cyl = build_cylinder(solve_omega(-3.0, 4, base.c), base)
    ver = verify_cylinder_einstein(cyl, -3.0, grid=3)
    assert ver.einstein.passed and ver.spread.value < 1e-4


def test_mismatch():
    with pytest.raises(MismatchError):
        build_cylinder(solve_omega(-4.0, 5, -0.5), clifford_base(5, 2))
