import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpgeo.ambient import make_warp
from warpgeo.errors import (DegenerateSpectrumError, FocalSingularityError,
                            InvalidConfigurationError, NotIdealError)
from warpgeo.oracle import shape_operator
from warpgeo.parallelgraph import (GraphSpec, ParallelFamily, cartan_residual, focal_range,
                                   graph_frame, graph_principal, graph_principal_data,
                                   ideal_einstein_check, log_form_residual, parallel_curvature,
                                   parallel_curvature_array, riccati_residual)
from warpgeo.spaceform import cs, tube_seed, umbilic_seed


def test_parallel_curvature_examples():
    for eps in (-1, 0, 1):
        assert parallel_curvature(0.7, eps, 0.0) == 0.7
    assert parallel_curvature(1.0, 1, math.pi / 8) == pytest.approx(2.414213562373095, abs=1e-14)
    # the sign follows the chart orientation, see test_member_shape_operator
    assert parallel_curvature(0.0, -1, 1.0) == pytest.approx(-math.tanh(1.0), abs=1e-15)


def test_parallel_curvature_array_matches_scalar():
    ss = np.linspace(-0.5, 0.5, 7)
    vals = parallel_curvature_array(0.4, -1, ss)
    np.testing.assert_allclose(vals, [parallel_curvature(0.4, -1, s) for s in ss], rtol=1e-14)


def test_focal_singularity():
    with pytest.raises(FocalSingularityError):
        parallel_curvature(1.0, 1, math.pi / 4)
    chart, lam = umbilic_seed(1, "sphere", math.pi / 4, 3)
    with pytest.raises(FocalSingularityError):
        ParallelFamily.from_seed(chart, [(lam, 2)], 1, (-0.1, 1.0))


@settings(max_examples=60)
@given(st.sampled_from([-1, 0, 1]), st.floats(-3, 3), st.floats(0.05, 0.95))
def test_riccati_and_log_form(eps, lam0, frac):
    lo, hi = focal_range([lam0], eps)
    s = lo + frac * (hi - lo)
    lam = parallel_curvature(lam0, eps, s)
    scale = 1 + lam * lam + abs(lam) ** 3
    assert riccati_residual(lam0, eps, s) < 1e-6 * scale
    assert log_form_residual(lam0, eps, s) < 1e-6 * scale


@given(st.sampled_from([-1, 0, 1]), st.floats(-3, 3))
def test_focal_range_is_regular(eps, lam0):
    lo, hi = focal_range([lam0], eps)
    assert lo < 0 < hi
    for s in np.linspace(lo, hi, 50):
        c, sn = cs(eps, s)
        assert c - sn * lam0 > 0


def test_cartan_examples():
    r = cartan_residual([(1.0, 2), (-1.0, 2)], 1)
    assert all(abs(x) < 1e-15 for x in r.residuals) and r.product == 0.0
    assert len(cartan_residual([(0.5, 3)], 1).residuals) == 0
    assert cartan_residual([(2.0, 1), (-0.5, 2)], 1).product == 0.0
    with pytest.raises(DegenerateSpectrumError):
        cartan_residual([(1.0, 1), (1.0, 1)], 1)


@pytest.mark.parametrize("eps,kind,param", [(1, "sphere", 0.8), (-1, "sphere", 1.0), (0, "sphere", 2.0),
                                            (-1, "horosphere", None)])
def test_member_shape_operator(oracle_gate, eps, kind, param):
    chart, lam = umbilic_seed(eps, kind, param, 3)
    fam = ParallelFamily.from_seed(chart, [(lam, 2)], eps)
    for s in fam.samples(5, margin=0.2 * np.ptp(fam.s_range)):
        member = fam.member_chart(s)
        ev = shape_operator(member, None, member.interior_grid(2, 0.1))
        np.testing.assert_allclose(ev, parallel_curvature(lam, eps, s), atol=1e-4,
                                   err_msg=f"s={s}")


def test_clifford_family_member(oracle_gate):
    chart, curv = tube_seed(1, 1, 0.6, 3)
    fam = ParallelFamily.from_seed(chart, curv, 1)
    s = 0.3
    member = fam.member_chart(s)
    ev = shape_operator(member, None, member.interior_grid(2, 0.1))
    want = sorted(v for v, _ in fam.curvatures_at(s))
    np.testing.assert_allclose(ev, np.tile(want, (len(ev), 1)), atol=1e-4)


def _sphere_family(eps=1, s_range=(-0.5, 0.7)):
    chart, lam = umbilic_seed(eps, "sphere", 1.0, 3)
    return ParallelFamily.from_seed(chart, [(lam, 2)], eps, s_range)


def test_graph_frame_examples():
    w = make_warp("exp", 1, (-3, 3))
    g = GraphSpec(_sphere_family(), lambda s: s, w, lambda s: np.ones_like(s))
    fr = graph_frame(g, 0.0)  # phi' = omega(0) = 1
    assert fr.theta == pytest.approx(1 / math.sqrt(2)) and fr.rho == pytest.approx(1 / math.sqrt(2))
    g = GraphSpec(_sphere_family(), lambda s: 1e-9 * s, w, lambda s: 1e-9 + 0 * s)
    fr = graph_frame(g, 0.1)
    assert fr.theta == pytest.approx(1.0) and fr.rho == pytest.approx(0.0, abs=1e-8)


def test_graph_validation():
    w = make_warp("exp", 1, (-3, 3))
    with pytest.raises(InvalidConfigurationError):
        GraphSpec(_sphere_family(), lambda s: -s, w)
    with pytest.raises(InvalidConfigurationError):
        GraphSpec(_sphere_family(), lambda s: 10 * s, w)
    with pytest.raises(InvalidConfigurationError):
        GraphSpec(_sphere_family(), lambda s: s, make_warp("exp", 0, (-3, 3)))


def test_constant_angle_lambda1():
    # phi' / omega(phi) constant keeps theta fixed; then lambda1 = -theta omega'/omega
    q = 0.8
    w = make_warp("exp", 1, (-3, 3))
    phi = lambda s: -np.log(1.0 - q * s)
    g = GraphSpec(_sphere_family(), phi, w, lambda s: q / (1.0 - q * s))
    for s in np.linspace(-0.4, 0.6, 11):
        gp = graph_principal(g, s)
        t = phi(s)
        assert gp.frame.theta == pytest.approx(1 / math.sqrt(1 + q * q), abs=1e-14)
        assert abs(gp.lambda1 + gp.frame.theta * w.dw(t) / w.w(t)) < 1e-8


def test_ideal_check_rejects_flat_warp():
    g = GraphSpec(_sphere_family(0, (-0.5, 0.5)), lambda s: s, make_warp("constant", 0, (-1, 1)))
    with pytest.raises(NotIdealError):
        ideal_einstein_check(g, 0.0)


def test_ideal_check_counts_non_einstein_graph():
    g = GraphSpec(_sphere_family(), lambda s: 0.3 * s, make_warp("exp", 1, (-3, 3)))
    chk = ideal_einstein_check(g, 3.0)
    assert not chk.report.passed
    assert chk.uniform_count == 2 and chk.trivial_expected
    pd = graph_principal_data(g, 0.1)
    assert pd.n == 3 and pd.lambdas[0][1] == 1
