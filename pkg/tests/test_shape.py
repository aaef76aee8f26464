import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warpgeo.ambient import make_warp
from warpgeo.errors import InvalidSpectrumError, NoVerticalSectionError
from warpgeo.oracle import riemann_ricci_sectional
from warpgeo.shape import (PrincipalData, Theorem3Case, classify_theorem3, count_distinct,
                           einstein_residuals, from_vertical_section, gauss_sectional,
                           gauss_sectional_frame, ricci_offdiag, ricci_offdiag_matrix,
                           vertical_section)
from warpgeo.spaceform import tube_seed


def test_distinct_counting():
    assert count_distinct([1.0, 1.0 + 1e-12, 2.0]) == 2
    assert count_distinct([0.0, 1e-15, -1e-15]) == 1
    assert count_distinct([1.0, 1.0 + 1e-6]) == 2


def test_principal_data_validation():
    with pytest.raises(InvalidSpectrumError):
        PrincipalData(3, ((1.0, 2),), 0.0, 1.0)
    with pytest.raises(InvalidSpectrumError):
        PrincipalData(2, ((1.0, 2),), 0.5, 0.5)


def test_einstein_residual_examples():
    sphere = PrincipalData(4, ((1.0, 4),), 0.0, 1.0)
    assert sphere.H == 4.0
    assert einstein_residuals(sphere, 3.0).max_abs() == 0.0
    flat = PrincipalData(4, ((0.0, 4),), 0.0, 1.0)
    assert einstein_residuals(flat, 0.0).max_abs() == 0.0


def test_einstein_residuals_not_einstein():
    pd = PrincipalData(3, ((2.0, 1), (0.5, 2)), 0.6, 0.8, alpha=-1.0, beta=0.5)
    r = einstein_residuals(pd, 1.0)
    assert r.max_abs() > 0.1


def test_ricci_offdiag():
    pd = PrincipalData(5, ((0.0, 5),), 0.0, 1.0, beta=0.0)
    assert ricci_offdiag(pd, 0.3, 0.4) == 0.0
    pd = PrincipalData(5, ((0.0, 5),), 0.0, 1.0, beta=2.0)
    assert ricci_offdiag(pd, 1.0, 0.0) == 0.0
    assert ricci_offdiag(pd, 1 / math.sqrt(2), 1 / math.sqrt(2)) == pytest.approx(-3.0)
    M = ricci_offdiag_matrix(pd, [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0, 0])
    assert M[0, 1] == pytest.approx(-3.0) and M[0, 0] == 0.0 and M[2, 3] == 0.0


def test_vertical_section_example():
    w = make_warp("constant", 0, a=2.0)
    assert from_vertical_section([-0.5], 1.0, 0.0, w, 0.0) == [pytest.approx(0.25)]
    pd = PrincipalData(2, ((0.3, 1), (-0.5, 1)), 1.0, 0.0)
    assert vertical_section(pd, w, 0.0) == [pytest.approx(1.0)]


@given(st.floats(0.05, 0.95), st.floats(-3, 3), st.floats(0.2, 2.0))
def test_vertical_section_roundtrip(tn, lam, t):
    w = make_warp("sinh", -1, (0.1, 3.0))
    theta = math.sqrt(1 - tn * tn)
    pd = PrincipalData(3, ((0.1, 1), (lam, 2)), tn, theta)
    back = from_vertical_section(vertical_section(pd, w, t), tn, theta, w, t)
    assert back[0] == pytest.approx(lam, abs=1e-9 * (1 + abs(lam)))


def test_vertical_section_needs_T():
    with pytest.raises(NoVerticalSectionError):
        vertical_section(PrincipalData(2, ((1.0, 2),), 0.0, 1.0), make_warp("constant", 0), 0.0)


def test_gauss_examples():
    sphere = PrincipalData(4, ((1.0, 4),), 0.0, 1.0)
    assert gauss_sectional(sphere, 1, 2) == 1.0
    cliff = PrincipalData(4, ((1.0, 2), (-1.0, 2)), 0.0, 1.0, alpha=-1.0)
    assert gauss_sectional(cliff, 0, 1) == 2.0
    assert gauss_sectional(cliff, 1, 2) == 0.0
    geo = PrincipalData(3, ((0.0, 3),), 0.0, 1.0, alpha=-1.0)
    assert all(gauss_sectional(geo, i, j) == 1.0 for i, j in itertools.combinations(range(3), 2))


def test_gauss_frame_matches_principal():
    pd = PrincipalData(3, ((2.0, 1), (0.5, 2)), 0.6, 0.8, alpha=-1.0, beta=0.5)
    A = np.diag(pd.spectrum())
    T = np.array([0.6, 0.0, 0.0])
    E = np.eye(3)
    for i, j in itertools.combinations(range(3), 2):
        assert gauss_sectional_frame(A, E[i], E[j], T, pd.alpha, pd.beta) == \
            pytest.approx(gauss_sectional(pd, i, j))


def test_gauss_closure_product_spheres(oracle_gate):
    # S^2(2) x S^2(2) inside S^5: intrinsic sectionals must close up with the Gauss values
    chart, curv = tube_seed(1, 2, math.pi / 4, 5)
    data = riemann_ricci_sectional(chart, None, chart.interior_grid(2, 0.1))
    K = data.coordinate_sectionals()
    pd = PrincipalData(4, tuple(curv), 0.0, 1.0, alpha=-1.0)
    same, mixed = gauss_sectional(pd, 0, 1), gauss_sectional(pd, 0, 2)
    assert (same, mixed) == (pytest.approx(2.0), pytest.approx(0.0, abs=1e-12))
    # coordinate planes split into same-block (0,1), (2,3) and mixed ones
    for p in range(K.shape[0]):
        vals = K[p]
        assert np.all(np.minimum(abs(vals - same), abs(vals - mixed)) < 1e-4)
    np.testing.assert_allclose(data.ricci, 2 * data.metric, atol=1e-4)


def test_trichotomy_examples():
    r = classify_theorem3(3.0, 0.0, 4)
    assert r.case is Theorem3Case.UMBILICAL_TRIVIAL and r.sigma == 3.0
    assert r.lam == pytest.approx(1.0) and r.K == pytest.approx(1.0)
    r = classify_theorem3(0.0, 0.0, 4)
    assert r.case is Theorem3Case.RANK_ONE_TRIVIAL and r.K == 0.0
    r = classify_theorem3(2.0, -1.0, 4)
    assert r.case is Theorem3Case.TWO_CURVATURE_NONTRIVIAL
    assert r.roots == (1.0, -1.0) and r.roots[0] * r.roots[1] == r.sigma


@given(st.floats(-10, 10), st.floats(-3, 3), st.integers(3, 8), st.floats(-2, 2))
def test_trichotomy_roots_property(Lam, alpha, n, H):
    r = classify_theorem3(Lam, alpha, n, H)
    if r.case is Theorem3Case.TWO_CURVATURE_NONTRIVIAL:
        lam, mu = r.roots
        assert lam * mu == pytest.approx(r.sigma, rel=1e-12)
        assert lam + mu == pytest.approx(H, abs=1e-9 * (1 + abs(lam)))
        assert lam > 0 > mu
