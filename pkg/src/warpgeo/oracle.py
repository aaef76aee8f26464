"""Finite-difference curvature of coordinate charts.

Nothing here uses the closed-form geometry of the other modules: metrics
are pulled back numerically through the chart, Christoffel symbols and the
Riemann tensor come from central differences of that metric, and shape
operators from second differences of the immersion. Everything is
vectorized over a leading axis of sample points.

Riemann tensor convention: ``R[i, k, l, m]`` with sectional curvature
``K(X, Y) = R(X, Y, X, Y) / |X ^ Y|^2`` and ``Ric[k, m] = g^{il} R[i, k, l, m]``
(positive on round spheres).
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chart import ChartImmersion
from .errors import DegenerateChartError, UnstableDifferencingError
from .spaceform import model_dot, project_tangent

H_CURVATURE = 1e-3
CHUNK = 256


def thread_count() -> int:
    raw = os.environ.get("WARPGEO_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def _map_chunks(fn, U, chunk=CHUNK):
    """Apply fn to row-chunks of U, concurrently, preserving order."""
    U = np.atleast_2d(np.asarray(U, float))
    pieces = [U[i:i + chunk] for i in range(0, len(U), chunk)]
    workers = thread_count()
    if workers == 1 or len(pieces) == 1:
        results = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(fn, pieces))
    if isinstance(results[0], tuple):
        return tuple(np.concatenate(parts, axis=0) for parts in zip(*results))
    return np.concatenate(results, axis=0)


# -- pullback metric ---------------------------------------------------------

def _ambient_dot(chart: ChartImmersion, w, P, A, B):
    if chart.target == "warped":
        om = w.w(P[..., 0])
        return A[..., 0] * B[..., 0] + om * om * model_dot(chart.eps, A[..., 1:], B[..., 1:])
    return model_dot(chart.eps, A, B)


def _jacobian(chart: ChartImmersion, U, h):
    """4th-order central differences of the embedding: (P, d, D)."""
    d = chart.dim
    cols = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        f = chart.embed
        cols.append((-f(U + 2 * e) + 8 * f(U + e) - 8 * f(U - e) + f(U - 2 * e)) / (12 * h))
    return np.stack(cols, axis=-2)


def chart_jacobian(chart: ChartImmersion, u, h: float = H_CURVATURE) -> np.ndarray:
    """Differentiated embedding at points u: rows are coordinate tangents."""
    return _jacobian(chart, np.atleast_2d(np.asarray(u, float)), h)


def _metric_raw(chart: ChartImmersion, w, U, h):
    if chart.target == "abstract":
        return np.asarray(chart.metric_field(U), float)
    P = chart.embed(U)
    J = _jacobian(chart, U, h)
    return _ambient_dot(chart, w, P[..., None, None, :], J[..., :, None, :], J[..., None, :, :])


def chart_metric(chart: ChartImmersion, w=None, u=None, h: float = H_CURVATURE):
    """Pullback metric g_ij at u (a point or an array of points)."""
    U = np.asarray(chart.center() if u is None else u, float)
    single = U.ndim == 1
    G = _map_chunks(lambda X: _metric_raw(chart, w, X, h), U)
    _check_pd(G)
    return G[0] if single else G


def _check_pd(G):
    ev = np.linalg.eigvalsh(0.5 * (G + np.swapaxes(G, -1, -2)))
    scale = np.maximum(1.0, np.abs(ev).max(axis=-1))
    if not np.all(np.isfinite(ev)) or np.any(ev[..., 0] <= 1e-12 * scale):
        raise DegenerateChartError("pullback metric is not positive definite")


# -- curvature ---------------------------------------------------------------

def _stencil(d, h):
    """Offsets for g, dg and ddg: centre, +-h e_i, and (+-h, +-h) on pairs."""
    offs = [np.zeros(d)]
    for i in range(d):
        for s in (1, -1):
            e = np.zeros(d)
            e[i] = s * h
            offs.append(e)
    pairs = list(itertools.combinations(range(d), 2))
    for i, j in pairs:
        for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            e = np.zeros(d)
            e[i], e[j] = si * h, sj * h
            offs.append(e)
    return np.array(offs), pairs


def _metric_derivs(chart, w, U, h):
    d = chart.dim
    offs, pairs = _stencil(d, h)
    X = U[:, None, :] + offs[None, :, :]
    G = _metric_raw(chart, w, X.reshape(-1, d), h).reshape(len(U), len(offs), d, d)
    g0 = G[:, 0]
    dg = np.empty((len(U), d, d, d))
    ddg = np.empty((len(U), d, d, d, d))
    for i in range(d):
        gp, gm = G[:, 1 + 2 * i], G[:, 2 + 2 * i]
        dg[:, i] = (gp - gm) / (2 * h)
        ddg[:, i, i] = (gp - 2 * g0 + gm) / (h * h)
    base = 1 + 2 * d
    for q, (i, j) in enumerate(pairs):
        pp, pm, mp, mm = (G[:, base + 4 * q + r] for r in range(4))
        mixed = (pp - pm - mp + mm) / (4 * h * h)
        ddg[:, i, j] = mixed
        ddg[:, j, i] = mixed
    return g0, dg, ddg


def _riemann_block(chart, w, U, h):
    g, dg, ddg = _metric_derivs(chart, w, U, h)
    ginv = np.linalg.inv(g)
    # first kind: G1[p, k, l] = (d_k g_pl + d_l g_pk - d_p g_kl) / 2
    G1 = 0.5 * (np.einsum("nkpl->npkl", dg) + np.einsum("nlpk->npkl", dg) - dg)
    G2 = np.einsum("npq,nqkl->npkl", ginv, G1)
    R = 0.5 * (
        np.einsum("nklim->niklm", ddg)
        + np.einsum("nimkl->niklm", ddg)
        - np.einsum("nkmil->niklm", ddg)
        - np.einsum("nilkm->niklm", ddg)
    )
    R += np.einsum("npkl,npim->niklm", G1, G2) - np.einsum("npkm,npil->niklm", G1, G2)
    Ric = np.einsum("nil,niklm->nkm", ginv, R)
    return g, R, Ric


@dataclass(frozen=True)
class CurvatureData:
    """Riemann, Ricci and metric at a batch of chart points."""

    points: np.ndarray
    metric: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray

    def sectional(self, X, Y):
        """K(X, Y) per point; X, Y of shape (P, d) or (d,) in chart coordinates."""
        X = np.broadcast_to(np.asarray(X, float), self.points.shape)
        Y = np.broadcast_to(np.asarray(Y, float), self.points.shape)
        g = self.metric
        num = np.einsum("niklm,ni,nk,nl,nm->n", self.riemann, X, Y, X, Y)
        gxx = np.einsum("nij,ni,nj->n", g, X, X)
        gyy = np.einsum("nij,ni,nj->n", g, Y, Y)
        gxy = np.einsum("nij,ni,nj->n", g, X, Y)
        den = gxx * gyy - gxy * gxy
        if np.any(den <= 1e-14 * gxx * gyy):
            raise DegenerateChartError("sectional plane is degenerate")
        return num / den

    def coordinate_sectionals(self):
        """K on every coordinate plane: (P, d(d-1)/2)."""
        d = self.points.shape[1]
        eye = np.eye(d)
        return np.stack([self.sectional(eye[i], eye[j])
                         for i, j in itertools.combinations(range(d), 2)], axis=-1)

    def random_sectionals(self, rng, count=16):
        d = self.points.shape[1]
        out = []
        for _ in range(count):
            X = rng.standard_normal((len(self.points), d))
            Y = rng.standard_normal((len(self.points), d))
            out.append(self.sectional(X, Y))
        return np.stack(out, axis=-1)


def riemann_ricci_sectional(chart: ChartImmersion, w=None, u=None, h: float = H_CURVATURE,
                            check: bool = True, tol: float = 1e-5) -> CurvatureData:
    """Finite-difference Riemann and Ricci tensors at the given points.

    With ``check`` the first point is recomputed at h/2; a disagreement of
    the Ricci tensor beyond 10 * tol raises UnstableDifferencingError.
    """
    U = np.atleast_2d(np.asarray(chart.center() if u is None else u, float))
    g, R, Ric = _map_chunks(lambda X: _riemann_block(chart, w, X, h), U, chunk=64)
    _check_pd(g)
    if check:
        _, _, Ric2 = _riemann_block(chart, w, U[:1], h / 2)
        scale = 1.0 + np.abs(Ric[:1]).max()
        if np.abs(Ric2 - Ric[:1]).max() > 10 * tol * scale:
            raise UnstableDifferencingError(
                f"Ricci changes by {np.abs(Ric2 - Ric[:1]).max():.3e} under step halving")
    return CurvatureData(U, g, R, Ric)


# -- reports -----------------------------------------------------------------

def fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class CurvatureReport:
    quantity: str
    max_residual: float
    mean_residual: float
    samples: int
    tolerance: float
    value: float | None = None
    residuals: tuple = field(default=(), repr=False)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_text(self) -> str:
        return (f"{self.quantity} {fmt(self.max_residual)} {fmt(self.mean_residual)} "
                f"{self.samples} {fmt(self.tolerance)} {self.verdict}\n")

    def to_csv(self) -> str:
        lines = ["index,residual"]
        lines += [f"{i},{fmt(r)}" for i, r in enumerate(self.residuals)]
        return "\n".join(lines) + "\n"


def make_report(quantity, residuals, tolerance, value=None) -> CurvatureReport:
    r = np.asarray(residuals, float).ravel()
    # fixed reduction order keeps max/mean reproducible
    return CurvatureReport(quantity, float(np.max(r)), float(np.sum(r) / len(r)), int(len(r)),
                           float(tolerance), None if value is None else float(value),
                           tuple(float(x) for x in r))


def einstein_pointwise(data: CurvatureData, Lambda: float):
    """Largest |eigenvalue| of g^{-1}(Ric - Lambda g) at each point."""
    from scipy.linalg import eigh

    out = np.empty(len(data.points))
    for n in range(len(out)):
        g = data.metric[n]
        E = data.ricci[n] - Lambda * g
        E = 0.5 * (E + E.T)
        out[n] = np.abs(eigh(E, 0.5 * (g + g.T), eigvals_only=True)).max()
    return out


def einstein_residual(chart, w=None, Lambda: float = 0.0, grid=None, tol: float = 1e-4,
                      h: float = H_CURVATURE, data: CurvatureData | None = None) -> CurvatureReport:
    """max over the grid of the g-operator norm of Ric - Lambda g."""
    if data is None:
        U = chart.interior_grid(5) if grid is None else grid
        data = riemann_ricci_sectional(chart, w, U, h, tol=tol)
    return make_report("einstein", einstein_pointwise(data, Lambda), tol)


def sectional_spread(data: CurvatureData, rng=None, count: int = 0) -> float:
    """max - min of sampled sectional curvatures over all points and planes."""
    K = data.coordinate_sectionals()
    if count and rng is not None:
        K = np.concatenate([K, data.random_sectionals(rng, count)], axis=-1)
    return float(K.max() - K.min())


def spread_report(spread: float, threshold: float) -> CurvatureReport:
    """Nontriviality certificate: passes when spread >= threshold."""
    return CurvatureReport("sectional-spread", float(threshold - spread), float(threshold - spread),
                           1, 0.0, value=float(spread), residuals=(float(threshold - spread),))


# -- shape operator ----------------------------------------------------------

def _hessian(chart, U, h):
    """Second partials of the embedding: (P, d, d, D), 2nd-order stencils."""
    f = chart.embed
    d = chart.dim
    f0 = f(U)
    out = np.empty(U.shape[:-1] + (d, d, f0.shape[-1]))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        out[..., i, i, :] = (f(U + e) - 2 * f0 + f(U - e)) / (h * h)
        for j in range(i + 1, d):
            e2 = np.zeros(d)
            e2[j] = h
            v = (f(U + e + e2) - f(U + e - e2) - f(U - e + e2) + f(U - e - e2)) / (4 * h * h)
            out[..., i, j, :] = v
            out[..., j, i, :] = v
    return f0, out


def _shape_block(chart, w, U, h):
    P, Hs = _hessian(chart, U, h)
    J = _jacobian(chart, U, h)
    d = chart.dim
    eps = chart.eps
    ref = np.asarray(chart.normal_ref(U), float)
    # Gram-Schmidt of the reference against the tangent frame
    g = _ambient_dot(chart, w, P[:, None, None, :], J[:, :, None, :], J[:, None, :, :])
    _check_pd(g)
    b = _ambient_dot(chart, w, P[:, None, :], J, ref[:, None, :])
    coef = np.linalg.solve(g, b[..., None])[..., 0]
    N = ref - np.einsum("ni,nid->nd", coef, J)
    if chart.target == "warped":
        N[:, 1:] = project_tangent(eps, P[:, 1:], N[:, 1:]) if eps != 0 else N[:, 1:]
    elif eps != 0:
        N = project_tangent(eps, P, N)
    nn = _ambient_dot(chart, w, P, N, N)
    if np.any(nn <= 1e-20):
        raise DegenerateChartError("normal reference lies in the tangent space")
    N = N / np.sqrt(nn)[:, None]
    if chart.target == "warped":
        t = P[:, 0]
        om = w.w(t)
        dom = w.dw(t)
        Jt, Jp = J[..., 0], J[..., 1:]
        Ht, Hp = Hs[..., 0], Hs[..., 1:]
        Na, Nx = N[:, 0], N[:, 1:]
        gp = model_dot(eps, Jp[:, :, None, :], Jp[:, None, :, :])
        vert = Hp + (dom / om)[:, None, None, None] * (
            Jt[:, None, :, None] * Jp[:, :, None, :] + Jt[:, :, None, None] * Jp[:, None, :, :])
        hmat = Na[:, None, None] * (Ht - (om * dom)[:, None, None] * gp) \
            + (om * om)[:, None, None] * model_dot(eps, vert, Nx[:, None, None, :])
    else:
        hmat = model_dot(eps, Hs, N[:, None, None, :])
    return g, 0.5 * (hmat + np.swapaxes(hmat, 1, 2)), N


@dataclass(frozen=True)
class ShapeData:
    points: np.ndarray
    metric: np.ndarray
    second_form: np.ndarray
    normal: np.ndarray

    def principal(self) -> np.ndarray:
        """Sorted principal curvatures at each point: (P, d)."""
        from scipy.linalg import eigh

        return np.stack([eigh(self.second_form[n], self.metric[n], eigvals_only=True)
                         for n in range(len(self.points))])


def shape_data(chart: ChartImmersion, w=None, u=None, h: float = H_CURVATURE) -> ShapeData:
    if chart.target == "abstract" or chart.normal_ref is None:
        raise DegenerateChartError("shape operator needs an immersed chart with a normal reference")
    U = np.atleast_2d(np.asarray(chart.center() if u is None else u, float))
    g, hm, N = _map_chunks(lambda X: _shape_block(chart, w, X, h), U)
    return ShapeData(U, g, hm, N)


def shape_operator(chart: ChartImmersion, w=None, u=None, h: float = H_CURVATURE) -> np.ndarray:
    """Sorted principal curvatures (A = -dN) at u; (d,) for a single point."""
    U = np.asarray(chart.center() if u is None else u, float)
    vals = shape_data(chart, w, U, h).principal()
    return vals[0] if U.ndim == 1 else vals


# -- self test ---------------------------------------------------------------

def self_test_charts():
    """The three closed-form 2-dimensional space forms with curvature 0, 1, -1."""
    from .spaceform import hyperboloid_coords, sphere_box, sphere_coords

    flat = ChartImmersion(2, ((-1.0, 1.0), (-1.0, 1.0)), "spaceform", 0,
                          embed=lambda u: np.asarray(u, float) @ np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 2.0]]))
    rnd = ChartImmersion(2, sphere_box(2), "spaceform", 1, embed=sphere_coords)
    hyp = ChartImmersion(2, ((-1.0, 1.0), (-1.0, 1.0)), "spaceform", -1, embed=hyperboloid_coords)
    return [(flat, 0.0), (rnd, 1.0), (hyp, -1.0)]


def self_test(tol: float = 1e-5, n: int = 7) -> CurvatureReport:
    """Sectional curvature of flat, round and hyperbolic charts vs 0, 1, -1."""
    res = []
    for chart, K in self_test_charts():
        data = riemann_ricci_sectional(chart, None, chart.interior_grid(n), tol=tol)
        res.append(np.abs(data.sectional([1.0, 0.0], [0.0, 1.0]) - K))
    return make_report("sectional", np.concatenate(res), tol)
