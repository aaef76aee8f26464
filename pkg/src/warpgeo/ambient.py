"""The warped product I x_omega Q_eps^n.

A :class:`WarpSpec` bundles eps, the interval I and the warping function
with its first two derivatives. Catalog entries carry closed-form
derivatives; tabulated and callable warps fall back on central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, interpolate, optimize

from .errors import DomainError, InvalidConfigurationError, InvalidFrameError, NumericError
from .spaceform import check_eps, model_dot

CATALOG = {
    "constant": ("a",),
    "linear": ("a", "b"),
    "sin": ("A", "mu", "phase"),
    "sinh": ("A", "mu", "phase"),
    "cosh": ("A", "mu", "phase"),
    "exp": ("A", "mu"),
    "tabulated": ("ts", "values"),
}

CATALOG_DEFAULTS = {
    "constant": {"a": 1.0},
    "linear": {"a": 1.0, "b": 0.0},
    "sin": {"A": 1.0, "mu": 1.0, "phase": 0.0},
    "sinh": {"A": 1.0, "mu": 1.0, "phase": 0.0},
    "cosh": {"A": 1.0, "mu": 1.0, "phase": 0.0},
    "exp": {"A": 1.0, "mu": 1.0},
}


def _fd_step(t):
    return np.maximum(1e-5, 1e-5 * np.abs(t))


@dataclass(frozen=True)
class WarpSpec:
    eps: int
    interval: tuple
    omega: Callable
    d1: Callable | None = None
    d2: Callable | None = None
    name: str = "callable"
    params: tuple = ()
    inverse: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        check_eps(self.eps)
        t0, t1 = (float(x) for x in self.interval)
        if not t0 < t1:
            raise InvalidConfigurationError("interval must satisfy t_min < t_max")
        object.__setattr__(self, "interval", (t0, t1))
        ts = np.linspace(t0, t1, 257)[1:-1]
        w = np.asarray(self.omega(ts), dtype=float)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidConfigurationError(f"warp {self.name} is not positive on {self.interval}")

    # derivative access with finite-difference fallback
    def w(self, t):
        return np.asarray(self.omega(np.asarray(t, float)), dtype=float)

    def dw(self, t):
        t = np.asarray(t, float)
        if self.d1 is not None:
            return np.asarray(self.d1(t), dtype=float)
        h = _fd_step(t)
        return (self.w(t + h) - self.w(t - h)) / (2 * h)

    def ddw(self, t):
        t = np.asarray(t, float)
        if self.d2 is not None:
            return np.asarray(self.d2(t), dtype=float)
        h = _fd_step(t)
        return (self.w(t + h) - 2 * self.w(t) + self.w(t - h)) / (h * h)

    def contains(self, t, strict=True) -> bool:
        t0, t1 = self.interval
        t = np.asarray(t)
        if strict:
            return bool(np.all((t > t0) & (t < t1)))
        return bool(np.all((t >= t0) & (t <= t1)))

    def check_height(self, t):
        if not self.contains(t):
            raise DomainError(f"height {t!r} outside interval {self.interval}")

    @property
    def param_dict(self) -> dict:
        return dict(self.params)

    def image(self) -> tuple:
        """omega(I) for a monotone warp (open interval)."""
        a, b = self.w(self.interval[0]), self.w(self.interval[1])
        return (float(min(a, b)), float(max(a, b)))

    def chi(self, u):
        """Inverse of omega on I (omega assumed monotone)."""
        if self.inverse is not None:
            return np.asarray(self.inverse(np.asarray(u, float)), dtype=float)
        return _invert_monotone(self, np.asarray(u, float))

    def dchi(self, u):
        return 1.0 / self.dw(self.chi(u))


def _invert_monotone(w: WarpSpec, u):
    t0, t1 = w.interval
    increasing = w.w(t1) > w.w(t0)
    lo = np.full(u.shape, t0)
    hi = np.full(u.shape, t1)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        above = w.w(mid) > u
        if not increasing:
            above = ~above
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def default_interval(name: str, p: dict) -> tuple:
    if name == "linear":
        a, b = p["a"], p["b"]
        if a == 0:
            return (-10.0, 10.0)
        root = -b / a
        return (root + 0.01, root + 100.0) if a > 0 else (root - 100.0, root - 0.01)
    if name == "sin":
        mu, ph = p["mu"], p["phase"]
        return ((-ph + 0.05) / mu, (math.pi - ph - 0.05) / mu)
    if name == "sinh":
        mu, ph = p["mu"], p["phase"]
        return ((-ph + 0.05) / mu, 5.0)
    return (-5.0, 5.0)


def make_warp(name: str, eps: int, interval=None, **params) -> WarpSpec:
    """Build a catalog warp: constant, linear, sin, sinh, cosh, exp or tabulated."""
    if name not in CATALOG:
        raise InvalidConfigurationError(f"unknown warp {name!r}; catalog: {', '.join(CATALOG)}")
    unknown = set(params) - set(CATALOG[name])
    if unknown:
        raise InvalidConfigurationError(f"unknown parameters for {name}: {sorted(unknown)}")
    if name == "tabulated":
        ts = np.asarray(params["ts"], float)
        vals = np.asarray(params["values"], float)
        spline = interpolate.CubicSpline(ts, vals)
        if interval is None:
            interval = (float(ts[0]), float(ts[-1]))
        return WarpSpec(eps, interval, lambda t: spline(t), name=name,
                        params=(("n_points", len(ts)),))
    p = dict(CATALOG_DEFAULTS[name])
    p.update({k: float(v) for k, v in params.items()})
    if interval is None:
        interval = default_interval(name, p)
    inverse = None
    if name == "constant":
        a = p["a"]
        om = lambda t: np.full(np.shape(t), a)
        d1 = lambda t: np.zeros(np.shape(t))
        d2 = d1
    elif name == "linear":
        a, b = p["a"], p["b"]
        om = lambda t: a * t + b
        d1 = lambda t: np.full(np.shape(t), a)
        d2 = lambda t: np.zeros(np.shape(t))
        if a != 0:
            inverse = lambda u: (u - b) / a
    elif name == "exp":
        A, mu = p["A"], p["mu"]
        om = lambda t: A * np.exp(mu * t)
        d1 = lambda t: A * mu * np.exp(mu * t)
        d2 = lambda t: A * mu * mu * np.exp(mu * t)
        if mu != 0:
            inverse = lambda u: np.log(u / A) / mu
    else:
        A, mu, ph = p["A"], p["mu"], p["phase"]
        if name == "sin":
            om = lambda t: A * np.sin(mu * t + ph)
            d1 = lambda t: A * mu * np.cos(mu * t + ph)
            d2 = lambda t: -A * mu * mu * np.sin(mu * t + ph)
        elif name == "sinh":
            om = lambda t: A * np.sinh(mu * t + ph)
            d1 = lambda t: A * mu * np.cosh(mu * t + ph)
            d2 = lambda t: A * mu * mu * np.sinh(mu * t + ph)
        else:
            om = lambda t: A * np.cosh(mu * t + ph)
            d1 = lambda t: A * mu * np.sinh(mu * t + ph)
            d2 = lambda t: A * mu * mu * np.cosh(mu * t + ph)
    params_t = tuple(sorted(p.items()))
    return WarpSpec(eps, interval, om, d1, d2, name=name, params=params_t, inverse=inverse)


def warp_from_callable(eps: int, interval, omega: Callable) -> WarpSpec:
    """User warp; derivatives by central differences."""
    return WarpSpec(eps, interval, omega, name="callable")


# -- alpha, beta -------------------------------------------------------------

class AlphaBeta(NamedTuple):
    alpha: float
    beta: float


def alpha_beta_array(w: WarpSpec, t):
    om, d1, d2 = w.w(t), w.dw(t), w.ddw(t)
    alpha = (d1 * d1 - w.eps) / (om * om)
    return alpha, d2 / om - alpha


def alpha_beta(w: WarpSpec, t: float) -> AlphaBeta:
    w.check_height(t)
    a, b = alpha_beta_array(w, float(t))
    return AlphaBeta(float(a), float(b))


def alpha_prime_residual(w: WarpSpec, t: float) -> float:
    """|alpha'(t) - 2 (omega'/omega) beta(t)| with alpha' by central difference."""
    w.check_height(t)
    h = float(_fd_step(t))
    t0, t1 = w.interval
    if not (t - h > t0 and t + h < t1):
        raise DomainError(f"height {t!r} too close to the interval boundary")
    ap = (alpha_beta_array(w, t + h)[0] - alpha_beta_array(w, t - h)[0]) / (2 * h)
    _, beta = alpha_beta_array(w, t)
    return float(abs(ap - 2.0 * w.dw(t) / w.w(t) * beta))


# -- vectors, metric and curvature ------------------------------------------

@dataclass(frozen=True)
class AmbientVector:
    """a d/dt + x, with x a fiber vector in linear-model coordinates.

    ``base`` optionally records the fiber point so co-location and
    tangency can be checked.
    """

    a: float
    x: tuple
    base: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "x", tuple(float(c) for c in np.ravel(self.x)))
        if self.base is not None:
            object.__setattr__(self, "base", tuple(float(c) for c in np.ravel(self.base)))

    @property
    def xv(self) -> np.ndarray:
        return np.array(self.x)


def _check_frame(eps: int, *vecs: AmbientVector):
    dims = {len(v.x) for v in vecs}
    if len(dims) != 1:
        raise InvalidFrameError("vectors have fibers of different dimension")
    bases = {v.base for v in vecs if v.base is not None}
    if len(bases) > 1:
        raise InvalidFrameError("vectors are attached to different base points")
    if bases and eps != 0:
        p = np.array(next(iter(bases)))
        for v in vecs:
            if abs(model_dot(eps, p, v.xv)) > 1e-9 * (1.0 + np.abs(v.xv).max()):
                raise InvalidFrameError("fiber part is not tangent to the model")


def metric(w: WarpSpec, t: float, u: AmbientVector, v: AmbientVector) -> float:
    """dt^2 + omega(t)^2 ds_eps^2 evaluated on (u, v)."""
    _check_frame(w.eps, u, v)
    om = float(w.w(t))
    return u.a * v.a + om * om * float(model_dot(w.eps, u.xv, v.xv))


def curvature(w: WarpSpec, t: float, X, Y, Z, W) -> float:
    """<R(X, Y) Z, W> of the warped product in terms of alpha, beta and d/dt."""
    _check_frame(w.eps, X, Y, Z, W)
    alpha, beta = alpha_beta_array(w, float(t))
    g = lambda p, q: metric(w, t, p, q)
    xz, yw, xw, yz = g(X, Z), g(Y, W), g(X, W), g(Y, Z)
    return float(
        alpha * (xz * yw - xw * yz)
        + beta * (xz * Y.a * W.a - yz * X.a * W.a - xw * Y.a * Z.a + yw * X.a * Z.a)
    )


def curvature_components(w: WarpSpec, t: float, frame_a, frame_x):
    """All components <R(E_i, E_j) E_k, E_l> for a frame given as arrays.

    frame_a: (d,) dt-components; frame_x: (d, m) fiber parts. Vectorized
    counterpart of :func:`curvature` used by the oracle comparisons.
    """
    alpha, beta = alpha_beta_array(w, float(t))
    om = float(w.w(t))
    a = np.asarray(frame_a, float)
    x = np.asarray(frame_x, float)
    sign = np.ones(x.shape[-1])
    if w.eps == -1:
        sign[0] = -1.0
    G = np.outer(a, a) + om * om * (x * sign) @ x.T
    R = alpha * (np.einsum("ik,jl->ijkl", G, G) - np.einsum("il,jk->ijkl", G, G))
    R += beta * (
        np.einsum("ik,j,l->ijkl", G, a, a)
        - np.einsum("jk,i,l->ijkl", G, a, a)
        - np.einsum("il,j,k->ijkl", G, a, a)
        + np.einsum("jl,i,k->ijkl", G, a, a)
    )
    return R


# -- conformal change --------------------------------------------------------

@dataclass(frozen=True)
class ConformalMap:
    """G with G' = 1/omega and G(t_min) = 0, plus its inverse."""

    warp: WarpSpec
    tol: float = 1e-10

    def __call__(self, t):
        t0 = self.warp.interval[0]
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(ts)
        for i, ti in enumerate(ts):
            val, err = integrate.quad(lambda s: 1.0 / float(self.warp.w(s)), t0, ti,
                                      epsabs=self.tol, epsrel=0.0, limit=200)
            if not np.isfinite(val):
                raise NumericError("quadrature of 1/omega failed")
            out[i] = val
        return float(out[0]) if scalar else out

    def inverse(self, g):
        t0, t1 = self.warp.interval
        scalar = np.ndim(g) == 0
        gs = np.atleast_1d(np.asarray(g, float))
        out = np.empty_like(gs)
        for i, gi in enumerate(gs):
            try:
                out[i] = optimize.brentq(lambda t: self(t) - gi, t0, t1, xtol=1e-14, rtol=1e-15)
            except ValueError as exc:
                raise NumericError(f"G^-1({gi}) is outside G(I)") from exc
        return float(out[0]) if scalar else out

    def derivative(self, t):
        return 1.0 / self.warp.w(t)


def conformal_change(w: WarpSpec):
    """Return (G, G_inverse) for the conformal diffeomorphism (t, p) -> (G(t), p)."""
    t0, t1 = w.interval
    ts = np.linspace(t0, t1, 65)
    if np.min(w.w(ts)) <= 0:
        raise NumericError("omega must stay positive on the interval")
    G = ConformalMap(w)
    return G, G.inverse


def ambient_chart(w: WarpSpec, n: int, extent: float = 1.0, margin: float = 0.0):
    """Chart (t, fiber coordinates) -> (t, p) of the whole warped product."""
    from .chart import ChartImmersion
    from .spaceform import fiber_chart

    fib = fiber_chart(w.eps, n, extent)
    t0, t1 = w.interval
    span = t1 - t0
    box = ((t0 + 0.05 * span + margin, t1 - 0.05 * span - margin),) + fib.box

    def embed(u):
        u = np.asarray(u, float)
        p = fib.embed(u[..., 1:])
        return np.concatenate([u[..., :1], p], axis=-1)

    return ChartImmersion(n + 1, box, "warped", w.eps, embed=embed, meta={"kind": "ambient", "n": n})


def ambient_consistency(w: WarpSpec, n: int = 3, frames: int = 20, seed: int = 0,
                        h: float = 1e-3, tol: float = 1e-5):
    """Closed-form curvature tensor against the finite-difference one.

    Draws random points of the ambient chart, builds a g-orthonormal frame
    at each and compares all components. Returns a CurvatureReport.
    """
    from .oracle import chart_jacobian, make_report, riemann_ricci_sectional

    rng = np.random.default_rng(seed)
    ch = ambient_chart(w, n)
    U = ch.random_points(frames, rng, margin=0.3)
    data = riemann_ricci_sectional(ch, w, U, h)
    J = chart_jacobian(ch, U, h)
    res = []
    for k in range(frames):
        L = np.linalg.cholesky(data.metric[k])
        Q, _ = np.linalg.qr(rng.standard_normal((n + 1, n + 1)))
        E = np.linalg.solve(L.T, Q).T
        vec = E @ J[k]
        closed = curvature_components(w, U[k, 0], vec[:, 0], vec[:, 1:])
        # oracle R[i,k,l,m] pairs with <R(E_i,E_k)E_m,E_l>
        fd = np.einsum("iklm,ai,bk,cl,dm->abdc", data.riemann[k], E, E, E, E)
        res.append(np.abs(closed - fd).max())
    return make_report("ambient", res, tol)
