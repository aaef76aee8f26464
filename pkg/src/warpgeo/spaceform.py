"""Linear models of the space forms Q_eps^n and their umbilical hypersurfaces.

Q_0^n is R^n, Q_1^n the unit sphere of R^{n+1} and Q_{-1}^n the upper sheet
of the hyperboloid <p, p> = -1 in Minkowski space R^{1,n}. Every point and
tangent vector is stored in the coordinates of the ambient linear space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .chart import ChartImmersion
from .errors import InvalidArgumentError, InvalidConfigurationError, InvalidFrameError

EPSILONS = (-1, 0, 1)
POLAR_MARGIN = 0.1


def check_eps(eps) -> int:
    if eps not in EPSILONS:
        raise InvalidArgumentError(f"eps must be one of -1, 0, 1 (got {eps!r})")
    return int(eps)


class CS(NamedTuple):
    c: float
    s: float


def cs(eps: int, s: float) -> CS:
    """Generalized cosine and sine C_eps(s), S_eps(s)."""
    eps = check_eps(eps)
    if not math.isfinite(s):
        raise InvalidArgumentError(f"s must be finite (got {s!r})")
    if eps == 0:
        return CS(1.0, float(s))
    if eps == 1:
        return CS(math.cos(s), math.sin(s))
    return CS(math.cosh(s), math.sinh(s))


def cs_array(eps: int, s):
    """Vectorized C_eps, S_eps."""
    s = np.asarray(s, dtype=float)
    if eps == 0:
        return np.ones_like(s), s.copy()
    if eps == 1:
        return np.cos(s), np.sin(s)
    return np.cosh(s), np.sinh(s)


def model_dim(eps: int, n: int) -> int:
    return n if eps == 0 else n + 1


def model_dot(eps: int, x, y):
    """Bilinear form of the linear model, contracted over the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    prod = x * y
    if eps == -1:
        return prod[..., 1:].sum(axis=-1) - prod[..., 0]
    return prod.sum(axis=-1)


def project_tangent(eps: int, p, v):
    """Orthogonal projection of a linear-model vector onto T_p Q_eps."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if eps == 0:
        return v
    # <p, p> = eps, so the normal component is (<v, p>/eps) p
    return v - (model_dot(eps, v, p) / eps)[..., None] * p


@dataclass(frozen=True)
class ModelPoint:
    eps: int
    coords: tuple

    def __post_init__(self):
        eps = check_eps(self.eps)
        p = np.asarray(self.coords, dtype=float)
        if p.ndim != 1 or not np.all(np.isfinite(p)):
            raise InvalidArgumentError("model point must be a finite vector")
        scale = 1.0 + float(p @ p)
        if eps == 1 and abs(p @ p - 1.0) > 1e-12 * scale:
            raise InvalidArgumentError("sphere point must have unit norm")
        if eps == -1:
            if abs(model_dot(-1, p, p) + 1.0) > 1e-12 * scale or p[0] <= 0:
                raise InvalidArgumentError("hyperboloid point must satisfy <p,p> = -1, p0 > 0")
        object.__setattr__(self, "coords", tuple(float(c) for c in p))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)


def geodesic(eps: int, p, v, s: float) -> ModelPoint:
    """Point at arclength s on the unit-speed geodesic through p with velocity v."""
    eps = check_eps(eps)
    p = p.array if isinstance(p, ModelPoint) else np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if p.shape != v.shape:
        raise InvalidFrameError("p and v must have the same length")
    if eps != 0 and abs(model_dot(eps, p, v)) > 1e-9:
        raise InvalidFrameError("v is not tangent at p")
    if abs(model_dot(eps, v, v) - 1.0) > 1e-9:
        raise InvalidFrameError("v is not a unit vector")
    c, sn = cs(eps, s)
    q = p + s * v if eps == 0 else c * p + sn * v
    return ModelPoint(eps, tuple(q))


def geodesic_velocity(eps: int, p, v, s):
    """Velocity of the same geodesic at arclength s (the parallel normal eta_s)."""
    c, sn = cs_array(eps, s)
    if eps == 0:
        return np.broadcast_to(v, np.broadcast_shapes(np.shape(v), np.shape(p))).copy()
    return -eps * sn[..., None] * p + c[..., None] * v


# -- coordinate maps ---------------------------------------------------------

def sphere_coords(a):
    """Hyperspherical coordinates: angles (..., m) -> unit vectors (..., m + 1)."""
    a = np.asarray(a, dtype=float)
    m = a.shape[-1]
    out = np.empty(a.shape[:-1] + (m + 1,))
    prod = np.ones(a.shape[:-1])
    for k in range(m):
        out[..., k] = prod * np.cos(a[..., k])
        prod = prod * np.sin(a[..., k])
    out[..., m] = prod
    return out


def sphere_box(m: int) -> tuple:
    polar = (POLAR_MARGIN, math.pi - POLAR_MARGIN)
    return tuple([polar] * (m - 1) + [(0.0, 2.0 * math.pi)])


def hyperboloid_coords(x):
    """Graph chart of H^m: x (..., m) -> (sqrt(1 + |x|^2), x)."""
    x = np.asarray(x, dtype=float)
    x0 = np.sqrt(1.0 + (x * x).sum(axis=-1))
    return np.concatenate([x0[..., None], x], axis=-1)


def horosphere_coords(r, x):
    """Horospherical coordinates of H^n: metric dr^2 + e^{2r} |dx|^2.

    Returns the point and the unit vector -d/dr (pointing into the horoball).
    """
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.exp(-r)
    x2 = (x * x).sum(axis=-1)
    p = np.concatenate([
        ((1.0 + x2 + y * y) / (2 * y))[..., None],
        x / y[..., None],
        ((1.0 - x2 - y * y) / (2 * y))[..., None],
    ], axis=-1)
    inward = np.concatenate([
        ((y * y - 1.0 - x2) / (2 * y))[..., None],
        -x / y[..., None],
        ((x2 - 1.0 - y * y) / (2 * y))[..., None],
    ], axis=-1)
    return p, inward


def fiber_chart(eps: int, n: int, extent: float = 1.0) -> ChartImmersion:
    """Chart of all of Q_eps^n (used as the fiber of ambient charts)."""
    eps = check_eps(eps)
    if eps == 0:
        return ChartImmersion(n, tuple([(-extent, extent)] * n), "spaceform", eps, embed=lambda u: np.asarray(u, float))
    if eps == 1:
        return ChartImmersion(n, sphere_box(n), "spaceform", eps, embed=sphere_coords)
    return ChartImmersion(n, tuple([(-extent, extent)] * n), "spaceform", eps, embed=hyperboloid_coords)


# -- seeds -------------------------------------------------------------------

SEED_KINDS = ("sphere", "horosphere", "equidistant", "hyperplane")


def umbilic_seed(eps: int, kind: str, param: float | None, n: int):
    """Totally umbilical hypersurface M_0^{n-1} of Q_eps^n and its curvature.

    The returned chart's normal points toward the center (sphere), into the
    horoball (horosphere), toward the totally geodesic core (equidistant),
    or along the last axis (hyperplane); with A = -d(normal) this makes the
    principal curvature 1/r, cot r, coth r, 1, tanh d or 0.
    """
    eps = check_eps(eps)
    if n < 2:
        raise InvalidConfigurationError("fiber dimension n must be >= 2")
    if kind not in SEED_KINDS:
        raise InvalidConfigurationError(f"unknown seed kind {kind!r}")
    if kind in ("horosphere", "equidistant") and eps != -1:
        raise InvalidConfigurationError(f"{kind} seeds exist only in hyperbolic space")
    m = n - 1
    if kind == "sphere":
        r = float(param)
        if not r > 0 or (eps == 1 and not r < math.pi):
            raise InvalidConfigurationError(f"invalid sphere radius {param!r}")
        if eps == 0:
            lam = 1.0 / r
            embed = lambda u: r * sphere_coords(u)
            normal = lambda u: -sphere_coords(u)
        elif eps == 1:
            lam = math.cos(r) / math.sin(r)
            cr, sr = math.cos(r), math.sin(r)

            def embed(u):
                S = sphere_coords(u)
                return np.concatenate([np.full(S.shape[:-1] + (1,), cr), sr * S], axis=-1)

            def normal(u):
                S = sphere_coords(u)
                return np.concatenate([np.full(S.shape[:-1] + (1,), sr), -cr * S], axis=-1)
        else:
            lam = math.cosh(r) / math.sinh(r)
            ch, sh = math.cosh(r), math.sinh(r)

            def embed(u):
                S = sphere_coords(u)
                return np.concatenate([np.full(S.shape[:-1] + (1,), ch), sh * S], axis=-1)

            def normal(u):
                S = sphere_coords(u)
                return -np.concatenate([np.full(S.shape[:-1] + (1,), sh), ch * S], axis=-1)
        box = sphere_box(m)
        orientation = "toward center"
    elif kind == "horosphere":
        r0 = 0.0 if param is None else float(param)
        lam = 1.0

        def embed(u):
            u = np.asarray(u, float)
            return horosphere_coords(np.full(u.shape[:-1], r0), u)[0]

        def normal(u):
            u = np.asarray(u, float)
            return horosphere_coords(np.full(u.shape[:-1], r0), u)[1]
        box = tuple([(-1.0, 1.0)] * m)
        orientation = "into horoball"
    elif kind == "equidistant":
        d = float(param)
        lam = math.tanh(d)
        ch, sh = math.cosh(d), math.sinh(d)

        def embed(u):
            q = hyperboloid_coords(u)
            return np.concatenate([ch * q, np.full(q.shape[:-1] + (1,), sh)], axis=-1)

        def normal(u):
            q = hyperboloid_coords(u)
            return -np.concatenate([sh * q, np.full(q.shape[:-1] + (1,), ch)], axis=-1)
        box = tuple([(-1.0, 1.0)] * m)
        orientation = "toward totally geodesic core"
    else:
        lam = 0.0
        if eps == 1:
            base = sphere_coords
            box = sphere_box(m)
        elif eps == -1:
            base = hyperboloid_coords
            box = tuple([(-1.0, 1.0)] * m)
        else:
            base = lambda u: np.asarray(u, float)
            box = tuple([(-1.0, 1.0)] * m)

        def embed(u):
            q = base(u)
            return np.concatenate([q, np.zeros(q.shape[:-1] + (1,))], axis=-1)

        def normal(u):
            q = base(u)
            e = np.zeros(q.shape[:-1] + (q.shape[-1] + 1,))
            e[..., -1] = 1.0
            return e
        orientation = "last axis"
    chart = ChartImmersion(
        m, box, "spaceform", eps, embed=embed, normal_ref=normal,
        meta={"kind": kind, "param": param, "n": n, "lambda0": lam, "orientation": orientation},
    )
    return chart, lam


def tube_seed(eps: int, k: int, r: float, n: int):
    """Tube of radius r around a totally geodesic Q^{n-1-k}: two principal curvatures.

    eps =  1: S^k(sin r) x S^{n-1-k}(cos r) in S^n, curvatures (cot r, -tan r)
    eps =  0: S^k(r) x R^{n-1-k} in R^n,            curvatures (1/r, 0)
    eps = -1: S^k(sinh r) x H^{n-1-k}(cosh r),       curvatures (coth r, tanh r)
    """
    eps = check_eps(eps)
    m = n - 1 - k
    if k < 1 or m < 1:
        raise InvalidConfigurationError(f"tube needs 1 <= k <= n - 2 (got k={k}, n={n})")
    r = float(r)
    if not r > 0 or (eps == 1 and not r < math.pi / 2):
        raise InvalidConfigurationError(f"invalid tube radius {r!r}")

    def split(u):
        u = np.asarray(u, float)
        return u[..., :k], u[..., k:]

    if eps == 1:
        s1, c1 = math.sin(r), math.cos(r)
        curv = [(c1 / s1, k), (-s1 / c1, m)]

        def embed(u):
            a, b = split(u)
            return np.concatenate([s1 * sphere_coords(a), c1 * sphere_coords(b)], axis=-1)

        def normal(u):
            a, b = split(u)
            return np.concatenate([-c1 * sphere_coords(a), s1 * sphere_coords(b)], axis=-1)
        box = sphere_box(k) + sphere_box(m)
    elif eps == 0:
        curv = [(1.0 / r, k), (0.0, m)]

        def embed(u):
            a, b = split(u)
            return np.concatenate([r * sphere_coords(a), b], axis=-1)

        def normal(u):
            a, b = split(u)
            return np.concatenate([-sphere_coords(a), np.zeros_like(b)], axis=-1)
        box = sphere_box(k) + tuple([(-1.0, 1.0)] * m)
    else:
        ch, sh = math.cosh(r), math.sinh(r)
        curv = [(ch / sh, k), (sh / ch, m)]

        def embed(u):
            a, b = split(u)
            return np.concatenate([ch * hyperboloid_coords(b), sh * sphere_coords(a)], axis=-1)

        def normal(u):
            a, b = split(u)
            return -np.concatenate([sh * hyperboloid_coords(b), ch * sphere_coords(a)], axis=-1)
        box = sphere_box(k) + tuple([(-1.0, 1.0)] * m)
    chart = ChartImmersion(
        n - 1, box, "spaceform", eps, embed=embed, normal_ref=normal,
        meta={"kind": "tube", "k": k, "radius": r, "n": n, "curvatures": tuple(curv),
              "orientation": "toward core"},
    )
    return chart, curv
