"""Parallel families f_s in Q_eps^n and the (phi, f_s)-graphs over them.

A family is generated by a seed hypersurface with its unit normal eta:
f_s = C_eps(s) f + S_eps(s) eta, and the parallel normal is
eta_s = -eps S_eps(s) f + C_eps(s) eta (for eps = 0: f + s eta and eta).
A graph places f_s at height phi(s) in I x_omega Q_eps^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .ambient import WarpSpec, alpha_beta_array
from .chart import ChartImmersion
from .errors import (DegenerateSpectrumError, FocalSingularityError, InvalidConfigurationError,
                     NotIdealError)
from .oracle import fmt, make_report
from .shape import PrincipalData, count_distinct, distinct, einstein_residuals
from .spaceform import check_eps, cs, cs_array

FOCAL_MARGIN = 1e-3
FOCAL_TINY = 1e-12
S_CAP = {1: math.pi, 0: 10.0, -1: 5.0}


def parallel_curvature(lambda0: float, eps: int, s: float) -> float:
    """Principal curvature of f_s carried by a seed curvature lambda0."""
    c, sn = cs(eps, s)
    den = c - sn * lambda0
    if abs(den) <= FOCAL_TINY:
        raise FocalSingularityError(f"s={s!r} is a focal value of lambda0={lambda0!r}")
    return (eps * sn + c * lambda0) / den


def parallel_curvature_array(lambda0, eps: int, s):
    c, sn = cs_array(eps, s)
    den = c - sn * lambda0
    if np.any(np.abs(den) <= FOCAL_TINY):
        raise FocalSingularityError("focal value in the sample range")
    return (eps * sn + c * lambda0) / den


def focal_range(lambdas, eps: int, margin: float = FOCAL_MARGIN, cap: float | None = None) -> tuple:
    """Largest interval around 0 where |C - S lambda0| >= margin for every lambda0."""
    cap = S_CAP[eps] if cap is None else cap
    ends = []
    for sign in (1.0, -1.0):
        end = sign * cap
        ss = sign * np.linspace(0.0, cap, 4001)
        for lam in lambdas:
            c, s = cs_array(eps, ss)
            g = c - s * lam
            bad = np.nonzero(g < margin)[0]
            if bad.size:
                k = bad[0]
                fn = lambda x: cs(eps, x)[0] - cs(eps, x)[1] * lam - margin
                root = optimize.brentq(fn, ss[k - 1], ss[k], xtol=1e-15)
                if abs(root) < abs(end):
                    end = root
        ends.append(end)
    return (ends[1], ends[0])


@dataclass(frozen=True)
class CartanResult:
    residuals: tuple
    product: float | None


def cartan_residual(curvatures, eps: int) -> CartanResult:
    """Per-class residual of Cartan's identity; plus lambda*mu + eps for two classes."""
    check_eps(eps)
    vals = [(float(v), int(m)) for v, m in curvatures]
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if not distinct(vals[i][0], vals[j][0]):
                raise DegenerateSpectrumError("Cartan's identity needs pairwise distinct curvatures")
    if len(vals) < 2:
        return CartanResult((), None)
    res = tuple(
        math.fsum(m * (eps + li * lj) / (li - lj) for j, (lj, m) in enumerate(vals) if j != i)
        for i, (li, _) in enumerate(vals)
    )
    prod = vals[0][0] * vals[1][0] + eps if len(vals) == 2 else None
    return CartanResult(res, prod)


def _deriv5(f, s, h):
    return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h)


def riccati_residual(lambda0: float, eps: int, s: float, h: float | None = None) -> float:
    """|d/ds lambda^s - eps - (lambda^s)^2| by 5-point central differences."""
    h = 1e-5 * (1 + abs(s)) if h is None else h
    d = _deriv5(lambda x: parallel_curvature(lambda0, eps, x), s, h)
    lam = parallel_curvature(lambda0, eps, s)
    return abs(d - eps - lam * lam)


def log_form_residual(lambda0: float, eps: int, s: float, h: float | None = None) -> float:
    """|lambda^s + d/ds log(C - S lambda0)| by central differences."""
    h = 1e-5 * (1 + abs(s)) if h is None else h
    g = lambda x: math.log(abs(cs(eps, x)[0] - cs(eps, x)[1] * lambda0))
    return abs(parallel_curvature(lambda0, eps, s) + _deriv5(g, s, h))


# -- families ----------------------------------------------------------------

@dataclass(frozen=True)
class ParallelFamily:
    seed: ChartImmersion
    curvatures: tuple
    eps: int
    s_range: tuple

    def __post_init__(self):
        check_eps(self.eps)
        object.__setattr__(self, "curvatures", tuple((float(v), int(m)) for v, m in self.curvatures))
        if self.seed.normal_ref is None:
            raise InvalidConfigurationError("seed chart must carry its unit normal")
        lo, hi = self.s_range
        if not lo < hi:
            raise InvalidConfigurationError("empty s_range")
        ss = np.linspace(lo, hi, 1001)
        c, s = cs_array(self.eps, ss)
        for lam, _ in self.curvatures:
            if np.any(c - s * lam <= 0):
                raise FocalSingularityError(f"s_range {self.s_range} crosses a focal value of {lam}")

    @classmethod
    def from_seed(cls, seed: ChartImmersion, curvatures, eps: int, s_range=None):
        curv = [(lam, m) for lam, m in curvatures]
        if s_range is None:
            s_range = focal_range([lam for lam, _ in curv], eps)
        return cls(seed, tuple(curv), eps, tuple(float(x) for x in s_range))

    @property
    def n(self) -> int:
        return self.seed.dim + 1

    def contains(self, s) -> bool:
        return bool(np.all((np.asarray(s) >= self.s_range[0]) & (np.asarray(s) <= self.s_range[1])))

    def curvatures_at(self, s: float) -> list:
        return [(parallel_curvature(lam, self.eps, s), m) for lam, m in self.curvatures]

    def point(self, s, u):
        """f_s(u), vectorized over leading axes of u (s broadcast)."""
        f = self.seed.embed(u)
        eta = self.seed.normal_ref(u)
        c, sn = cs_array(self.eps, s)
        return c[..., None] * f + sn[..., None] * eta

    def normal(self, s, u):
        f = self.seed.embed(u)
        eta = self.seed.normal_ref(u)
        c, sn = cs_array(self.eps, s)
        return -self.eps * sn[..., None] * f + c[..., None] * eta

    def member_chart(self, s: float) -> ChartImmersion:
        s = float(s)
        return ChartImmersion(
            self.seed.dim, self.seed.box, "spaceform", self.eps,
            embed=lambda u: self.point(np.full(np.shape(u)[:-1], s), u),
            normal_ref=lambda u: self.normal(np.full(np.shape(u)[:-1], s), u),
            meta={"kind": "parallel", "s": s},
        )

    def samples(self, count: int = 100, margin: float = 0.0) -> np.ndarray:
        lo, hi = self.s_range
        return np.linspace(lo + margin, hi - margin, count)


def family_table(fam: ParallelFamily, ss) -> str:
    """CSV: s, lambda_s per curvature class, Riccati residual per class."""
    k = len(fam.curvatures)
    head = ["s"] + [f"lambda{i + 1}" for i in range(k)] + [f"riccati{i + 1}" for i in range(k)]
    lines = [",".join(head)]
    for s in ss:
        lam = [parallel_curvature(l0, fam.eps, s) for l0, _ in fam.curvatures]
        ric = [riccati_residual(l0, fam.eps, s) for l0, _ in fam.curvatures]
        lines.append(",".join(fmt(x) for x in [s, *lam, *ric]))
    return "\n".join(lines) + "\n"


# -- graphs ------------------------------------------------------------------

@dataclass(frozen=True)
class GraphFrame:
    theta: float
    rho: float
    zeta: float


@dataclass(frozen=True)
class GraphSpec:
    family: ParallelFamily
    phi: Callable
    w: WarpSpec
    dphi: Callable | None = None

    def __post_init__(self):
        if self.w.eps != self.family.eps:
            raise InvalidConfigurationError("family and warp disagree on eps")
        ss = self.family.samples(257)
        if np.any(self.phi_prime(ss) <= 0):
            raise InvalidConfigurationError("phi must be increasing (phi' > 0)")
        if not self.w.contains(self.phi(ss)):
            raise InvalidConfigurationError("phi leaves the warp interval")

    def phi_prime(self, s):
        s = np.asarray(s, float)
        if self.dphi is not None:
            return np.asarray(self.dphi(s), float)
        h = 1e-5 * (1 + np.abs(s))
        return (self.phi(s + h) - self.phi(s - h)) / (2 * h)


def _frame_arrays(g: GraphSpec, s):
    t = g.phi(s)
    om = g.w.w(t)
    q = g.phi_prime(s) / om
    theta = 1.0 / np.sqrt(1.0 + q * q)
    return theta, q * theta, g.w.dw(t) / om


def graph_frame(g: GraphSpec, s: float) -> GraphFrame:
    th, rho, zeta = _frame_arrays(g, float(s))
    return GraphFrame(float(th), float(rho), float(zeta))


@dataclass(frozen=True)
class GraphPrincipal:
    s: float
    lambda1: float
    lambdas: tuple
    frame: GraphFrame
    lambda1_log: float

    @property
    def cross_residual(self) -> float:
        return abs(self.lambda1 - self.lambda1_log)

    def spectrum(self) -> list:
        return [self.lambda1] + [v for v, m in self.lambdas for _ in range(m)]


def graph_principal(g: GraphSpec, s: float, lambda0=None) -> GraphPrincipal:
    """Principal curvatures of the graph at parameter s.

    ``lambda0`` overrides the seed curvatures (for seeds whose curvatures
    vary from point to point); defaults to the family's classes.
    """
    s = float(s)
    fam = g.family
    seed = fam.curvatures if lambda0 is None else [(float(v), int(m)) for v, m in lambda0]
    h = 1e-5 * (1 + abs(s))
    th, rho, zeta = (float(x) for x in _frame_arrays(g, s))
    om = float(g.w.w(g.phi(s)))
    rho_p = (float(_frame_arrays(g, s + h)[1]) - float(_frame_arrays(g, s - h)[1])) / (2 * h)
    lam1 = rho_p / om - th * zeta

    def log_thw(x):
        t_, _, _ = _frame_arrays(g, x)
        return math.log(float(t_) * float(g.w.w(g.phi(x))))

    dlog = (log_thw(s + h) - log_thw(s - h)) / (2 * h)
    lam1_log = -th / float(g.phi_prime(s)) * dlog
    rest = tuple((-(rho / om) * parallel_curvature(l0, fam.eps, s) - th * zeta, m) for l0, m in seed)
    return GraphPrincipal(s, lam1, rest, GraphFrame(th, rho, zeta), lam1_log)


def graph_principal_data(g: GraphSpec, s: float, lambda0=None) -> PrincipalData:
    gp = graph_principal(g, s, lambda0)
    a, b = alpha_beta_array(g.w, float(g.phi(s)))
    return PrincipalData(g.family.n, ((gp.lambda1, 1),) + gp.lambdas, gp.frame.rho, gp.frame.theta,
                         float(a), float(b))


def graph_chart(g: GraphSpec, s_range=None) -> ChartImmersion:
    """(s, u) -> (phi(s), f_s(u)) in I x_omega Q_eps^n, normal oriented by d/dt."""
    fam = g.family
    lo, hi = fam.s_range if s_range is None else s_range

    def embed(x):
        x = np.asarray(x, float)
        s, u = x[..., 0], x[..., 1:]
        return np.concatenate([g.phi(s)[..., None], fam.point(s, u)], axis=-1)

    def normal(x):
        x = np.asarray(x, float)
        out = np.zeros(x.shape[:-1] + (1 + fam.seed.embed(x[..., 1:]).shape[-1],))
        out[..., 0] = 1.0
        return out

    return ChartImmersion(fam.n, ((lo, hi),) + tuple(fam.seed.box), "warped", fam.eps,
                          embed=embed, normal_ref=normal, meta={"kind": "graph"})


def graph_table(g: GraphSpec, ss) -> str:
    k = len(g.family.curvatures)
    head = ["s", "theta", "rho", "lambda1"] + [f"lambda{i + 2}" for i in range(k)]
    lines = [",".join(head)]
    for s in ss:
        gp = graph_principal(g, s)
        row = [s, gp.frame.theta, gp.frame.rho, gp.lambda1] + [v for v, _ in gp.lambdas]
        lines.append(",".join(fmt(x) for x in row))
    return "\n".join(lines) + "\n"


# -- Einstein check ----------------------------------------------------------

@dataclass(frozen=True)
class IdealEinsteinCheck:
    report: object
    counts: tuple

    @property
    def uniform_count(self) -> int | None:
        return self.counts[0] if len(set(self.counts)) == 1 else None

    @property
    def trivial_expected(self) -> bool:
        return self.uniform_count == 2


def ideal_einstein_check(source, Lambda: float, grid: Sequence | None = None,
                         tol: float = 1e-6) -> IdealEinsteinCheck:
    """Einstein residuals and distinct-curvature counts over samples.

    ``source`` is a GraphSpec (sampled at ``grid`` values of s) or an
    iterable of PrincipalData already evaluated elsewhere.
    """
    if isinstance(source, GraphSpec):
        ss = source.family.samples(20, margin=0.05 * np.ptp(source.family.s_range)) if grid is None else grid
        pds = [graph_principal_data(source, s) for s in ss]
    else:
        pds = list(source)
    res, counts = [], []
    for pd in pds:
        if abs(pd.beta * pd.T_norm) <= 1e-12:
            raise NotIdealError("beta * ||T|| vanishes at a sample")
        er = einstein_residuals(pd, Lambda)
        res.append(er.max_abs())
        counts.append(count_distinct(pd.spectrum()))
    return IdealEinsteinCheck(make_report("einstein", res, tol), tuple(counts))
