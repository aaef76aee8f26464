"""Constant-angle Einstein cylinders I x Sigma_0 in I x_omega Q_eps^n.

The base Sigma_0 is a hypersurface of the fiber with constant principal
curvatures; c is read off from the base and omega then solves
(omega')^2 + Lambda omega^2 / (n - 1) + c = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import WarpSpec, alpha_beta_array, make_warp
from .chart import ChartImmersion
from .errors import InvalidPartitionError, MismatchError, NoSolutionError
from .oracle import CurvatureReport, einstein_pointwise, make_report, riemann_ricci_sectional, \
    sectional_spread, spread_report
from .shape import PrincipalData
from .spaceform import check_eps, tube_seed, umbilic_seed

T_LOW_MARGIN = 0.05
T_CAP = 5.0


@dataclass(frozen=True)
class OmegaSolution:
    Lambda: float
    n: int
    c: float
    kind: str
    A: float
    mu: float
    phase: float
    b: float
    interval: tuple

    def omega(self, t):
        t = np.asarray(t, float)
        k = self.kind
        if k == "sin":
            return self.A * np.sin(self.mu * t + self.phase)
        if k == "sinh":
            return self.A * np.sinh(self.mu * t + self.phase)
        if k == "cosh":
            return self.A * np.cosh(self.mu * t + self.phase)
        if k == "exp":
            return self.A * np.exp(self.mu * t)
        return self.A * t + self.b

    def warp(self, eps: int) -> WarpSpec:
        if self.kind == "linear":
            if self.A == 0:
                return make_warp("constant", eps, self.interval, a=self.b)
            return make_warp("linear", eps, self.interval, a=self.A, b=self.b)
        if self.kind == "exp":
            return make_warp("exp", eps, self.interval, A=self.A, mu=self.mu)
        return make_warp(self.kind, eps, self.interval, A=self.A, mu=self.mu, phase=self.phase)

    def residual(self, t, eps: int = 1):
        """|omega'^2 + Lambda omega^2 / (n-1) + c| using the warp's closed-form derivative."""
        w = self.warp(eps)
        om, d1 = w.w(t), w.dw(t)
        return np.abs(d1 * d1 + self.Lambda * om * om / (self.n - 1) + self.c)

    def describe(self) -> str:
        return (f"{self.kind}(A={self.A!r}, mu={self.mu!r}, phase={self.phase!r}, b={self.b!r}) "
                f"on {self.interval}")


def solve_omega(Lambda: float, n: int, c: float) -> OmegaSolution:
    """Closed-form positive solution and its sampling interval."""
    if n < 2:
        raise NoSolutionError("n must be at least 2")
    Lambda, c = float(Lambda), float(c)
    m = Lambda / (n - 1)
    if Lambda > 0:
        if not c < 0:
            raise NoSolutionError("Lambda > 0 needs c < 0")
        mu = math.sqrt(m)
        A = math.sqrt(-c) / mu
        I = (T_LOW_MARGIN / mu, (math.pi - T_LOW_MARGIN) / mu)
        return OmegaSolution(Lambda, n, c, "sin", A, mu, 0.0, 0.0, I)
    if Lambda < 0:
        mu = math.sqrt(-m)
        if c < 0:
            return OmegaSolution(Lambda, n, c, "sinh", math.sqrt(-c) / mu, mu, 0.0, 0.0,
                                 (T_LOW_MARGIN, T_CAP))
        if c > 0:
            return OmegaSolution(Lambda, n, c, "cosh", math.sqrt(c) / mu, mu, 0.0, 0.0, (-T_CAP, T_CAP))
        return OmegaSolution(Lambda, n, c, "exp", 1.0, mu, 0.0, 0.0, (-T_CAP, T_CAP))
    if c > 0:
        raise NoSolutionError("Lambda = 0 needs c <= 0")
    if c == 0:
        return OmegaSolution(Lambda, n, c, "linear", 0.0, 0.0, 0.0, 1.0, (-T_CAP, T_CAP))
    return OmegaSolution(Lambda, n, c, "linear", math.sqrt(-c), 0.0, 0.0, 0.0, (T_LOW_MARGIN, T_CAP))


def closed_alpha_beta(sol: OmegaSolution, eps: int, t):
    """alpha and beta along an omega solution, from the first integral."""
    om = sol.omega(t)
    beta = (sol.c + eps) / (om * om)
    return -sol.Lambda / (sol.n - 1) - beta, beta


# -- bases -------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderBase:
    """A hypersurface of Q_eps^n with constant curvatures and the c it implies."""

    n: int
    eps: int
    chart: ChartImmersion = field(repr=False)
    curvatures: tuple
    c: float

    @property
    def H0(self) -> float:
        return math.fsum(v * m for v, m in self.curvatures)

    def sigma0_residuals(self) -> list:
        """lambda^2 - H0 lambda - (n-2)(c+eps) for every curvature class."""
        return [v * v - self.H0 * v - (self.n - 2) * (self.c + self.eps) for v, _ in self.curvatures]


def base_from_seed(chart: ChartImmersion, curvatures, eps: int, n: int) -> CylinderBase:
    """Derive c from the base quadratic; every class must give the same value."""
    check_eps(eps)
    curv = tuple((float(v), int(m)) for v, m in curvatures)
    H0 = math.fsum(v * m for v, m in curv)
    cs_ = [(v * v - H0 * v) / (n - 2) - eps for v, _ in curv]
    if max(cs_) - min(cs_) > 1e-12 * (1 + max(abs(x) for x in cs_)):
        raise MismatchError(f"curvature classes imply different c: {cs_}")
    return CylinderBase(n, eps, chart, curv, cs_[0])


@dataclass(frozen=True)
class CliffordBase(CylinderBase):
    k: int = 0
    c1: float = 0.0
    c2: float = 0.0

    @property
    def r1(self) -> float:
        return 1.0 / math.sqrt(self.c1)

    @property
    def r2(self) -> float:
        return 1.0 / math.sqrt(self.c2)

    @property
    def lambda0(self) -> float:
        return self.curvatures[0][0]

    @property
    def mu0(self) -> float:
        return self.curvatures[1][0]


def clifford_base(n: int, k: int) -> CliffordBase:
    """S^k(r1) x S^(n-1-k)(r2) in S^n with 1/r1^2 = (n-3)/(k-1), 1/r2^2 = (n-3)/(n-k-2)."""
    if n <= 3 or not 2 <= k <= n - 3:
        raise InvalidPartitionError(f"need n > 3 and 2 <= k <= n - 3 (got n={n}, k={k})")
    c1 = (n - 3) / (k - 1)
    c2 = (n - 3) / (n - k - 2)
    r1 = 1.0 / math.sqrt(c1)
    r2 = 1.0 / math.sqrt(c2)
    chart, _ = tube_seed(1, k, math.atan2(r1, r2), n)
    curv = ((r2 / r1, k), (-r1 / r2, n - 1 - k))
    gen = base_from_seed(chart, curv, 1, n)
    return CliffordBase(n, 1, chart, curv, gen.c, k=k, c1=c1, c2=c2)


def umbilic_base(eps: int, kind: str, param, n: int) -> CylinderBase:
    chart, lam = umbilic_seed(eps, kind, param, n)
    return base_from_seed(chart, ((lam, n - 1),), eps, n)


# -- cylinders ---------------------------------------------------------------

@dataclass(frozen=True)
class Cylinder:
    chart: ChartImmersion
    warp: WarpSpec
    solution: OmegaSolution
    base: CylinderBase

    def principal_data(self, t: float) -> PrincipalData:
        """theta = 0, T = d/dt with curvature 0, base curvatures scaled by 1/omega."""
        om = float(self.warp.w(t))
        a, b = alpha_beta_array(self.warp, float(t))
        lam = ((0.0, 1),) + tuple((v / om, m) for v, m in self.base.curvatures)
        return PrincipalData(self.base.n, lam, 1.0, 0.0, float(a), float(b))


def build_cylinder(sol: OmegaSolution, base: CylinderBase) -> Cylinder:
    """(t, v) -> (t, base(v)) in I x_omega Q_eps^n, normal along the base normal."""
    if sol.n != base.n or abs(sol.c - base.c) > 1e-12 * (1 + abs(base.c)):
        raise MismatchError(f"solution (n={sol.n}, c={sol.c}) does not match base (n={base.n}, c={base.c})")
    w = sol.warp(base.eps)
    bc = base.chart

    def embed(x):
        x = np.asarray(x, float)
        return np.concatenate([x[..., :1], bc.embed(x[..., 1:])], axis=-1)

    def normal(x):
        x = np.asarray(x, float)
        eta = bc.normal_ref(x[..., 1:])
        return np.concatenate([np.zeros(x.shape[:-1] + (1,)), eta], axis=-1)

    chart = ChartImmersion(base.n, (tuple(sol.interval),) + tuple(bc.box), "warped", base.eps,
                           embed=embed, normal_ref=normal,
                           meta={"kind": "cylinder", "Lambda": sol.Lambda, "c": sol.c})
    return Cylinder(chart, w, sol, base)


def default_lambda(n: int) -> float:
    return -float(n - 1)


def clifford_cylinder(n: int, k: int, Lambda: float | None = None) -> Cylinder:
    base = clifford_base(n, k)
    sol = solve_omega(default_lambda(n) if Lambda is None else Lambda, n, base.c)
    return build_cylinder(sol, base)


@dataclass(frozen=True)
class CylinderVerification:
    einstein: CurvatureReport
    spread: CurvatureReport

    @property
    def passed(self) -> bool:
        return self.einstein.passed and self.spread.passed


def verify_cylinder_einstein(cyl: Cylinder, Lambda: float, tol: float = 1e-4, grid: int = 5,
                             spread_threshold: float = 1.0, h: float = 1e-3) -> CylinderVerification:
    """Oracle Einstein residual on a grid^n lattice plus the sectional spread."""
    U = cyl.chart.interior_grid(grid)
    data = riemann_ricci_sectional(cyl.chart, cyl.warp, U, h, tol=tol)
    ein = make_report("einstein", einstein_pointwise(data, Lambda), tol)
    return CylinderVerification(ein, spread_report(sectional_spread(data), spread_threshold))
