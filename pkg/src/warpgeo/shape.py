"""Pointwise algebra of a hypersurface in I x_omega Q_eps^n.

Everything is expressed through the principal curvatures, the tangent
part T of d/dt, the angle theta = <N, d/dt> and the ambient scalars alpha,
beta at the height of the point. H is always the unnormalized trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidFrameError, InvalidSpectrumError, NoVerticalSectionError

DISTINCT_RTOL = 1e-8


def distinct(a: float, b: float) -> bool:
    return abs(a - b) > DISTINCT_RTOL * (1.0 + abs(a) + abs(b))


def count_distinct(values) -> int:
    """Number of distinct values under the relative tolerance."""
    vals = sorted(float(v) for v in np.ravel(values))
    if not vals:
        return 0
    count, rep = 1, vals[0]
    for v in vals[1:]:
        if distinct(v, rep):
            count += 1
            rep = v
    return count


@dataclass(frozen=True)
class PrincipalData:
    """Principal curvatures with multiplicities plus the height data.

    When ||T|| > 0 the first entry of ``lambdas`` is the curvature in the
    direction of T and has multiplicity one.
    """

    n: int
    lambdas: tuple
    T_norm: float
    theta: float
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        lam = tuple((float(v), int(m)) for v, m in self.lambdas)
        object.__setattr__(self, "lambdas", lam)
        if any(m < 1 for _, m in lam):
            raise InvalidSpectrumError("multiplicities must be positive")
        if sum(m for _, m in lam) != self.n:
            raise InvalidSpectrumError(
                f"multiplicities sum to {sum(m for _, m in lam)}, expected n={self.n}")
        if not 0.0 <= self.T_norm <= 1.0 + 1e-12:
            raise InvalidSpectrumError("||T|| must lie in [0, 1]")
        if abs(self.theta ** 2 + self.T_norm ** 2 - 1.0) > 1e-10:
            raise InvalidSpectrumError("theta^2 + ||T||^2 must equal 1")

    @property
    def H(self) -> float:
        return math.fsum(v * m for v, m in self.lambdas)

    def spectrum(self) -> np.ndarray:
        """Expanded list of principal curvatures, T direction first."""
        return np.array([v for v, m in self.lambdas for _ in range(m)])


@dataclass(frozen=True)
class EinsteinResiduals:
    r1: float
    r_rest: tuple
    sigma: float

    def max_abs(self) -> float:
        return max([abs(self.r1)] + [abs(r) for r in self.r_rest])


def sigma(Lambda: float, alpha: float, beta: float, T_norm: float, n: int) -> float:
    return Lambda + (n - 1) * alpha + T_norm * T_norm * beta


def einstein_residuals(pd: PrincipalData, Lambda: float) -> EinsteinResiduals:
    """Residuals of the Einstein system Ric = Lambda g in principal terms."""
    if pd.T_norm > 0 and pd.lambdas[0][1] != 1:
        raise InvalidSpectrumError("the T-direction curvature must be simple when ||T|| > 0")
    n, H, a, b, T2 = pd.n, pd.H, pd.alpha, pd.beta, pd.T_norm ** 2
    l1 = pd.lambdas[0][0]
    r1 = l1 * l1 - H * l1 + (n - 1) * (b * T2 + a) + Lambda
    rest = tuple(l * l - H * l + b * T2 + (n - 1) * a + Lambda for l, _ in pd.lambdas[1:])
    return EinsteinResiduals(r1, rest, sigma(Lambda, a, b, pd.T_norm, n))


def ricci_offdiag(pd: PrincipalData, Ti: float, Tj: float) -> float:
    """Ric(X_i, X_j), i != j, in a principal frame; T_i = <X_i, T>."""
    return (2 - pd.n) * pd.beta * Ti * Tj


def ricci_offdiag_matrix(pd: PrincipalData, T_components) -> np.ndarray:
    """All off-diagonal Ricci entries for T given in the expanded principal frame."""
    T = np.asarray(T_components, float)
    M = (2 - pd.n) * pd.beta * np.outer(T, T)
    np.fill_diagonal(M, 0.0)
    return M


# -- vertical sections -------------------------------------------------------

def vertical_section(pd: PrincipalData, w, t: float) -> list:
    """Principal curvatures of the slice section, one per non-T entry."""
    if pd.T_norm == 0:
        raise NoVerticalSectionError("||T|| = 0: the hypersurface is tangent to the slice")
    om, dom = float(w.w(t)), float(w.dw(t))
    return [-(om * lam + dom * pd.theta) / pd.T_norm for lam, _ in pd.lambdas[1:]]


def from_vertical_section(section, T_norm: float, theta: float, w, t: float) -> list:
    """Inverse of :func:`vertical_section`."""
    om, dom = float(w.w(t)), float(w.dw(t))
    return [-(T_norm * lt + dom * theta) / om for lt in section]


# -- sectional curvature -----------------------------------------------------

def gauss_sectional(pd: PrincipalData, i: int, j: int) -> float:
    """Intrinsic K on the plane of principal directions i != j (expanded index).

    Index 0 is the T direction (when ||T|| > 0).
    """
    lam = pd.spectrum()
    if i == j:
        raise InvalidFrameError("a plane needs two distinct principal directions")
    K = lam[i] * lam[j] - pd.alpha
    if pd.T_norm > 0 and 0 in (i, j):
        K -= pd.beta * pd.T_norm ** 2
    return float(K)


def gauss_sectional_frame(A, X, Y, T, alpha: float, beta: float) -> float:
    """K(X, Y) from the Gauss equation in an orthonormal tangent frame.

    A is the shape operator matrix, X, Y orthonormal vectors and T the
    tangent part of d/dt, all in frame components.
    """
    A = np.asarray(A, float)
    X, Y, T = (np.asarray(v, float) for v in (X, Y, T))
    if abs(X @ X - 1) > 1e-9 or abs(Y @ Y - 1) > 1e-9 or abs(X @ Y) > 1e-9:
        raise InvalidFrameError("X, Y must be orthonormal")
    xt, yt = X @ T, Y @ T
    return float(-alpha - beta * (xt * xt + yt * yt)
                 + (X @ A @ X) * (Y @ A @ Y) - (X @ A @ Y) ** 2)


# -- constant-beta trichotomy -----------------------------------------------

class Theorem3Case(Enum):
    UMBILICAL_TRIVIAL = "UmbilicalTrivial"
    RANK_ONE_TRIVIAL = "RankOneTrivial"
    TWO_CURVATURE_NONTRIVIAL = "TwoCurvatureNontrivial"


@dataclass(frozen=True)
class Theorem3Result:
    case: Theorem3Case
    sigma: float
    lam: float | None = None
    roots: tuple | None = None
    K: float | None = None


def classify_theorem3(Lambda: float, alpha: float, n: int, H: float = 0.0) -> Theorem3Result:
    """Case split for Einstein hypersurfaces where beta vanishes.

    sigma = Lambda + (n-1) alpha. Positive sigma: totally umbilical with
    lambda^2 = sigma / (n-1). Zero: rank at most one, K = -alpha. Negative:
    two curvatures, the roots of s^2 - H s + sigma.
    """
    s = Lambda + (n - 1) * alpha
    if s > 0:
        lam = math.sqrt(s / (n - 1))
        return Theorem3Result(Theorem3Case.UMBILICAL_TRIVIAL, s, lam=lam, K=lam * lam - alpha)
    if s == 0:
        return Theorem3Result(Theorem3Case.RANK_ONE_TRIVIAL, s, lam=0.0, K=-alpha)
    disc = math.sqrt(H * H - 4 * s)
    hi = 0.5 * (H + disc)
    # the product of the roots is sigma; dividing avoids cancellation
    lo = s / hi
    return Theorem3Result(Theorem3Case.TWO_CURVATURE_NONTRIVIAL, s, roots=(hi, lo))
