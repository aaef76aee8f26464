"""Rotational hypersurfaces of constant sectional curvature.

The profile curve (phi(s), xi(s)) must satisfy the unit-speed constraint
and omega(xi) f(phi) = psi(s). Eliminating xi = chi(psi / f(phi)) leaves
a first-order ODE, quadratic in y' = phi', which is integrated with RK4
on one root of the quadratic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ambient import WarpSpec, alpha_beta_array
from .chart import ChartImmersion
from .errors import (InconsistentSeedError, InvalidConfigurationError, NoSeedFoundError,
                     OutOfRangeError)
from .oracle import CurvatureReport, fmt, make_report
from .shape import PrincipalData
from .spaceform import horosphere_coords, hyperboloid_coords, sphere_box, sphere_coords

ROT_TYPES = ("spherical", "parabolic", "hyperbolic")
DELTA_MIN = 1e-10
F_MIN = 1e-8
RESIDUAL_MAX = 1e-8

# (f, eps, type) rows, in table order
F_TABLE = (
    ("cos x", 1, "spherical"),
    ("sinh x", -1, "spherical"),
    ("x", 0, "spherical"),
    ("x", -1, "parabolic"),
    ("cosh x", -1, "hyperbolic"),
)

# (psi, sign of c, admitted eps, type)
PSI_TABLE = (
    ("sin(sqrt(c) s)/sqrt(c)", "c>0", (0, 1, -1), "spherical"),
    ("s", "c=0", (0, 1, -1), "spherical"),
    ("sinh(sqrt(-c) s)/sqrt(-c)", "c<0", (0, -1), "spherical"),
    ("exp(sqrt(-c) s)", "c<0", (-1,), "parabolic"),
    ("1", "c=0", (-1,), "parabolic"),
    ("cosh(sqrt(-c) s)/sqrt(-c)", "c<0", (-1,), "hyperbolic"),
)

# fiber curvature of the du^2 factor
DELTA = {"spherical": 1.0, "parabolic": 0.0, "hyperbolic": -1.0}


def _sign_label(c: float) -> str:
    return "c>0" if c > 0 else ("c=0" if c == 0 else "c<0")


def admitted(eps: int, rot_type: str, c: float) -> bool:
    return any(r[1] == _sign_label(c) and eps in r[2] and r[3] == rot_type for r in PSI_TABLE)


@dataclass(frozen=True)
class RotationalSpec:
    """Table row (eps, rot_type, c) together with the ambient warp.

    The warp supplies chi, the inverse of omega, and its derivative.
    """

    eps: int
    rot_type: str
    c: float
    w: WarpSpec

    def __post_init__(self):
        if self.rot_type not in ROT_TYPES:
            raise InvalidConfigurationError(f"unknown rotational type {self.rot_type!r}")
        object.__setattr__(self, "c", float(self.c))
        if self.w.eps != self.eps:
            raise InvalidConfigurationError("warp and rotational spec disagree on eps")
        if not admitted(self.eps, self.rot_type, self.c):
            raise InvalidConfigurationError(
                f"no table row for eps={self.eps}, {self.rot_type}, {_sign_label(self.c)}")

    @property
    def parabolic(self) -> bool:
        return self.rot_type == "parabolic"

    @property
    def case(self) -> int:
        if self.rot_type == "parabolic":
            return 4
        if self.rot_type == "hyperbolic":
            return 5
        return {-1: 1, 0: 2, 1: 3}[self.eps]

    # profile function f by type
    def f(self, x):
        if self.rot_type == "hyperbolic":
            return np.cosh(x)
        if self.eps == 1:
            return np.cos(x)
        if self.eps == -1 and self.rot_type == "spherical":
            return np.sinh(x)
        return x

    def df(self, x):
        if self.rot_type == "hyperbolic":
            return np.sinh(x)
        if self.eps == 1:
            return -np.sin(x)
        if self.eps == -1 and self.rot_type == "spherical":
            return np.cosh(x)
        return np.ones_like(x)

    # warping function psi, with two derivatives
    def psi(self, s, k: int = 0):
        c = self.c
        s = np.asarray(s, float)
        if self.rot_type == "parabolic":
            if c == 0:
                return np.ones_like(s) if k == 0 else np.zeros_like(s)
            r = math.sqrt(-c)
            return r ** k * np.exp(r * s)
        if self.rot_type == "hyperbolic":
            r = math.sqrt(-c)
            return (np.cosh(r * s) if k % 2 == 0 else np.sinh(r * s)) * r ** (k - 1)
        if c > 0:
            r = math.sqrt(c)
            return [np.sin(r * s) / r, np.cos(r * s), -r * np.sin(r * s)][k]
        if c == 0:
            return [s, np.ones_like(s), np.zeros_like(s)][k]
        r = math.sqrt(-c)
        return [np.sinh(r * s) / r, np.cosh(r * s), r * np.sinh(r * s)][k]


class Coefficients(NamedTuple):
    a2: float
    a1: float
    a0: float

    @property
    def delta(self) -> float:
        return self.a1 * self.a1 - 4.0 * self.a2 * self.a0


def _in_image(w: WarpSpec, u) -> bool:
    lo, hi = w.image()
    u = np.asarray(u)
    return bool(np.all(np.isfinite(u) & (u > lo) & (u < hi)))


def _coeffs(spec: RotationalSpec, s, y):
    fy = spec.f(y)
    psi, dpsi = spec.psi(s), spec.psi(s, 1)
    u = psi / fy
    k = spec.w.dchi(u) ** 2
    if spec.parabolic:
        y2 = y * y
        a2 = k * psi * psi / (y2 * y2) + psi * psi / (y2 * y2)
        a1 = -2.0 * k * dpsi * psi / (y2 * y)
        a0 = k * dpsi * dpsi / y2 - 1.0
    else:
        dfy = spec.df(y)
        a2 = k * psi * psi * dfy * dfy / fy ** 4 + psi * psi / (fy * fy)
        a1 = -2.0 * k * dpsi * psi * dfy / fy ** 3
        a0 = k * dpsi * dpsi / (fy * fy) - 1.0
    return a2, a1, a0, u


def ode_coefficients(spec: RotationalSpec, s: float, y: float) -> Coefficients:
    """Coefficients of a2 y'^2 + a1 y' + a0 = 0 at (s, y)."""
    fy = float(spec.f(y))
    if abs(fy) < F_MIN:
        raise OutOfRangeError(f"f(y) vanishes at y={y!r}")
    u = float(spec.psi(s)) / fy
    if not _in_image(spec.w, u):
        raise OutOfRangeError(f"u = psi/f(y) = {u!r} is outside omega(I) = {spec.w.image()}")
    a2, a1, a0, _ = _coeffs(spec, float(s), float(y))
    return Coefficients(float(a2), float(a1), float(a0))


def slopes(spec: RotationalSpec, s: float, y: float) -> tuple:
    """Both roots (plus, minus) of the quadratic in y'."""
    a2, a1, a0 = ode_coefficients(spec, s, y)
    d = a1 * a1 - 4 * a2 * a0
    if d <= 0:
        raise OutOfRangeError(f"discriminant {d!r} is not positive")
    r = math.sqrt(d)
    return ((-a1 + r) / (2 * a2), (-a1 - r) / (2 * a2))


# -- seeds -------------------------------------------------------------------

S_CANDIDATES = tuple(2.0 ** -k for k in range(1, 21))
Y_CANDIDATES = tuple(2.0 ** k for k in range(0, 21))


def _seed_ok(spec, s0, y0) -> bool:
    try:
        co = ode_coefficients(spec, s0, y0)
    except OutOfRangeError:
        return False
    return co.a2 > 0 and co.delta > 0


def seed_point(spec: RotationalSpec, w: WarpSpec | None = None) -> tuple:
    """(s0, y0) with positive discriminant, following the case recipes."""
    if w is not None and w is not spec.w and w != spec.w:
        raise InvalidConfigurationError("seed_point warp differs from the spec's warp")
    c = spec.c
    case = spec.case
    if case in (4, 5):
        ss = (0.0,)
        ys = [y for y in Y_CANDIDATES if case == 5 or c == 0 or y > -c]
        grid = ((0.0, y) for y in ys)
    elif case == 3:
        rc = math.sqrt(c) if c > 0 else 1.0
        ss = S_CANDIDATES
        # y0 < sqrt(c) s0, both small
        grid = ((s, rc * s / 2.0 ** j) for s in ss for j in range(1, 21))
        ys = ("sqrt(c) s0 / 2^j, j = 1..20",)
    else:
        ss = S_CANDIDATES
        ys = Y_CANDIDATES
        need_sinh = spec.eps == -1
        grid = ((s, y) for s in ss for y in ys if not need_sinh or math.sinh(y) > 1)
    for s0, y0 in grid:
        if _seed_ok(spec, s0, y0):
            return (s0, y0)
    raise NoSeedFoundError(
        f"no seed with positive discriminant for case {case} "
        f"(s0 in {ss[0]}..{ss[-1]}, y0 candidates {ys[0]}..{ys[-1]})", ss, ys)


# -- integration -------------------------------------------------------------

def _slope_near(spec, s, y, ref):
    """Root of the quadratic nearest ``ref``; None when out of domain."""
    fy = spec.f(y)
    if not math.isfinite(y) or abs(fy) < F_MIN:
        return None
    u = spec.psi(s) / fy
    if not _in_image(spec.w, u):
        return None
    a2, a1, a0, _ = _coeffs(spec, s, y)
    d = a1 * a1 - 4 * a2 * a0
    if not d > DELTA_MIN or a2 <= 0:
        return None
    r = math.sqrt(d)
    p, m = (-a1 + r) / (2 * a2), (-a1 - r) / (2 * a2)
    return float(p if abs(p - ref) <= abs(m - ref) else m)


def _rk4(spec, s, y, h, ref):
    k1 = _slope_near(spec, s, y, ref)
    if k1 is None:
        return None
    k2 = _slope_near(spec, s + h / 2, y + h * k1 / 2, k1)
    if k2 is None:
        return None
    k3 = _slope_near(spec, s + h / 2, y + h * k2 / 2, k2)
    if k3 is None:
        return None
    k4 = _slope_near(spec, s + h, y + h * k3, k3)
    if k4 is None:
        return None
    return y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0


@dataclass(frozen=True)
class ProfileCurve:
    """Samples (s, phi, xi, phi', xi') of an integrated profile curve."""

    samples: np.ndarray
    spec: RotationalSpec
    branch: str
    step: float
    stop_reason: str = "span"

    @property
    def s(self):
        return self.samples[:, 0]

    @property
    def phi(self):
        return self.samples[:, 1]

    @property
    def xi(self):
        return self.samples[:, 2]

    @property
    def span(self) -> float:
        return float(abs(self.s[-1] - self.s[0]))

    def unit_speed_residual(self) -> np.ndarray:
        _, phi, xi, dphi, dxi = self.samples.T
        om = self.spec.w.w(xi)
        v = om * dphi / phi if self.spec.parabolic else om * dphi
        return np.abs(dxi * dxi + v * v - 1.0)

    def warp_residual(self) -> np.ndarray:
        s, phi, xi = self.samples[:, 0], self.samples[:, 1], self.samples[:, 2]
        return np.abs(self.spec.w.w(xi) * self.spec.f(phi) - self.spec.psi(s))

    def discriminant(self) -> np.ndarray:
        return np.array([ode_coefficients(self.spec, s, y).delta for s, y in self.samples[:, :2]])

    def to_csv(self) -> str:
        lines = ["s,phi,xi,phi_prime,xi_prime"]
        lines += [",".join(fmt(x) for x in row) for row in self.samples]
        return "\n".join(lines) + "\n"

    def evaluate(self, s):
        """(phi, xi, phi', xi') at arbitrary s via one RK4 step from the nearest sample."""
        s = np.asarray(s, float)
        flat = s.ravel()
        out = np.empty((flat.size, 4))
        S = self.s
        idx = np.clip(np.rint((flat - S[0]) / (S[1] - S[0])).astype(int), 0, len(S) - 1)
        for n, (x, k) in enumerate(zip(flat, idx)):
            s0, y0, dy0 = S[k], self.samples[k, 1], self.samples[k, 3]
            h = x - s0
            y = y0 if h == 0 else _rk4(self.spec, s0, y0, h, dy0)
            if y is None:
                raise OutOfRangeError(f"cannot evaluate the profile at s={x!r}")
            out[n] = _state(self.spec, x, y, _slope_near(self.spec, x, y, dy0))
        return out.reshape(s.shape + (4,))


def _state(spec, s, y, dy):
    """(phi, xi, phi', xi') from the sample value and slope."""
    fy, dfy = spec.f(y), spec.df(y)
    psi, dpsi = spec.psi(s), spec.psi(s, 1)
    u = psi / fy
    xi = float(spec.w.chi(u))
    dxi = float(spec.w.dchi(u)) * (dpsi / fy - psi * dfy * dy / (fy * fy))
    return (y, xi, dy, dxi)


def integrate_profile(spec: RotationalSpec, w: WarpSpec | None = None, seed=None, step: float = 1e-3,
                      span: float = 0.5, branch: str = "plus", max_halvings: int = 6) -> ProfileCurve:
    """Fixed-step RK4 from the seed, stopping early when the ODE degenerates.

    Each step is compared against two half steps; if they disagree by more
    than 1e-8 the whole integration restarts with half the step.
    """
    if branch not in ("plus", "minus"):
        raise InvalidConfigurationError("branch must be 'plus' or 'minus'")
    s0, y0 = seed_point(spec) if seed is None else (float(seed[0]), float(seed[1]))
    try:
        roots = slopes(spec, s0, y0)
    except OutOfRangeError as exc:
        raise InconsistentSeedError(f"seed ({s0}, {y0}) is not admissible: {exc}") from exc
    dy0 = roots[0] if branch == "plus" else roots[1]
    h = abs(step) * (1 if span >= 0 else -1)
    for _ in range(max_halvings + 1):
        curve = _march(spec, s0, y0, dy0, h, span, branch)
        if curve is not None:
            break
        h /= 2
    else:
        raise InconsistentSeedError("step-doubling error stays above 1e-8 after halving")
    if curve.samples.shape[0] and max(curve.unit_speed_residual()[0], curve.warp_residual()[0]) > RESIDUAL_MAX:
        raise InconsistentSeedError("constraints fail at the seed")
    return curve


def _march(spec, s0, y0, dy0, h, span, branch):
    nsteps = int(round(abs(span / h)))
    rows = [(s0,) + _state(spec, s0, y0, dy0)]
    reason = "span"
    s, y, dy = s0, y0, dy0
    for i in range(nsteps):
        full = _rk4(spec, s, y, h, dy)
        half = _rk4(spec, s, y, h / 2, dy)
        mid_dy = None if half is None else _slope_near(spec, s + h / 2, half, dy)
        two = None if mid_dy is None else _rk4(spec, s + h / 2, half, h / 2, mid_dy)
        if full is None or two is None:
            reason = "degenerate"
            break
        if abs(full - two) > RESIDUAL_MAX * (1 + abs(two)):
            return None
        s_new = s0 + (i + 1) * h
        dy_new = _slope_near(spec, s_new, two, dy)
        if dy_new is None:
            reason = "degenerate"
            break
        s, y, dy = s_new, two, dy_new
        rows.append((s,) + _state(spec, s, y, dy))
    return ProfileCurve(np.array(rows), spec, branch, abs(h), reason)


# -- intrinsic verification --------------------------------------------------

def csc_verify(curve: ProfileCurve, tol: float = 1e-6) -> CurvatureReport:
    """Curvature of ds^2 + psi^2 du^2 with psi rebuilt from the samples."""
    spec = curve.spec
    s, phi, xi = curve.s, curve.phi, curve.xi
    psi = spec.w.w(xi) * spec.f(phi)
    h = np.diff(s)
    if len(s) < 5 or np.ptp(h) > 1e-9 * abs(h[0]):
        raise InvalidConfigurationError("csc_verify needs at least 5 uniformly spaced samples")
    h = h[0]
    # five-point stencils
    m2, m1, p1, p2, p = psi[:-4], psi[1:-3], psi[3:-1], psi[4:], psi[2:-2]
    d1 = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * h)
    d2 = (-m2 + 16 * m1 - 30 * p + 16 * p1 - p2) / (12 * h * h)
    radial = np.abs(-d2 / p - spec.c)
    tangential = np.abs((DELTA[spec.rot_type] - d1 * d1) / (p * p) - spec.c)
    return make_report("csc", np.maximum(radial, tangential), tol)


# -- immersion and closed-form principal data --------------------------------

def _radial(spec):
    """Fiber point P(phi, u), unit radial direction d/dr, and lambda_r(phi)."""
    eps, typ = spec.eps, spec.rot_type

    if typ == "parabolic":
        def P(phi, u):
            p, inward = horosphere_coords(np.log(phi), u)
            return p, -inward
        return P, lambda phi: -np.ones_like(phi)
    if typ == "hyperbolic":
        def P(phi, u):
            q = hyperboloid_coords(u)
            ch, sh = np.cosh(phi)[..., None], np.sinh(phi)[..., None]
            p = np.concatenate([ch * q, sh], axis=-1)
            d = np.concatenate([sh * q, ch], axis=-1)
            return p, d
        return P, lambda phi: -np.tanh(phi)
    if eps == 0:
        def P(phi, u):
            S = sphere_coords(u)
            return phi[..., None] * S, S
        return P, lambda phi: -1.0 / phi
    if eps == 1:
        def P(phi, u):
            S = sphere_coords(u)
            sn, cs_ = np.sin(phi)[..., None], np.cos(phi)[..., None]
            return (np.concatenate([sn, cs_ * S], axis=-1),
                    np.concatenate([cs_, -sn * S], axis=-1))
        return P, lambda phi: np.tan(phi)

    def P(phi, u):
        S = sphere_coords(u)
        ch, sh = np.cosh(phi)[..., None], np.sinh(phi)[..., None]
        return (np.concatenate([ch, sh * S], axis=-1), np.concatenate([sh, ch * S], axis=-1))
    return P, lambda phi: -1.0 / np.tanh(phi)


def _r_prime(spec, phi, dphi):
    return dphi / phi if spec.parabolic else dphi


def rotational_chart(curve: ProfileCurve, n: int, margin: float = 0.01) -> ChartImmersion:
    """(s, u) -> (xi(s), P(phi(s), u)) in I x_omega Q_eps^n."""
    spec = curve.spec
    P, _ = _radial(spec)
    m = n - 1
    fbox = sphere_box(m) if spec.rot_type == "spherical" else tuple([(-1.0, 1.0)] * m)
    lo, hi = sorted((float(curve.s[0]), float(curve.s[-1])))
    box = ((lo + margin, hi - margin),) + fbox

    def embed(x):
        x = np.asarray(x, float)
        st = curve.evaluate(x[..., 0])
        p, _ = P(st[..., 0], x[..., 1:])
        return np.concatenate([st[..., 1:2], p], axis=-1)

    def normal(x):
        x = np.asarray(x, float)
        st = curve.evaluate(x[..., 0])
        phi, xi, dphi, dxi = (st[..., k] for k in range(4))
        _, d = P(phi, x[..., 1:])
        om = spec.w.w(xi)
        a = om * _r_prime(spec, phi, dphi)
        return np.concatenate([a[..., None], (-dxi / om)[..., None] * d], axis=-1)

    return ChartImmersion(n, box, "warped", spec.eps, embed=embed, normal_ref=normal,
                          meta={"kind": "rotational", "type": spec.rot_type, "c": spec.c})


def principal_data(curve: ProfileCurve, s: float, n: int, h: float = 1e-4) -> PrincipalData:
    """Closed-form principal curvatures at parameter s (profile direction first)."""
    spec = curve.spec
    w = spec.w
    st = curve.evaluate(s + h * np.arange(-2.0, 3.0))
    phi, xi, dphi, dxi = st[2]
    r1 = _r_prime(spec, st[:, 0], st[:, 2])
    stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
    ddxi = float(stencil @ st[:, 3])
    ddr = float(stencil @ r1)
    dr = r1[2]
    om, dom = float(w.w(xi)), float(w.dw(xi))
    _, lam_r = _radial(spec)
    lr = float(lam_r(np.array(phi)))
    lam_i = -dxi * lr / om - dom * dr
    lam_1 = om * dr * ddxi - om * om * dom * dr ** 3 - om * dxi * ddr - 2 * dom * dxi * dxi * dr
    a, b = alpha_beta_array(w, xi)
    theta = om * dr
    T = abs(dxi)
    # unit speed holds to ~1e-12; renormalize so the invariant is exact
    nrm = math.hypot(theta, T)
    return PrincipalData(n, ((lam_1, 1), (lam_i, n - 1)), T / nrm, theta / nrm, float(a), float(b))
