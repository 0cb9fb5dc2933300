"""Shared domain types: spectral index sequences, radial potentials on the ball
and the half-line, the change of variables between them, and the explicitly
solvable (Bargmann) closed forms used as oracles by every other module.

Conventions. The unit ball with a radial potential q(r) maps to the half-line
via x = -log r, Q(x) = e^{-2x} q(e^{-x}); spherical harmonics of degree k see
the radial operator -d^2/dx^2 + Q at spectral parameter -kappa_k^2 with
kappa_k = k + (d-2)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .quadrature import cubic_interp, l2_norm, simpson_weights

_MOD = "radial_model"


@dataclass(frozen=True)
class SpectralParams:
    """Index sequences attached to a dimension d and shift parameter delta.

    kappa[k] = k + (d-2)/2        spectral evaluation points
    lam[k]   = 2k + d - 3 + delta exponent lattice (spacing 2)
    mu[k]    = lam[k] + delta     decay rates of the perturbation series
    n_neg    = #{k : mu[k] < 0}   number of injected bound states
    m0       = max(2, 4(d-3+delta)+1)
    """

    d: int
    delta: float
    kappa: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    n_neg: int
    m0: float

    @property
    def K(self) -> int:
        return self.kappa.size - 1

    def mu_at(self, k) -> np.ndarray:
        """mu_k from the defining formula, valid beyond the stored range."""
        return 2.0 * np.asarray(k, dtype=float) + self.d - 3 + 2.0 * self.delta

    def lam_at(self, k) -> np.ndarray:
        return 2.0 * np.asarray(k, dtype=float) + self.d - 3 + self.delta


def make_spectral_params(d: int, delta: float, K: int) -> SpectralParams:
    if d < 3:
        raise ValidationError(f"dimension must satisfy d >= 3, got d={d}", _MOD)
    if delta < 3 - d:
        raise ValidationError(
            f"delta must satisfy delta >= 3 - d = {3 - d}, got delta={delta}", _MOD
        )
    if K < 1:
        raise ValidationError(f"truncation index must satisfy K >= 1, got K={K}", _MOD)
    k = np.arange(K + 1, dtype=float)
    kappa = k + (d - 2) / 2.0
    lam = 2.0 * k + d - 3 + delta
    mu = lam + delta
    n_neg = int(np.count_nonzero(mu < 0))
    m0 = max(2.0, 4.0 * (d - 3 + delta) + 1.0)
    return SpectralParams(d=d, delta=float(delta), kappa=kappa, lam=lam, mu=mu,
                          n_neg=n_neg, m0=m0)


# ---------------------------------------------------------------------------
# Closed-form families. Each object knows its potential, its amplitude, the
# Laplace transform of the amplitude, the running integral p used by the
# reconstruction module, its Jost boundary value and the spectral density it
# induces. Keeping all of these on one object lets every module bypass
# interpolation for the exactly solvable cases.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroForm:
    """The trivial potential Q = 0, amplitude A = 0."""

    kind = "zero"
    kappa_min = 0.0  # Laplace transform converges for any kappa > 0

    def potential(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def amplitude(self, alpha):
        return np.zeros_like(np.asarray(alpha, dtype=float))

    def laplace(self, kappa: float) -> float:
        return 0.0

    def p_accum(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def jost0(self, kappa: float) -> float:
        return 1.0

    def density_ratio_minus_one(self, E):
        """1/|psi(0, sqrt(E))|^2 - 1 for E > 0."""
        return np.zeros_like(np.asarray(E, dtype=float))

    def nu_mass(self, k: float, L: float) -> float:
        """Mass on [k-L, k+L] of the measure with density Im M(k^2+i0) - k."""
        return 0.0


@dataclass(frozen=True)
class Bargmann1:
    """One-parameter well with a single real resonance at kappa = -gamma.

    Amplitude 2(gamma^2 - beta^2) e^{-2 gamma alpha} with 0 <= gamma < beta;
    the potential and the Jost boundary value (kappa+gamma)/(kappa+beta) are
    rational in closed form.
    """

    beta: float
    gamma: float
    kind = "bargmann1"

    def __post_init__(self):
        if not (self.beta > 0 and 0 <= self.gamma < self.beta):
            raise ValidationError(
                f"bargmann1 needs beta > 0 and 0 <= gamma < beta, "
                f"got beta={self.beta}, gamma={self.gamma}", _MOD)

    @property
    def kappa_min(self) -> float:
        return 0.0  # amplitude decays, Laplace converges for kappa > -gamma

    def _tau(self) -> float:
        return (self.beta - self.gamma) / (self.beta + self.gamma)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        tau = self._tau()
        e = np.exp(-2.0 * self.beta * x)
        return -8.0 * self.beta**2 * tau * e / (1.0 + tau * e) ** 2

    def amplitude(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return 2.0 * (self.gamma**2 - self.beta**2) * np.exp(-2.0 * self.gamma * alpha)

    def laplace(self, kappa: float) -> float:
        return (self.gamma**2 - self.beta**2) / (kappa + self.gamma)

    def p_accum(self, t):
        t = np.asarray(t, dtype=float)
        g = self.gamma
        if g == 0.0:
            return (self.beta**2 / 2.0) * t
        return -(g**2 - self.beta**2) * (-np.expm1(-g * t)) / (2.0 * g)

    def jost0(self, kappa: float) -> float:
        if abs(kappa + self.beta) < 1e-300:
            raise ValidationError(f"Jost value has a pole at kappa = {-self.beta}", _MOD)
        return (kappa + self.gamma) / (kappa + self.beta)

    def density_ratio_minus_one(self, E):
        E = np.asarray(E, dtype=float)
        return (self.beta**2 - self.gamma**2) / (E + self.gamma**2)

    def nu_mass(self, k: float, L: float) -> float:
        a, b = k - L, k + L
        c = self.beta**2 - self.gamma**2
        return 0.5 * c * math.log((b**2 + self.gamma**2) / (a**2 + self.gamma**2))


@dataclass(frozen=True)
class Bargmann2:
    """Reflectionless well with one bound state at -kappa1^2.

    Amplitude -(2 c1/kappa1) sinh(2 kappa1 alpha); potential
    -2 (log F)'' with F(x) = 1 + (c1/kappa1^2) int_0^x sinh^2(kappa1 y) dy;
    Jost boundary value (kappa - kappa1)/(kappa + kappa1).
    """

    c1: float
    kappa1: float
    kind = "bargmann2"

    def __post_init__(self):
        if not (self.c1 > 0 and self.kappa1 > 0):
            raise ValidationError(
                f"bargmann2 needs c1 > 0 and kappa1 > 0, got c1={self.c1}, "
                f"kappa1={self.kappa1}", _MOD)

    @property
    def kappa_min(self) -> float:
        return self.kappa1  # amplitude grows like e^{2 kappa1 alpha}

    def _F(self, x):
        k1 = self.kappa1
        return 1.0 + (self.c1 / k1**2) * (np.sinh(2.0 * k1 * x) / (4.0 * k1) - x / 2.0)

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        k1 = self.kappa1
        F = self._F(x)
        Fp = (self.c1 / k1**2) * np.sinh(k1 * x) ** 2
        Fpp = (self.c1 / k1) * np.sinh(2.0 * k1 * x)
        return -2.0 * (Fpp * F - Fp**2) / F**2

    def amplitude(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        return -(2.0 * self.c1 / self.kappa1) * np.sinh(2.0 * self.kappa1 * alpha)

    def laplace(self, kappa: float) -> float:
        if kappa <= self.kappa1:
            raise ValidationError(
                f"Laplace transform requires kappa > kappa1 = {self.kappa1}", _MOD)
        return -self.c1 / (kappa**2 - self.kappa1**2)

    def p_accum(self, t):
        t = np.asarray(t, dtype=float)
        return self.c1 * (np.cosh(self.kappa1 * t) - 1.0) / (2.0 * self.kappa1**2)

    def jost0(self, kappa: float) -> float:
        if abs(kappa + self.kappa1) < 1e-300:
            raise ValidationError(f"Jost value has a pole at kappa = {-self.kappa1}", _MOD)
        return (kappa - self.kappa1) / (kappa + self.kappa1)

    def density_ratio_minus_one(self, E):
        # |psi(0, k)|^2 = 1: reflectionless
        return np.zeros_like(np.asarray(E, dtype=float))

    def nu_mass(self, k: float, L: float) -> float:
        return 0.0


PotentialForm = ZeroForm | Bargmann1 | Bargmann2


# ---------------------------------------------------------------------------
# Sampled potentials.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialPotential:
    """Half-line potential Q on a sorted grid covering [0, X_max].

    When a closed form is attached, pointwise evaluation uses it exactly;
    otherwise values between nodes come from local cubic interpolation.
    """

    grid: np.ndarray
    values: np.ndarray
    closed_form: PotentialForm | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.size != v.size or g.size < 2:
            raise ValidationError("grid and values must be 1-d arrays of equal size >= 2", _MOD)
        if np.any(np.diff(g) <= 0):
            raise ValidationError("grid must be strictly increasing", _MOD)
        if not np.all(np.isfinite(v)):
            raise ValidationError("potential values must be finite", _MOD)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        if self.closed_form is not None:
            return self.closed_form.potential(x)
        return cubic_interp(self.grid, self.values, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class BallPotential:
    """Radial potential q on a grid of radii inside (0, 1]; norms against r^3 dr."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.size != v.size or g.size < 2:
            raise ValidationError("grid and values must be 1-d arrays of equal size >= 2", _MOD)
        if np.any(np.diff(g) <= 0) or g[0] <= 0 or g[-1] > 1 + 1e-12:
            raise ValidationError("ball grid must be strictly increasing inside (0, 1]", _MOD)
        if not np.all(np.isfinite(v)):
            raise ValidationError("potential values must be finite", _MOD)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __call__(self, r):
        return cubic_interp(self.grid, self.values, np.asarray(r, dtype=float))


@dataclass(frozen=True)
class SteklovSpectrum:
    """Leading Steklov eigenvalues sigma_0..sigma_K for a fixed dimension."""

    d: int
    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))

    @property
    def K(self) -> int:
        return self.sigma.size - 1


# ---------------------------------------------------------------------------
# Potential constructors and the ball <-> half-line change of variables.
# ---------------------------------------------------------------------------


def sample_potential(form: PotentialForm, x_max: float = 12.0, n: int = 512) -> RadialPotential:
    """Uniformly sample a closed-form potential on [0, x_max]."""
    xs = np.linspace(0.0, x_max, n + 1)
    return RadialPotential(grid=xs, values=form.potential(xs), closed_form=form)


def extend_potential(q: RadialPotential, form: PotentialForm, x_max: float) -> RadialPotential:
    """Extend grid samples beyond their domain with a closed form.

    The result keeps the original samples on their grid (same spacing) and
    appends closed-form values up to x_max; it carries no closed form itself,
    so evaluation interpolates the stitched table.
    """
    if x_max <= q.x_max:
        raise ValidationError("extension endpoint must exceed the sampled domain", _MOD)
    h = float(q.grid[1] - q.grid[0])
    extra = np.arange(q.x_max + h, x_max + h / 2, h)
    grid = np.concatenate([q.grid, extra])
    values = np.concatenate([q.values, form.potential(extra)])
    return RadialPotential(grid=grid, values=values, closed_form=None)


def ball_to_halfline(q: BallPotential) -> RadialPotential:
    """Map q(r) on the ball to Q(x) = e^{-2x} q(e^{-x}) on the half-line.

    Grid nodes map one to one (x = -log r), so the round trip with
    halfline_to_ball is exact on shared grids.
    """
    x = -np.log(q.grid[::-1])
    x[x == 0.0] = 0.0  # normalize -0.0 from r = 1
    vals = np.exp(-2.0 * x) * q.values[::-1]
    return RadialPotential(grid=x, values=vals, closed_form=None)


def halfline_to_ball(Q: RadialPotential) -> BallPotential:
    """Inverse of ball_to_halfline: q(r) = Q(-log r)/r^2 on r = e^{-x}."""
    r = np.exp(-Q.grid[::-1])
    vals = Q.values[::-1] / r**2
    return BallPotential(grid=r, values=vals)


def weighted_norm_equivalence(q: BallPotential, q_tilde: BallPotential, T: float,
                              n: int = 512) -> tuple[float, float]:
    """Return (||Q - Q~||_{L2(0,T)}, ||q - q~||_{L2((e^{-T},1), r^3 dr)}).

    The half-line norm integrates on a uniform x grid, the ball norm on a
    uniform r grid; the two quadratures are independent and agree up to
    discretization error by the change-of-variables isometry.
    """
    if T <= 0:
        raise ValidationError("norm horizon T must be positive", _MOD)
    if q.grid.size != q_tilde.grid.size or np.max(np.abs(q.grid - q_tilde.grid)) > 1e-12:
        raise ValidationError("ball potentials must share a grid", _MOD)
    dq = BallPotential(grid=q.grid, values=q.values - q_tilde.values)

    hx = T / n
    xs = np.linspace(0.0, T, n + 1)
    dQ = np.exp(-2.0 * xs) * dq(np.exp(-xs))
    half_norm = l2_norm(dQ, hx)

    r0 = math.exp(-T)
    hr = (1.0 - r0) / n
    rs = np.linspace(r0, 1.0, n + 1)
    integrand = dq(rs) ** 2 * rs**3
    ball_norm = float(np.sqrt(max(simpson_weights(n, hr) @ integrand, 0.0)))
    return half_norm, ball_norm
