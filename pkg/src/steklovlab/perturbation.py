"""Admissible amplitude perturbations and their spectral fingerprints.

A perturbed amplitude adds a series sum_k c_k e^{-mu_k alpha} to a base
amplitude, with c_k <= 0 and the generating power series converging on a disk
of radius R > 1. The induced change of the spectral measure is an explicit
nonnegative density on E > 0 plus finitely many point masses at -mu_k^2/4,
and the series injects real resonances at -|mu_k|/2. The ks_check_* routines
probe, numerically, the conditions under which such a measure still belongs
to a square-integrable potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .radial_model import Bargmann1, Bargmann2, PotentialForm, SpectralParams, ZeroForm

_MOD = "perturbation"

_TRUNC_REL = 1e-18   # relative cutoff when materializing generator tails
_MAX_TERMS = 5000


@dataclass(frozen=True)
class GeometricTail:
    """Coefficient generator c_k = -a * rho^{lam_k}; its radius is exactly 1/rho."""

    a: float
    rho: float

    def __post_init__(self):
        if not (self.a >= 0 and 0 < self.rho < 1):
            raise ValidationError(
                f"geometric tail needs a >= 0 and 0 < rho < 1, got a={self.a}, rho={self.rho}",
                _MOD)

    def coeff(self, lam_k: float) -> float:
        return -self.a * self.rho**lam_k


@dataclass(frozen=True)
class Amplitude:
    """Base amplitude plus a validated exponential-series perturbation.

    term_coeffs/term_mu hold the materialized series: explicit coefficients
    first, then generator terms down to a negligible size. All evaluation,
    Laplace transforms and measure differences run over these finite arrays.
    """

    base: PotentialForm
    coeffs: np.ndarray
    params: SpectralParams
    generator: GeometricTail | None = None
    r_est: float = math.inf
    term_coeffs: np.ndarray = field(default=None, repr=False)
    term_mu: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", c)
        if self.term_coeffs is None:
            tc, tm = _materialize_terms(c, self.generator, self.params)
            object.__setattr__(self, "term_coeffs", tc)
            object.__setattr__(self, "term_mu", tm)

    @property
    def n_neg_terms(self) -> int:
        return int(np.count_nonzero(self.term_mu < 0))

    def series_diff(self, alpha) -> np.ndarray:
        """The perturbation sum_k c_k e^{-mu_k alpha}, split into its bound-state
        (sinh) part and its resonance (decaying-exponential) part."""
        alpha = np.asarray(alpha, dtype=float)
        out = np.zeros_like(alpha)
        c, mu = self.term_coeffs, self.term_mu
        neg = mu < 0
        for ck, mk in zip(c[neg], mu[neg]):
            out += 2.0 * ck * np.sinh(abs(mk) * alpha)
        for ck, mk in zip(c, mu):
            out += ck * np.exp(-abs(mk) * alpha)
        return out

    def __call__(self, alpha) -> np.ndarray:
        return self.base.amplitude(alpha) + self.series_diff(alpha)


def _materialize_terms(coeffs: np.ndarray, generator: GeometricTail | None,
                       params: SpectralParams) -> tuple[np.ndarray, np.ndarray]:
    cs = list(coeffs)
    if generator is not None:
        scale = max(1.0, float(np.max(np.abs(coeffs))) if coeffs.size else 1.0, generator.a)
        k = len(cs)
        while k < _MAX_TERMS:
            ck = generator.coeff(float(params.lam_at(k)))
            if abs(ck) < _TRUNC_REL * scale:
                break
            cs.append(ck)
            k += 1
    c = np.asarray(cs, dtype=float)
    mu = params.mu_at(np.arange(c.size))
    keep = c != 0.0
    return c[keep], mu[keep]


def estimate_radius(coeffs, params: SpectralParams,
                    generator: GeometricTail | None = None) -> float:
    """Radius of convergence of sum_k c_k t^{lam_k}.

    Exact (1/rho) when a generator is present. For a stored list the limsup
    |c_k|^{1/lam_k} is estimated from successive-ratio samples over the
    nonzero tail; a clearly decaying ratio trend is reported as an infinite
    radius, matching e.g. factorially small coefficients. An all-zero list
    (or a single term) is a polynomial: radius infinity.
    """
    if generator is not None:
        return 1.0 / generator.rho
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    nz = np.nonzero(c)[0]
    if nz.size <= 1:
        return math.inf
    lam = params.lam_at(nz)
    # ratio estimates of limsup |c_k|^{1/lam_k} between consecutive nonzero terms
    ratios = np.abs(c[nz[1:]] / c[nz[:-1]]) ** (1.0 / (lam[1:] - lam[:-1]))
    tail = ratios[len(ratios) // 2:]
    log_tail = np.log(tail)
    spread = float(np.max(log_tail) - np.min(log_tail))
    if tail.size >= 2:
        drift = float(log_tail[-1] - log_tail[0])
        if drift < -max(0.2, spread / 2):  # ratios still falling: radius unbounded
            return math.inf
    return float(1.0 / np.exp(np.mean(log_tail)))


def build_perturbed_amplitude(base: PotentialForm, coeffs, params: SpectralParams,
                              generator: GeometricTail | None = None) -> Amplitude:
    """Validate and assemble an admissible perturbed amplitude.

    Rejects any positive coefficient, an estimated radius <= 1, and bound-state
    terms whose sinh growth would make the Laplace transform singular on (or
    divergent over) the kappa evaluation grid.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    bad = np.nonzero(c > 0)[0]
    if bad.size:
        raise ValidationError(
            f"coefficients must be <= 0; c[{bad[0]}] = {c[bad[0]]}", _MOD)
    r_est = estimate_radius(c, params, generator)
    if not r_est > 1.0:
        raise ValidationError(
            f"series radius of convergence must exceed 1, estimated R = {r_est}", _MOD)
    amp = Amplitude(base=base, coeffs=c, params=params, generator=generator, r_est=r_est)
    # pole guard: bound-state terms need 2 kappa > |mu_k| strictly on the grid
    mu_neg = amp.term_mu[amp.term_mu < 0]
    if mu_neg.size:
        margin = 2.0 * params.kappa[0] - float(np.max(np.abs(mu_neg)))
        if margin < 1e-8:
            raise ValidationError(
                "bound-state rate |mu_k| collides with the evaluation grid: "
                f"2*kappa_0 - max|mu_k| = {margin:.3e} < 1e-8", _MOD)
    return amp


def holder_exponent(R: float, params: SpectralParams) -> float:
    """Stability exponent theta = (1/2) min(1, log R / log(9 M0 / 2))."""
    if not R > 1.0:
        raise ValidationError(f"exponent defined only for R > 1, got R={R}", _MOD)
    if math.isinf(R):
        return 0.5
    return 0.5 * min(1.0, math.log(R) / math.log(4.5 * params.m0))


@dataclass(frozen=True)
class SpectralMeasureDiff:
    """Change of spectral measure induced by an admissible perturbation.

    density_diff(E) >= 0 on E > 0; point_masses lists (E_j, weight_j) for the
    injected bound states; resonances lists -|mu_k|/2 for every active term.
    """

    term_coeffs: np.ndarray
    term_mu: np.ndarray
    point_masses: tuple[tuple[float, float], ...]
    resonances: tuple[float, ...]

    def density_diff(self, E) -> np.ndarray:
        E = np.asarray(E, dtype=float)
        out = np.zeros_like(E)
        sqE = np.sqrt(E)
        for ck, mk in zip(self.term_coeffs, self.term_mu):
            out += -(2.0 / math.pi) * ck * sqE / (4.0 * E + mk**2)
        return out


def spectral_measure_diff(A: Amplitude) -> SpectralMeasureDiff:
    c, mu = A.term_coeffs, A.term_mu
    masses = tuple(
        (-(mk**2) / 4.0, -0.5 * ck * abs(mk)) for ck, mk in zip(c, mu) if mk < 0
    )
    resonances = tuple(-abs(mk) / 2.0 for mk in mu)
    return SpectralMeasureDiff(term_coeffs=c, term_mu=mu,
                               point_masses=masses, resonances=resonances)


# ---------------------------------------------------------------------------
# Killip-Simon style diagnostics. Only bases with a known spectral density are
# supported: the trivial base and the two closed-form wells.
# ---------------------------------------------------------------------------


def _require_known_base(A: Amplitude):
    if not isinstance(A.base, (ZeroForm, Bargmann1, Bargmann2)):
        raise ValidationError(
            "diagnostics need a base with a closed-form spectral density", _MOD)


def default_E_grid(lo: float = 1e-3, hi: float = 1e6, n: int = 1000) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


@dataclass(frozen=True)
class PositivityReport:
    min_density: float
    argmin_E: float
    passed: bool


def ks_check_positivity(A: Amplitude, E_grid: np.ndarray | None = None) -> PositivityReport:
    """Evaluate d rho~/dE on E > 0 and report its minimum (>= 0 when admissible)."""
    _require_known_base(A)
    E = default_E_grid() if E_grid is None else np.asarray(E_grid, dtype=float)
    base_density = np.sqrt(E) / math.pi * (1.0 + A.base.density_ratio_minus_one(E))
    dens = base_density + spectral_measure_diff(A).density_diff(E)
    i = int(np.argmin(dens))
    return PositivityReport(min_density=float(dens[i]), argmin_E=float(E[i]),
                            passed=bool(dens[i] >= 0.0))


def _ratio_minus_one(A: Amplitude, E: np.ndarray) -> np.ndarray:
    """d rho~/d rho_0 - 1, in a cancellation-free closed form."""
    out = np.asarray(A.base.density_ratio_minus_one(E), dtype=float).copy()
    for ck, mk in zip(A.term_coeffs, A.term_mu):
        out += -2.0 * ck / (4.0 * E + mk**2)
    return out


@dataclass(frozen=True)
class QuasiSzegoReport:
    exponent: float
    residual: float
    max_integrand: float


def ks_check_quasi_szego(A: Amplitude, E_grid: np.ndarray | None = None,
                         fit_range: tuple[float, float] = (1e2, 1e6)) -> QuasiSzegoReport:
    """Fit the large-E decay of log[(1/4) u + 1/2 + (1/4)/u], u = d rho~/d rho_0.

    The bracket equals 1 + (u-1)^2/(4u), so the log term is computed as
    log1p((u-1)^2/(4u)) with u-1 in closed form; its decay exponent should
    approach -2.
    """
    _require_known_base(A)
    E = default_E_grid() if E_grid is None else np.asarray(E_grid, dtype=float)
    um1 = _ratio_minus_one(A, E)
    logterm = np.log1p(um1**2 / (4.0 * (1.0 + um1)))
    sel = (E >= fit_range[0]) & (E <= fit_range[1]) & (logterm > 0)
    if sel.sum() < 2:
        return QuasiSzegoReport(exponent=0.0, residual=0.0,
                                max_integrand=float(np.max(logterm * np.sqrt(E), initial=0.0)))
    coef = np.polyfit(np.log(E[sel]), np.log(logterm[sel]), 1)
    resid = float(np.sqrt(np.mean(
        (np.log(logterm[sel]) - np.polyval(coef, np.log(E[sel]))) ** 2)))
    return QuasiSzegoReport(exponent=float(coef[0]), residual=resid,
                            max_integrand=float(np.max(logterm * np.sqrt(E))))


@dataclass(frozen=True)
class NormalizationReport:
    exponent: float
    partial_integrals: tuple[float, ...]
    increments_decreasing: bool
    max_maximal: float


def _maximal_function(A: Amplitude, ks: np.ndarray,
                      L_grid: np.ndarray) -> np.ndarray:
    """Discretized Hardy-Littlewood maximal function of the perturbed measure
    with density Im M(k^2+i0) - k, using closed-form interval masses."""
    out = np.zeros_like(ks)
    c, mu = A.term_coeffs, A.term_mu
    for i, k in enumerate(ks):
        best = 0.0
        for L in L_grid:
            if L >= k:  # windows must stay inside (0, inf)
                continue
            mass = A.base.nu_mass(k, L)
            for ck, mk in zip(c, mu):
                mass += -2.0 * ck / 8.0 * math.log(
                    (4.0 * (k + L) ** 2 + mk**2) / (4.0 * (k - L) ** 2 + mk**2))
            best = max(best, mass / (2.0 * L))
        out[i] = best
    return out


def ks_check_normalization(A: Amplitude, k_grid: np.ndarray | None = None,
                           L_grid: np.ndarray | None = None) -> NormalizationReport:
    """Probe the normalization condition: the maximal function should drift like
    O(1/k) and log[1 + (M nu~ / k)^2] k^2 should have convergent partial integrals."""
    _require_known_base(A)
    ks = np.logspace(0.5, 3.0, 48) if k_grid is None else np.asarray(k_grid, dtype=float)
    Ls = 2.0 ** np.arange(-6, 1) if L_grid is None else np.asarray(L_grid, dtype=float)
    ms = _maximal_function(A, ks, Ls)
    if np.max(ms) == 0.0:
        return NormalizationReport(exponent=0.0, partial_integrals=(0.0,),
                                   increments_decreasing=True, max_maximal=0.0)
    tail = ks >= np.median(ks)
    exponent = float(np.polyfit(np.log(ks[tail]), np.log(ms[tail]), 1)[0])

    # partial integrals of the normalization integrand up to doubling endpoints
    partials = []
    for kmax in (8.0, 16.0, 32.0, 64.0, 128.0):
        kk = np.linspace(1.0, kmax, 513)
        mm = _maximal_function(A, kk, Ls)
        integrand = np.log1p((mm / kk) ** 2) * kk**2
        w = np.ones_like(kk); w[1:-1:2] = 4; w[2:-1:2] = 2
        partials.append(float(w @ integrand * (kk[1] - kk[0]) / 3.0))
    inc = np.diff(partials)
    return NormalizationReport(exponent=exponent,
                               partial_integrals=tuple(partials),
                               increments_decreasing=bool(np.all(np.diff(inc) < 0)),
                               max_maximal=float(np.max(ms)))
