"""Orthonormal Muntz systems on [0,1], moment projections, and the two-term
moment stability bound.

The monomials t^{lam_0}, ..., t^{lam_n} are orthonormalized by the explicit
coefficient formula

    C_mj = sqrt(2 lam_m + 1) * prod_{r<m}(lam_j + lam_r + 1)
                             / prod_{r != j}(lam_j - lam_r),

whose alternating products are astronomically ill-conditioned in 64-bit
arithmetic beyond n ~ 8; everything here therefore runs in configurable
extended precision (mpmath, default 256 bits) with products accumulated as
(sign, log magnitude) pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import mp, mpf

from .errors import NumericalError, ValidationError
from .radial_model import SpectralParams

_MOD = "muntz"


@dataclass(frozen=True)
class MuntzSeries:
    """A finite combination sum_j c_j t^{e_j} with real exponents e_j >= 0."""

    coeffs: tuple[float, ...]
    exponents: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.exponents):
            raise ValidationError("coefficient and exponent counts differ", _MOD)
        if any(e < 0 for e in self.exponents):
            raise ValidationError("series exponents must be >= 0", _MOD)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for c, e in zip(self.coeffs, self.exponents):
            out += c * t**e
        return out

    def norm_sq(self) -> float:
        """||h||^2 on L^2(0,1) from the closed-form monomial inner products."""
        total = 0.0
        for ci, ei in zip(self.coeffs, self.exponents):
            for cj, ej in zip(self.coeffs, self.exponents):
                total += ci * cj / (ei + ej + 1.0)
        return total


def _check_exponents(exponents: Sequence[float]):
    lam = list(exponents)
    if not lam:
        raise ValidationError("need at least one exponent", _MOD)
    if lam[0] < 0:
        raise ValidationError("exponents must satisfy lam_0 >= 0", _MOD)
    if any(b <= a for a, b in zip(lam, lam[1:])):
        raise ValidationError("exponents must be strictly increasing "
                              "(repeats make the coefficient formula singular)", _MOD)


def muntz_coeffs(exponents: Sequence[float], precision: int = 256):
    """Coefficient rows C_m = (C_m0..C_mm) as mpmath floats.

    Products are accumulated in (sign, log) form; the numerator factors are
    all positive, so the sign is (-1)^{m-j} from the denominator alone.
    """
    _check_exponents(exponents)
    with mp.workprec(precision):
        lam = [mpf(e) for e in exponents]
        rows = []
        for m in range(len(lam)):
            row = []
            for j in range(m + 1):
                loga = mp.log(2 * lam[m] + 1) / 2
                for r in range(m):
                    loga += mp.log(lam[j] + lam[r] + 1)
                for r in range(m + 1):
                    if r != j:
                        loga -= mp.log(abs(lam[j] - lam[r]))
                sign = -1 if (m - j) % 2 else 1
                row.append(sign * mp.e**loga)
            rows.append(tuple(row))
        return tuple(rows)


def muntz_coeff_squares(exponents: Sequence[Fraction]) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
    """Exact-rational certification path: (sign, C_mj^2) for rational exponents."""
    _check_exponents([float(e) for e in exponents])
    lam = [Fraction(e) for e in exponents]
    rows = []
    for m in range(len(lam)):
        row = []
        for j in range(m + 1):
            num = Fraction(1)
            for r in range(m):
                num *= lam[j] + lam[r] + 1
            den = Fraction(1)
            for r in range(m + 1):
                if r != j:
                    den *= lam[j] - lam[r]
            c2 = (2 * lam[m] + 1) * num**2 / den**2
            sign = 1 if (num / den) > 0 else -1
            row.append((sign, c2))
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class MuntzSystem:
    """Exponent ladder, orthonormalization table, and working precision."""

    exponents: tuple[float, ...]
    C: tuple  # jagged rows of mpf
    precision: int

    @property
    def n(self) -> int:
        return len(self.exponents) - 1

    def float_table(self) -> np.ndarray:
        out = np.zeros((self.n + 1, self.n + 1))
        for m, row in enumerate(self.C):
            out[m, : m + 1] = [float(c) for c in row]
        return out

    def condition_proxy(self, n: int) -> float:
        """sum_p |C_np|, the growth factor that eats working digits at level n."""
        return float(sum(abs(c) for c in self.C[n]))

    def _guard(self, n: int):
        digits = int(self.precision * math.log10(2.0))
        if self.condition_proxy(n) > 10.0 ** (digits - 8):
            raise NumericalError(
                f"orthonormalization level n={n} exceeds the certified range at "
                f"{self.precision}-bit precision (condition proxy "
                f"{self.condition_proxy(n):.3e})", _MOD)

    def evaluate_basis(self, m: int, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j, c in enumerate(self.C[m]):
            out += float(c) * t ** self.exponents[j]
        return out

    def gram_residual(self, n: int | None = None) -> float:
        """max |<L_m, L_q> - delta_mq| over m, q <= n, in working precision."""
        n = self.n if n is None else n
        with mp.workprec(self.precision):
            lam = [mpf(e) for e in self.exponents]
            worst = mpf(0)
            for m in range(n + 1):
                for q in range(m + 1):
                    acc = mpf(0)
                    for j, cj in enumerate(self.C[m][: m + 1]):
                        for i, ci in enumerate(self.C[q][: q + 1]):
                            acc += cj * ci / (lam[j] + lam[i] + 1)
                    target = 1 if m == q else 0
                    worst = max(worst, abs(acc - target))
            return float(worst)


def muntz_system(exponents: Sequence[float], precision: int = 256) -> MuntzSystem:
    return MuntzSystem(exponents=tuple(float(e) for e in exponents),
                       C=muntz_coeffs(exponents, precision), precision=precision)


def system_for_params(params: SpectralParams, n: int, precision: int = 256) -> MuntzSystem:
    if n > params.K:
        raise ValidationError(f"n={n} exceeds the parameter table (K={params.K})", _MOD)
    return muntz_system(params.lam[: n + 1], precision)


def moment(h: MuntzSeries, lam: float) -> float:
    """int_0^1 h(t) t^lam dt = sum_j c_j / (e_j + lam + 1)."""
    return float(sum(c / (e + lam + 1.0) for c, e in zip(h.coeffs, h.exponents)))


@dataclass(frozen=True)
class Projection:
    coefficients: np.ndarray  # <h, L_m> for m = 0..n
    norm: float               # ||pi_n h||_2
    condition_proxy: float


def project(h: MuntzSeries, system: MuntzSystem, n: int) -> Projection:
    """Orthogonal projection of h onto the span of L_0..L_n.

    Coefficients are <h, L_m> = sum_j C_mj * moment(h, lam_j); the norm comes
    from Parseval over the computed coefficients. Refuses to proceed when the
    condition proxy exhausts the certified precision.
    """
    if n > system.n:
        raise ValidationError(f"n={n} exceeds the system size {system.n}", _MOD)
    system._guard(n)
    with mp.workprec(system.precision):
        lam = [mpf(e) for e in system.exponents]
        hc = [mpf(c) for c in h.coeffs]
        he = [mpf(e) for e in h.exponents]
        moms = [sum(c / (e + lj + 1) for c, e in zip(hc, he)) for lj in lam]
        coefs = []
        for m in range(n + 1):
            coefs.append(sum(cj * moms[j] for j, cj in enumerate(system.C[m])))
        norm = mp.sqrt(sum(c * c for c in coefs))
        return Projection(
            coefficients=np.array([float(c) for c in coefs]),
            norm=float(norm),
            condition_proxy=system.condition_proxy(n))


def g_function(t: float, M0: float) -> float:
    """Monotone growth envelope for projection norms on the exponent ladder."""
    if t < 0:
        raise ValidationError(f"g is defined for t >= 0, got {t}", _MOD)
    base = 4.5 * M0
    return 1.5 / math.sqrt(base**2 - 1.0) * math.sqrt(2.0 * t + 1.0) * base ** (t + 1.0)


def n_of_eps(eps: float, M0: float) -> int:
    """Largest n with g(n) <= 1/sqrt(eps), by bisection on the monotone g.

    Too-large eps (no nonnegative solution) clamps to 0 with a warning.
    """
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}", _MOD)
    target = 1.0 / math.sqrt(eps)
    if g_function(0.0, M0) > target:
        warnings.warn("eps too large for the envelope: clamping n(eps) to 0",
                      stacklevel=2)
        return 0
    hi = 1.0
    while g_function(hi, M0) <= target:
        hi *= 2.0
        if hi > 1e6:
            raise NumericalError("n(eps) bracket exploded", _MOD)
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if g_function(mid, M0) <= target:
            lo = mid
        else:
            hi = mid
    return int(math.floor(lo))


def still_bound(eps: float, R: float, params: SpectralParams, B: float = 1.0) -> float:
    """Two-term stability bound B^2 eps + R^{1-d-delta} eps^{log R / log(9 M0/2)}."""
    if eps < 0:
        raise ValidationError(f"eps must be >= 0, got {eps}", _MOD)
    if not R > 1.0:
        raise ValidationError(f"bound requires R > 1, got R={R}", _MOD)
    if eps == 0.0:
        return 0.0
    if math.isinf(R):
        return B**2 * eps
    power = math.log(R) / math.log(4.5 * params.m0)
    return B**2 * eps + R ** (1.0 - params.d - params.delta) * eps**power
