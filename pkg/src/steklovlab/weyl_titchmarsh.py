"""Weyl-Titchmarsh values M(-kappa^2) by two independent routes, Steklov
spectra, and certified sup-norm gaps between spectra.

Route one integrates -u'' + Q u = -kappa^2 u backward from a truncation point
with the decaying (Jost) seed and returns u'(0)/u(0); backward integration
damps the growing mode, so the value is uniformly stable. Route two uses the
representation M(-kappa^2) = -kappa - int_0^inf A(alpha) e^{-2 kappa alpha}
d alpha for the amplitude A, with the perturbation series transformed in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NumericalError, ValidationError
from .perturbation import Amplitude
from .radial_model import (Bargmann1, Bargmann2, PotentialForm, RadialPotential,
                           SpectralParams, SteklovSpectrum, ZeroForm)

_MOD = "weyl_titchmarsh"


@dataclass(frozen=True)
class WTEvaluation:
    kappa: float
    value: float
    route: str  # "ode" | "laplace" | "closed_form"
    est_error: float


@dataclass(frozen=True)
class OdeOptions:
    """Controls for the backward shooting route.

    x_max = None picks max(12, 23/kappa), clipped to the potential's sampled
    domain; 23/kappa keeps the growing-mode contamination e^{-2 kappa x_max}
    near 1e-20 for potentials with slow decay (for rapidly decaying closed
    forms, x_max = 12 already suffices at any kappa of interest).
    """

    x_max: float | None = None
    step: float = 1.0 / 32.0
    tolerance: float = 1e-10
    max_halvings: int = 14

    def resolve_x_max(self, kappa: float, potential: RadialPotential) -> float:
        if self.x_max is not None:
            return float(self.x_max)
        want = max(12.0, 23.0 / kappa)
        if potential.closed_form is None:
            return min(want, potential.x_max)
        return want


def _rk4_backward(g_half: np.ndarray, h: float, kappa: float) -> tuple[float, float]:
    """Integrate u'' = g(x) u from x_max down to 0 with the scaled Jost seed.

    g_half holds g = Q + kappa^2 on the half-step grid (2n+1 values, ascending).
    Returns (u(0), u'(0)) up to an irrelevant common rescaling.
    """
    n = (g_half.size - 1) // 2
    u, v = 1.0, -kappa
    hs = -h
    top = 2 * n
    for j in range(n):
        g0 = g_half[top - 2 * j]
        gm = g_half[top - 2 * j - 1]
        g1 = g_half[top - 2 * j - 2]
        k1u, k1v = v, g0 * u
        k2u = v + 0.5 * hs * k1v
        k2v = gm * (u + 0.5 * hs * k1u)
        k3u = v + 0.5 * hs * k2v
        k3v = gm * (u + 0.5 * hs * k2u)
        k4u = v + hs * k3v
        k4v = g1 * (u + hs * k3u)
        u = u + hs / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v = v + hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if abs(u) > 1e150:  # linear problem: rescale to dodge overflow
            v /= abs(u)
            u = math.copysign(1.0, u)
    return u, v


def _m_fixed_step(Q: RadialPotential, kappa: float, x_max: float, n: int) -> float:
    """M value from one backward pass with exactly n steps (no adaptivity)."""
    xs = np.linspace(0.0, x_max, 2 * n + 1)
    g = Q(xs) + kappa**2
    if not np.all(np.isfinite(g)):
        raise NumericalError("potential evaluation produced non-finite values", _MOD)
    u0, v0 = _rk4_backward(g, x_max / n, kappa)
    if not (math.isfinite(u0) and math.isfinite(v0)):
        raise NumericalError(
            f"backward integration overflowed at kappa={kappa} "
            "(spectral parameter too close to an eigenvalue)", _MOD)
    if abs(u0) < 1e-12 * max(1.0, abs(v0)):
        raise NumericalError(
            f"u(0) vanishes at kappa={kappa}: -kappa^2 sits at a Dirichlet "
            "point of the truncated problem", _MOD)
    return v0 / u0


def wt_from_ode(Q: RadialPotential, kappa: float,
                opts: OdeOptions | None = None) -> WTEvaluation:
    """M(-kappa^2) = u'(0)/u(0) by backward integration; error from step halving."""
    if kappa <= 0:
        raise ValidationError(f"kappa must be positive, got {kappa}", _MOD)
    opts = opts or OdeOptions()
    x_max = opts.resolve_x_max(kappa, Q)
    if Q.closed_form is None and x_max > Q.x_max + 1e-12:
        raise ValidationError(
            f"potential sampled only up to {Q.x_max}, need x_max={x_max}", _MOD)

    n = max(32, int(math.ceil(x_max / opts.step)))
    prev = None
    for _ in range(opts.max_halvings + 1):
        m = _m_fixed_step(Q, kappa, x_max, n)
        if prev is not None and abs(m - prev) <= opts.tolerance:
            return WTEvaluation(kappa=kappa, value=m, route="ode",
                                est_error=abs(m - prev))
        prev = m
        n *= 2
    raise NumericalError(
        f"step halving did not reach tolerance {opts.tolerance} at kappa={kappa}",
        _MOD)


def _series_laplace(A: Amplitude, kappa: float) -> float:
    """int_0^inf (A~ - A)(alpha) e^{-2 kappa alpha} d alpha in closed form.

    Bound-state terms (mu_k < 0) contribute 2 c_k |mu_k| / (4 kappa^2 - mu_k^2),
    every term contributes c_k / (2 kappa + |mu_k|); together this equals
    sum_k c_k / (2 kappa + mu_k) with the signed rates.
    """
    total = 0.0
    for ck, mk in zip(A.term_coeffs, A.term_mu):
        if mk < 0:
            gap = 2.0 * kappa - abs(mk)
            if gap < 1e-8:
                raise ValidationError(
                    f"kappa={kappa} is at or within 1e-8 of the pole "
                    f"2 kappa = |mu| = {abs(mk)}", _MOD)
            total += 2.0 * ck * abs(mk) / (4.0 * kappa**2 - mk**2)
        total += ck / (2.0 * kappa + abs(mk))
    return total


def wt_from_amplitude(A: Amplitude, kappa: float) -> WTEvaluation:
    """M(-kappa^2) from the amplitude representation.

    The base amplitude is integrated by adaptive quadrature, truncated where
    its envelope times e^{-2 kappa alpha} drops below 1e-14; the perturbation
    series is summed in closed form.
    """
    if kappa <= 0:
        raise ValidationError(f"kappa must be positive, got {kappa}", _MOD)
    if not np.isfinite(np.sum(np.abs(A.term_coeffs))):
        raise ValidationError("perturbation coefficients are not summable", _MOD)
    base = A.base
    if kappa <= base.kappa_min:
        raise ValidationError(
            f"representation for this base needs kappa > {base.kappa_min}, "
            f"got {kappa}", _MOD)
    series = _series_laplace(A, kappa)

    base_int, base_err = 0.0, 0.0
    if not isinstance(base, ZeroForm):
        decay = 2.0 * (kappa - base.kappa_min)
        scale = max(abs(float(base.amplitude(0.0))), abs(float(base.amplitude(1.0))), 1e-30)
        alpha_max = math.log(scale / 1e-14) / decay + 1.0
        base_int, base_err = quad(
            lambda a: float(base.amplitude(a)) * math.exp(-2.0 * kappa * a),
            0.0, alpha_max, limit=200, epsabs=1e-13, epsrel=1e-12)
    value = -kappa - base_int - series
    return WTEvaluation(kappa=kappa, value=value, route="laplace",
                        est_error=base_err + 1e-15 * abs(value))


def steklov_spectrum(evaluator, params: SpectralParams,
                     K: int | None = None) -> SteklovSpectrum:
    """sigma_k = -(d-2)/2 - M(-kappa_k^2) for k = 0..K.

    evaluator maps kappa to a WTEvaluation (or a bare float). The additive
    constant -(d-2)/2 is the one that makes sigma_k = k exact for Q = 0.
    """
    K = params.K if K is None else K
    if K > params.K:
        raise ValidationError(f"K={K} exceeds the parameter table (K={params.K})", _MOD)
    shift = -(params.d - 2) / 2.0
    sig = np.empty(K + 1)
    for k in range(K + 1):
        try:
            ev = evaluator(float(params.kappa[k]))
        except (ValidationError, NumericalError) as exc:
            raise type(exc)(f"evaluator failed at k={k}: {exc}", _MOD) from exc
        sig[k] = shift - (ev.value if isinstance(ev, WTEvaluation) else float(ev))
    return SteklovSpectrum(d=params.d, sigma=sig)


def perturbation_tail_bound(A: Amplitude, params: SpectralParams, K: int) -> float:
    """Analytic bound on sup_{k > K} |sigma_k - sigma~_k| for the perturbation
    carried by A: the term-wise majorant is decreasing in kappa, so its value
    at kappa_{K+1} dominates the whole tail."""
    kap = float(params.kappa[0]) + (K + 1)  # kappa_{K+1}, unit spacing
    total = 0.0
    for ck, mk in zip(A.term_coeffs, A.term_mu):
        if mk < 0:
            total += 2.0 * abs(ck) * abs(mk) / (4.0 * kap**2 - mk**2)
        total += abs(ck) / (2.0 * kap + abs(mk))
    return total


@dataclass(frozen=True)
class DnGap:
    """Sup-norm gap between two Steklov spectra with a truncation certificate.

    eps is exact (not just a lower bound) whenever tail_bound <= eps, since the
    gap is a maximum: indices beyond K cannot then raise it. strict_small_tail
    additionally records the 1%-of-eps margin.
    """

    eps: float
    tail_bound: float
    certified: bool
    strict_small_tail: bool


def dn_gap(sigma: SteklovSpectrum, sigma_tilde: SteklovSpectrum,
           tail_bound: float) -> DnGap:
    if sigma.d != sigma_tilde.d:
        raise ValidationError(
            f"dimension mismatch: {sigma.d} vs {sigma_tilde.d}", _MOD)
    if sigma.K != sigma_tilde.K:
        raise ValidationError(
            f"truncation mismatch: K={sigma.K} vs K={sigma_tilde.K}", _MOD)
    eps = float(np.max(np.abs(sigma.sigma - sigma_tilde.sigma)))
    certified = tail_bound <= eps or (eps == 0.0 and tail_bound == 0.0)
    return DnGap(eps=eps, tail_bound=float(tail_bound), certified=certified,
                 strict_small_tail=bool(tail_bound < 0.01 * eps))


def jost_closed_form(form: PotentialForm, kappa: float) -> float:
    """Boundary value of the Jost solution for the closed-form families.

    Roots on kappa > 0 are bound states, roots on kappa < 0 are real
    resonances; the induced spectral density on E > 0 is
    sqrt(E) / (pi |psi(0, sqrt(E))|^2).
    """
    if not isinstance(form, (ZeroForm, Bargmann1, Bargmann2)):
        raise ValidationError("no closed-form Jost value for this potential", _MOD)
    return float(form.jost0(kappa))
