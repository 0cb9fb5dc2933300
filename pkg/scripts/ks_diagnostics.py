#!/usr/bin/env python3
"""Spectral-measure diagnostics for an admissible perturbation: density
positivity, quasi-Szego integrand decay, and maximal-function drift."""

import argparse

from steklovlab import (ZeroForm, Bargmann1, build_perturbed_amplitude,
                        ks_check_normalization, ks_check_positivity,
                        ks_check_quasi_szego, make_spectral_params,
                        spectral_measure_diff)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--coeffs", default="-1.0")
    ap.add_argument("--base", choices=("zero", "bargmann1"), default="zero")
    args = ap.parse_args()

    params = make_spectral_params(args.d, args.delta, 16)
    base = ZeroForm() if args.base == "zero" else Bargmann1(beta=1.0, gamma=0.5)
    coeffs = [float(c) for c in args.coeffs.split(",") if c]
    amp = build_perturbed_amplitude(base, coeffs, params)

    diff = spectral_measure_diff(amp)
    print(f"resonances: {[f'{r:.4f}' for r in diff.resonances]}")
    masses = [(f"{E:.4f}", f"{w:.4f}") for E, w in diff.point_masses]
    print(f"bound states (E, weight): {masses}")

    pos = ks_check_positivity(amp)
    print(f"positivity: min density {pos.min_density:.4e} at E = {pos.argmin_E:.3e} "
          f"-> {'ok' if pos.passed else 'VIOLATED'}")
    qs = ks_check_quasi_szego(amp)
    print(f"quasi-Szego: integrand decay exponent {qs.exponent:.3f} "
          f"(residual {qs.residual:.2e})")
    norm = ks_check_normalization(amp)
    print(f"normalization: maximal-function exponent {norm.exponent:.3f}, "
          f"partial integrals {[f'{p:.5f}' for p in norm.partial_integrals]}")


if __name__ == "__main__":
    main()
