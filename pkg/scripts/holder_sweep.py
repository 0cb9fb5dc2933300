#!/usr/bin/env python3
"""Default stability experiment: geometric coefficient family rho = 1/9
(radius 9) over four decades of scale, d = 3, delta = 1/2, T = 2."""

import argparse

from steklovlab import (ZeroForm, fit_holder, emit_records, geometric_family,
                        make_spectral_params, run_sweep)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, default=1.0 / 9.0)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--T", type=float, default=2.0)
    ap.add_argument("--K", type=int, default=64)
    ap.add_argument("--M", type=int, default=256)
    ap.add_argument("--theta", type=float, default=None,
                    help="override the exponent used in the fit")
    ap.add_argument("--output", default="holder_sweep.csv")
    args = ap.parse_args()

    params = make_spectral_params(args.d, args.delta, args.K)
    records = run_sweep(ZeroForm(), geometric_family(args.rho),
                        [1e-1, 1e-2, 1e-3, 1e-4], args.T, params,
                        K=args.K, M=args.M)
    fit = fit_holder(records, theta=args.theta)

    print(f"{'s':>10} {'eps':>14} {'q_gap':>14} {'a_gap':>12} {'bound':>12}")
    for r in records:
        print(f"{r.s:10.1e} {r.eps:14.6e} {r.q_gap:14.6e} {r.a_gap:12.3e} "
              f"{r.bound:12.3e}")
    print(f"theta = {fit.theta:.4f}  slope = {fit.slope:.4f}  "
          f"C_T = {fit.C_T:.4f}  verdict = {fit.verdict}")
    emit_records(records, args.output, fit=fit,
                 header_lines=[f"rho = {args.rho}", f"d = {args.d}",
                               f"delta = {args.delta}", f"T = {args.T}",
                               f"K = {args.K}", f"M = {args.M}"])
    print(f"records written to {args.output}")


if __name__ == "__main__":
    main()
