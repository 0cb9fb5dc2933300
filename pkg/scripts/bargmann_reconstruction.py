#!/usr/bin/env python3
"""Reconstruction accuracy against the exactly solvable wells: relative L2
error and boundary value at several grid resolutions."""

import argparse

import numpy as np

from steklovlab import (Bargmann1, Bargmann2, build_perturbed_amplitude,
                        gl_residual, make_spectral_params, recover_potential,
                        solve_gl)
from steklovlab.quadrature import l2_norm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=float, default=2.0)
    ap.add_argument("--resolutions", default="64,128,256")
    args = ap.parse_args()

    params = make_spectral_params(3, 0.5, 8)
    wells = [Bargmann1(beta=1.0, gamma=0.5), Bargmann1(beta=2.0, gamma=1.0),
             Bargmann2(c1=1.0, kappa1=0.5), Bargmann2(c1=0.5, kappa1=1.0)]
    resolutions = [int(m) for m in args.resolutions.split(",")]

    for form in wells:
        print(form)
        prev = None
        for M in resolutions:
            amp = build_perturbed_amplitude(form, [], params)
            ws = solve_gl(amp, args.T, M)
            q = recover_potential(ws)
            h = args.T / M
            exact = form.potential(q.grid)
            rel = l2_norm(q.values - exact, h) / l2_norm(exact, h)
            line = (f"  M = {M:4d}: relL2 = {rel:.3e}  "
                    f"Q(0) = {q.values[0]: .8f}  residual = {gl_residual(ws):.1e}")
            if prev is not None:
                line += f"  order = {np.log2(prev / rel):.2f}"
            prev = rel
            print(line)


if __name__ == "__main__":
    main()
