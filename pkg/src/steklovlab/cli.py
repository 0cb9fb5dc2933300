"""Command-line entry point.

One JSON configuration file drives every pipeline stage; command-line flags
override individual fields. All outputs are CSV with a commented header that
echoes the full effective configuration, so identical configurations produce
byte-identical files. Exit codes: 0 success, 2 validation failure, 3
numerical failure (module-tagged message on stderr).
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .gelfand_levitan import gl_residual, recover_potential, solve_gl
from .muntz import system_for_params
from .perturbation import (Amplitude, GeometricTail, build_perturbed_amplitude,
                           ks_check_normalization, ks_check_positivity,
                           ks_check_quasi_szego, spectral_measure_diff)
from .radial_model import (Bargmann1, Bargmann2, PotentialForm, ZeroForm,
                           make_spectral_params, sample_potential)
from .stability_harness import (emit_records, fit_holder, run_sweep,
                                scaled_coeff_family)
from .weyl_titchmarsh import OdeOptions, steklov_spectrum, wt_from_amplitude, wt_from_ode

_MOD = "cli"

COMMANDS = ("forward", "perturb", "reconstruct", "muntz", "sweep", "ks-check")


@dataclass
class RunConfig:
    command: str = ""
    d: int = 3
    delta: float = 0.5
    T: float = 2.0
    K: int = 16
    M: int = 256
    base: dict = field(default_factory=lambda: {"kind": "zero"})
    coeffs: dict = field(default_factory=dict)
    scales: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    output: str | None = None
    precision: int = 256
    workers: int = 1
    seed: int = 0
    x_max: float | None = None
    tolerance: float = 1e-10
    B: float = 1.0
    n: int = 10

    def header_lines(self) -> list[str]:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (dict, list)):
                v = json.dumps(v, sort_keys=True, separators=(",", ":"))
            lines.append(f"{f.name} = {v}")
        return lines


def _base_form(spec: dict) -> PotentialForm:
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return ZeroForm()
    if kind == "bargmann1":
        try:
            return Bargmann1(beta=float(spec["beta"]), gamma=float(spec["gamma"]))
        except KeyError as exc:
            raise ValidationError(f"bargmann1 base needs parameter {exc}", _MOD)
    if kind == "bargmann2":
        try:
            return Bargmann2(c1=float(spec["c1"]), kappa1=float(spec["kappa1"]))
        except KeyError as exc:
            raise ValidationError(f"bargmann2 base needs parameter {exc}", _MOD)
    raise ValidationError(
        f"unknown base kind {kind!r}; expected zero | bargmann1 | bargmann2", _MOD)


def _coeff_spec(spec: dict) -> tuple[np.ndarray, GeometricTail | None]:
    values = np.asarray(spec.get("values", []), dtype=float)
    gen = spec.get("generator")
    tail = None
    if gen is not None:
        try:
            tail = GeometricTail(a=float(gen["a"]), rho=float(gen["rho"]))
        except KeyError as exc:
            raise ValidationError(f"coefficient generator needs key {exc}", _MOD)
    return values, tail


def _amplitude(cfg: RunConfig, params) -> Amplitude:
    values, tail = _coeff_spec(cfg.coeffs)
    return build_perturbed_amplitude(_base_form(cfg.base), values, params, tail)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# Command implementations: each returns the list of output lines (no header).
# ---------------------------------------------------------------------------


def _cmd_forward(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, cfg.K)
    form = _base_form(cfg.base)
    opts = OdeOptions(x_max=cfg.x_max, tolerance=cfg.tolerance)
    x_max = cfg.x_max if cfg.x_max is not None else max(12.0, 23.0 / params.kappa[0])
    pot = sample_potential(form, x_max=x_max, n=max(256, cfg.M))
    spectrum = steklov_spectrum(lambda k: wt_from_ode(pot, k, opts), params, cfg.K)
    lines = ["k,kappa,sigma"]
    for k in range(cfg.K + 1):
        lines.append(f"{k},{_fmt(params.kappa[k])},{_fmt(spectrum.sigma[k])}")
    return lines


def _cmd_perturb(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, cfg.K)
    amp = _amplitude(cfg, params)
    base_amp = build_perturbed_amplitude(amp.base, np.zeros(0), params)
    sig = steklov_spectrum(lambda k: wt_from_amplitude(base_amp, k), params, cfg.K)
    sig_t = steklov_spectrum(lambda k: wt_from_amplitude(amp, k), params, cfg.K)
    diff = spectral_measure_diff(amp)
    lines = ["k,sigma,sigma_tilde,diff"]
    for k in range(cfg.K + 1):
        lines.append(f"{k},{_fmt(sig.sigma[k])},{_fmt(sig_t.sigma[k])},"
                     f"{_fmt(sig_t.sigma[k] - sig.sigma[k])}")
    lines.append(f"# eps = {_fmt(float(np.max(np.abs(sig.sigma - sig_t.sigma))))}")
    lines.append("# resonances: index,location")
    for i, r in enumerate(diff.resonances):
        lines.append(f"{i},{_fmt(r)}")
    lines.append("# point_masses: index,E,weight")
    for i, (E, w) in enumerate(diff.point_masses):
        lines.append(f"{i},{_fmt(E)},{_fmt(w)}")
    return lines


def _cmd_reconstruct(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, cfg.K)
    amp = _amplitude(cfg, params)
    ws = solve_gl(amp, cfg.T, cfg.M, workers=cfg.workers)
    q = recover_potential(ws)
    lines = [f"# gl_residual = {_fmt(gl_residual(ws))}", "x,Q"]
    for x, v in zip(q.grid, q.values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    return lines


def _cmd_muntz(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, max(cfg.K, cfg.n))
    system = system_for_params(params, cfg.n, cfg.precision)
    lines = ["m,j,C_mj"]
    table = system.float_table()
    for m in range(cfg.n + 1):
        for j in range(m + 1):
            lines.append(f"{m},{j},{_fmt(table[m, j])}")
    lines.append(f"# gram_residual = {_fmt(system.gram_residual())}")
    return lines


def _cmd_sweep(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, cfg.K)
    values, tail = _coeff_spec(cfg.coeffs)
    if tail is not None:
        if values.size:
            raise ValidationError(
                "sweep family must be either a coefficient list or a generator, "
                "not both", _MOD)
        family = lambda s: ((), GeometricTail(a=tail.a * s, rho=tail.rho))
    elif values.size:
        family = scaled_coeff_family(values)
    else:
        raise ValidationError("sweep needs coefficient values or a generator", _MOD)
    records = run_sweep(_base_form(cfg.base), family, cfg.scales, cfg.T, params,
                        cfg.K, cfg.M, B=cfg.B, workers=cfg.workers)
    fit = fit_holder(records)
    buf = io.StringIO()
    emit_records(records, buf, fit=fit)
    return buf.getvalue().rstrip("\n").split("\n")


def _cmd_ks_check(cfg: RunConfig) -> list[str]:
    params = make_spectral_params(cfg.d, cfg.delta, cfg.K)
    amp = _amplitude(cfg, params)
    pos = ks_check_positivity(amp)
    qs = ks_check_quasi_szego(amp)
    norm = ks_check_normalization(amp)
    lines = ["check,metric,value"]
    lines.append(f"positivity,min_density,{_fmt(pos.min_density)}")
    lines.append(f"positivity,argmin_E,{_fmt(pos.argmin_E)}")
    lines.append(f"positivity,passed,{int(pos.passed)}")
    lines.append(f"quasi_szego,decay_exponent,{_fmt(qs.exponent)}")
    lines.append(f"quasi_szego,fit_residual,{_fmt(qs.residual)}")
    lines.append(f"normalization,maximal_exponent,{_fmt(norm.exponent)}")
    lines.append(f"normalization,increments_decreasing,{int(norm.increments_decreasing)}")
    for i, p in enumerate(norm.partial_integrals):
        lines.append(f"normalization,partial_integral_{i},{_fmt(p)}")
    return lines


_DISPATCH = {
    "forward": _cmd_forward,
    "perturb": _cmd_perturb,
    "reconstruct": _cmd_reconstruct,
    "muntz": _cmd_muntz,
    "sweep": _cmd_sweep,
    "ks-check": _cmd_ks_check,
}


def run(cfg: RunConfig) -> int:
    """Validate, dispatch, and write the output file. Returns the exit status."""
    try:
        if cfg.command not in COMMANDS:
            raise ValidationError(
                f"command must be one of {', '.join(COMMANDS)}; got {cfg.command!r}",
                _MOD)
        for name, val, lo in (("K", cfg.K, 1), ("M", cfg.M, 32),
                              ("precision", cfg.precision, 16),
                              ("workers", cfg.workers, 1), ("n", cfg.n, 0)):
            if val < lo:
                raise ValidationError(f"{name} must be >= {lo}, got {val}", _MOD)
        lines = _DISPATCH[cfg.command](cfg)
    except ValidationError as exc:
        print(exc.tagged(), file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(exc.tagged(), file=sys.stderr)
        return 3

    text = "".join(f"# {h}\n" for h in cfg.header_lines()) + "\n".join(lines) + "\n"
    try:
        if cfg.output is None or cfg.output == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"[cli] cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="steklovlab",
        description="Forward and inverse Steklov pipelines for radial potentials")
    p.add_argument("command", nargs="?", choices=COMMANDS,
                   help="pipeline stage (may also come from the config file)")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--output", help="output CSV path ('-' for stdout)")
    p.add_argument("--workers", type=int)
    p.add_argument("--precision", type=int, help="working precision in bits")
    p.add_argument("--d", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--x-max", dest="x_max", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--n", type=int, help="orthonormalization table size")
    p.add_argument("--base", help="zero | bargmann1 | bargmann2")
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--kappa1", type=float)
    p.add_argument("--coeffs", help="comma-separated coefficient list")
    p.add_argument("--tail-a", dest="tail_a", type=float)
    p.add_argument("--tail-rho", dest="tail_rho", type=float)
    p.add_argument("--scales", help="comma-separated sweep scales")
    return p


def build_config(argv: list[str] | None = None) -> RunConfig:
    args = _build_parser().parse_args(argv)
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}", _MOD)
        known = {f.name for f in dataclasses.fields(RunConfig)}
        for key, val in data.items():
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}", _MOD)
            setattr(cfg, key, val)
    for name in ("command", "output", "workers", "precision", "d", "delta", "T",
                 "K", "M", "seed", "x_max", "tolerance", "B", "n"):
        val = getattr(args, name)
        if val is not None:
            setattr(cfg, name, val)
    if args.base is not None:
        base = {"kind": args.base}
        cfg.base = base
    for key, val in (("beta", args.beta), ("gamma", args.gamma),
                     ("c1", args.c1), ("kappa1", args.kappa1)):
        if val is not None:
            cfg.base[key] = val
    if args.coeffs is not None:
        cfg.coeffs = dict(cfg.coeffs)
        cfg.coeffs["values"] = [float(v) for v in args.coeffs.split(",") if v]
    if args.tail_a is not None or args.tail_rho is not None:
        gen = dict(cfg.coeffs.get("generator") or {})
        if args.tail_a is not None:
            gen["a"] = args.tail_a
        if args.tail_rho is not None:
            gen["rho"] = args.tail_rho
        cfg.coeffs = dict(cfg.coeffs)
        cfg.coeffs["generator"] = gen
    if args.scales is not None:
        cfg.scales = [float(v) for v in args.scales.split(",") if v]
    return cfg


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = build_config(argv)
    except ValidationError as exc:
        print(exc.tagged(), file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
