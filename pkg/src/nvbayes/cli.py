"""Command-line entry point: ``nvbayes <command> [options]``.

Commands are thin adapters over the library; each writes one CSV (stdout
unless ``--out`` is given) whose ``#`` header echoes the version, the
effective config, its hash and the seed.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import errors
from .bench import SWEEPS, SweepConfig, run_mse_sweep
from .bounds import VarianceReport, fisher_information, variance_report
from .calibration import CalibrationReport, calibrate
from .config import config_hash, load_config, rate_parameters
from .csvio import write_csv
from .dynamics import fluorescence_coefficients, readout_schedule
from .estimators import EstimateResult, bayes_estimate, closed_form_estimate, ps_estimate
from .photon import FluorescenceTrace, noiseless_trace, read_trace_csv, sample_trace
from .priors import Prior
from .rabi import SpinParameters, rabi_sweep

EXIT_CODES = {
    errors.ConfigError: 3,
    errors.InvalidParameterError: 4,
    errors.NumericalFailureError: 5,
    errors.DegenerateScheduleError: 6,
    errors.SingularBinError: 7,
    errors.ZeroInformationError: 8,
    errors.DegeneratePriorError: 9,
    errors.PosteriorUnderflowError: 10,
    errors.NoSteadyStateError: 11,
    errors.NoFeasibleLError: 12,
    errors.IntegrationError: 13,
}
EXIT_IO = 14
EXIT_OTHER = 1

DEFAULT_SWEEP_VALUES = {
    "readout_time": [100, 200, 300, 400, 600, 800, 1200, 1600, 2400, 3200],
    "dt": [1, 2, 5, 10, 20, 30, 50, 100, 150, 200, 300],
    "grid_points": [10, 25, 50, 100, 200, 400, 800],
    "pumping_rate": [0.1, 0.2, 0.3, 0.5, 0.7, 0.9],
}
METHOD_ALIASES = {"ps": "PS", "flat": "BayesFlat", "jeffreys": "BayesJeffreys", "conjugate": "BayesConjugate"}


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="nvbayes", description="Simulate and estimate NV spin-state readout.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="default", help="JSON parameter file or 'default'")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output CSV path (stdout if omitted)")
    common.add_argument("--dt", type=float, help="bin width in ns (overrides config)")
    common.add_argument("--readout-time", type=float, help="readout window in ns (overrides config)")
    common.add_argument("--L", type=float, dest="L", help="relative pumping rate (overrides config)")
    common.add_argument("--lambda", type=float, dest="lam", help="fluorescence scale (overrides config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a readout trace")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--noiseless", action="store_true", help="write expected counts instead of a Poisson draw")

    p = sub.add_parser("estimate", parents=[common], help="estimate rho from a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--method", default="bayes", choices=["ps", "bayes", "closed-form"])
    p.add_argument("--prior", default="flat", choices=["flat", "jeffreys", "conjugate"])
    p.add_argument("--grid-points", type=int, default=400)
    p.add_argument("--rho0", type=float, default=0.5, help="conjugate prior mean")
    p.add_argument("--sigma0-sq", type=float, help="conjugate prior variance (default 4 x CRLB at rho0)")

    p = sub.add_parser("bounds", parents=[common], help="analytic variance report")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--sigma0-sq", type=float)

    p = sub.add_parser("rabi", parents=[common], help="rho0 and conjugate prior over pulse lengths")
    p.add_argument("--t-max", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--multiplier", type=float, default=4.0)

    p = sub.add_parser("calibrate", parents=[common], help="estimate lambda and L from a reference trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--margin", type=float, default=3.0)
    p.add_argument("--l-init", type=float, default=1.0)

    p = sub.add_parser("bench", parents=[common], help="Monte Carlo MSE sweep")
    p.add_argument("--sweep", required=True, choices=SWEEPS)
    p.add_argument("--values", type=_floats, help="comma-separated sweep values")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--method", default="ps,flat", help="comma-separated subset of ps,flat,jeffreys,conjugate")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--grid-points", type=int, default=400)
    p.add_argument("--noiseless", action="store_true")
    return parser


def _effective(args):
    overrides = {"dt": args.dt, "readout_time": args.readout_time, "L": args.L, "lambda": args.lam}
    return load_config(args.config, overrides)


def _header(cfg, args, extra=None):
    head = {"command": args.command, "config_hash": config_hash(cfg), "seed": args.seed}
    for key in sorted(cfg):
        value = cfg[key]
        if isinstance(value, dict):
            for sub_key in sorted(value):
                head[f"config.{key}.{sub_key}"] = value[sub_key]
        else:
            head[f"config.{key}"] = value
    head.update(extra or {})
    return head


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)


def _load_trace(args, params):
    times, dt, counts, _ = read_trace_csv(args.trace)
    return FluorescenceTrace(counts, fluorescence_coefficients(params, times, dt))


def cmd_simulate(args, cfg):
    params = rate_parameters(cfg)
    schedule = readout_schedule(params, cfg["readout_time"], cfg["dt"])
    if args.noiseless:
        trace = noiseless_trace(schedule, args.rho)
    else:
        trace = sample_trace(schedule, args.rho, args.seed)
    trace.seed = args.seed
    head = _header(cfg, args, {"rho": args.rho, "noiseless": args.noiseless})
    return trace.to_csv(args.out, header=head)


def cmd_estimate(args, cfg):
    params = rate_parameters(cfg)
    trace = _load_trace(args, params)
    trace.seed = args.seed
    if args.prior == "conjugate":
        sigma0_sq = args.sigma0_sq
        if sigma0_sq is None:
            sigma0_sq = 4.0 / fisher_information(trace.schedule, args.rho0)
        prior = Prior.conjugate(args.rho0, sigma0_sq)
    else:
        prior = Prior.from_name(args.prior)
    if args.method == "ps":
        result = ps_estimate(trace)
    elif args.method == "bayes":
        result = bayes_estimate(trace, prior, k=args.grid_points)
    else:
        rho = closed_form_estimate(trace, prior)
        result = EstimateResult(rho, float("nan"), float("nan"), len(trace), f"ClosedForm{prior.kind.value.capitalize()}",
                                args.seed, 0.0 <= rho <= 1.0)
    head = _header(cfg, args, {"trace": Path(args.trace).name, "prior": args.prior, "in_range": result.in_range})
    return write_csv(args.out, EstimateResult.COLUMNS, [result.row()], header=head)


def cmd_bounds(args, cfg):
    schedule = readout_schedule(rate_parameters(cfg), cfg["readout_time"], cfg["dt"])
    report = variance_report(schedule, args.rho, args.sigma0_sq)
    return write_csv(args.out, VarianceReport.COLUMNS, [report.row()], header=_header(cfg, args))


def cmd_rabi(args, cfg):
    if "spin" not in cfg:
        raise errors.ConfigError("config has no 'spin' section")
    spin = SpinParameters.from_config(cfg["spin"])
    schedule = readout_schedule(rate_parameters(cfg), cfg["readout_time"], cfg["dt"])
    t_values = np.linspace(0.0, args.t_max, args.points)
    rows = rabi_sweep(spin, t_values, schedule, args.multiplier)
    head = _header(cfg, args, {"multiplier": args.multiplier})
    return write_csv(args.out, ["t_mw_ns", "rho0", "sigma0_sq"], rows, header=head)


def cmd_calibrate(args, cfg):
    params = rate_parameters(cfg)
    trace = _load_trace(args, params)
    report = calibrate(trace, params, l_init=args.l_init, margin=args.margin)
    head = _header(cfg, args, {"trace": Path(args.trace).name})
    return write_csv(args.out, CalibrationReport.COLUMNS, [report.row()], header=head)


def cmd_bench(args, cfg):
    methods = []
    for name in args.method.split(","):
        name = name.strip().lower()
        if name not in METHOD_ALIASES:
            raise errors.ConfigError(f"unknown method {name!r}")
        methods.append(METHOD_ALIASES[name])
    values = args.values or DEFAULT_SWEEP_VALUES[args.sweep]
    config = SweepConfig(
        swept_variable=args.sweep,
        values=values,
        params=rate_parameters(cfg),
        dt=cfg["dt"],
        readout_time=cfg["readout_time"],
        trials_per_point=args.trials,
        true_rho=args.rho,
        methods=methods,
        seed=args.seed,
        grid_points=args.grid_points,
        noiseless=args.noiseless,
    )
    result = run_mse_sweep(config)
    settings = {"sweep": args.sweep, "values": ",".join(repr(float(v)) for v in values),
                "trials": args.trials, "methods": ",".join(methods), "rho": args.rho,
                "grid_points": args.grid_points, "noiseless": args.noiseless}
    run_hash = config_hash({**cfg, **settings, "seed": args.seed})
    out = args.out
    if out is not None and Path(out).is_dir():
        out = str(Path(out) / f"bench_{args.sweep}_{run_hash}.csv")
    args.out = out
    head = _header(cfg, args, {**settings, "run_hash": run_hash})
    return result.to_csv(out, header=head)


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
    "rabi": cmd_rabi,
    "calibrate": cmd_calibrate,
    "bench": cmd_bench,
}


def _exit_code(exc):
    for cls in type(exc).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return EXIT_OTHER


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective(args)
        text = COMMANDS[args.command](args, cfg)
    except errors.NVBayesError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
