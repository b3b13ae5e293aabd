"""Command line front end.

Verbs:
    run       single run, artifact bundle under out/<run-id>/
    sweep     one-axis parameter sweep, aggregated CSV
    rates     phonon-assisted rate curves without running any dynamics
    validate  parse and check a configuration, print it back

Every configuration key doubles as an override flag (e.g. --g_ueV 30),
applied on top of --config or the built-in defaults.  Invalid input
exits with status 2 before anything is written.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .params import (_SCHEMA, ConfigError, PhysicalParams, ValidationError,
                     check_polaron_validity, default_params, from_config_dict,
                     load_config, parse_value, serialize)
from .phonon import build_kernel, rate_curve
from .runner import (ALL_OUTPUTS, SWEEP_AXES, SweepSpec, run_single,
                     run_sweep, write_csv, write_sweep_csv)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration")
    group.add_argument("--config", type=Path, metavar="FILE",
                       help="configuration file ('key = value' lines)")
    for key in _SCHEMA:
        group.add_argument(f"--{key}", metavar="X",
                           help=f"override {key}")


def _params_from_args(args: argparse.Namespace) -> PhysicalParams:
    base = load_config(args.config) if args.config else default_params()
    cfg = base.to_config_dict()
    for key in _SCHEMA:
        raw = getattr(args, key)
        if raw is not None:
            cfg[key] = parse_value(key, raw, where=f"--{key}")
    return from_config_dict(cfg)


def _parse_floats(text: str, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}")
    if not vals:
        raise ConfigError(f"{what}: empty list")
    return vals


def _parse_outputs(text: str) -> frozenset[str]:
    if text.strip() == "all":
        return ALL_OUTPUTS
    names = frozenset(x.strip() for x in text.split(",") if x.strip())
    unknown = names - ALL_OUTPUTS
    if unknown:
        raise ConfigError(f"--outputs: unknown names {sorted(unknown)}; "
                          f"choose from {sorted(ALL_OUTPUTS)}")
    if not names:
        raise ConfigError("--outputs: empty list")
    return names


def _cmd_run(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    outputs = _parse_outputs(args.outputs)
    run_single(params, out_root=args.out, outputs=outputs)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _params_from_args(args)
    values = _parse_floats(args.values, "--values")
    spec = SweepSpec(axis=args.axis, values=values, base=base)
    rows = run_sweep(spec, workers=args.workers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"sweep_{args.axis}.csv"
    write_sweep_csv(rows, path)
    for row in rows:
        if row["error"]:
            print(f"{args.axis}={row['axis_value']}: FAILED {row['error']}")
        else:
            print(f"{args.axis}={row['axis_value']}: C={row['concurrence']:.4f} "
                  f"q={row['qber']:.4f}")
    print(f"wrote {path}")
    return 0 if any(not row["error"] for row in rows) else 1


def _cmd_rates(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    if args.delta_step <= 0 or args.delta_max < args.delta_min:
        raise ConfigError("rates: need delta_step > 0 and delta_max >= delta_min")
    temps = (_parse_floats(args.temperatures, "--temperatures")
             if args.temperatures else (params.temperature,))
    deltas = []
    d = args.delta_min
    while d <= args.delta_max + 1e-12:
        deltas.append(round(d, 12))
        d += args.delta_step
    rows = rate_curve(params, deltas, temps)
    header = ["delta_meV", "gamma_plus", "gamma_minus", "gamma_tp",
              "temperature_K"]
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, header, [[r[k] for k in header] for r in rows])
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    kernel = build_kernel(params)
    report = check_polaron_validity(params, kernel.b_avg)
    sys.stdout.write(serialize(params))
    print(f"polaron validity: {report.value:.6f} "
          f"(threshold {report.threshold}) -> "
          f"{'ok' if report.passed else 'exceeded'}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdcascade",
        description="Cavity-assisted photon-pair generation from a "
                    "pulse-driven quantum-dot cascade.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="single run with artifact bundle")
    _add_config_args(p_run)
    p_run.add_argument("--out", default="out", metavar="DIR",
                       help="artifact root directory (default: out)")
    p_run.add_argument("--outputs", default="all", metavar="LIST",
                       help="comma-separated subset of "
                            f"{sorted(ALL_OUTPUTS)} or 'all'")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter axis")
    _add_config_args(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    p_sweep.add_argument("--values", required=True, metavar="LIST",
                         help="comma-separated axis values in file units")
    p_sweep.add_argument("--out", default="out", metavar="DIR")
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="process pool size (default: "
                              "QDCASCADE_WORKERS or up to 4)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rates = sub.add_parser("rates", help="phonon rate curves to CSV")
    _add_config_args(p_rates)
    p_rates.add_argument("--delta-min", type=float, default=0.1)
    p_rates.add_argument("--delta-max", type=float, default=2.0)
    p_rates.add_argument("--delta-step", type=float, default=0.05)
    p_rates.add_argument("--temperatures", metavar="LIST",
                         help="comma-separated temperatures in K "
                              "(default: the configured one)")
    p_rates.add_argument("--out", default="rates.csv", metavar="FILE")
    p_rates.set_defaults(func=_cmd_rates)

    p_val = sub.add_parser("validate", help="check a configuration")
    _add_config_args(p_val)
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
