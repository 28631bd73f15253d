"""``tdoa`` command line: simulate | estimate | campaign | crlb | check-geometry.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path


from .errors import ConfigError, NumericalError, TdoaError
from .harness import ExperimentConfig, emit_results, load_config, run_campaign
from .identifiability import check_assumption5
from .likelihood import fisher_information
from .model import (
    NoiseModel,
    deploy_fixed_paper_array,
    deploy_uniform_cube,
    load_array_csv,
    load_measurements_csv,
    make_rng,
    save_array_csv,
    save_measurements_csv,
    simulate,
)
from .pipeline import GnConfig, localize

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_SOURCE = {"uniform_cube": "15,15,15", "fixed_array": "52,52,52"}


def _vector(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _array_from_args(args, rng=None):
    if getattr(args, "array", None):
        return load_array_csv(args.array)
    scenario = args.scenario or "fixed_array"
    if scenario == "uniform_cube":
        return deploy_uniform_cube(args.edge, args.size, rng=rng or make_rng(args.seed, 0, 0))
    if scenario == "fixed_array":
        return deploy_fixed_paper_array(args.size)
    raise ConfigError("custom_csv scenario needs --array")


def _source(args):
    if args.source is not None:
        return args.source
    return _vector(DEFAULT_SOURCE.get(args.scenario or "fixed_array", "52,52,52"))


def _emit(obj, out=None, name="report.json"):
    text = json.dumps(obj, indent=2)
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text)
    print(text)


def cmd_simulate(args):
    rng = make_rng(args.seed, 0, 0)
    array = _array_from_args(args, rng)
    sigma = 5.0 if args.sigma is None else args.sigma
    meas = simulate(array, _source(args), NoiseModel(sigma, args.seed), rng=rng)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    save_array_csv(array, out / "sensors.csv")
    save_measurements_csv(meas, out / "measurements.csv")
    print(f"wrote {out / 'sensors.csv'} and {out / 'measurements.csv'} (m={array.m})")


def cmd_estimate(args):
    array = load_array_csv(args.array)
    sigma2 = None if args.sigma is None else args.sigma**2
    meas = load_measurements_csv(args.measurements, array, true_sigma2=sigma2)
    cfg = GnConfig(
        max_iterations=args.iterations,
        damping=args.damping,
        use_true_sigma2=sigma2 is not None,
    )
    _emit(localize(meas, cfg).to_dict(), args.out, "estimate.json")


def cmd_crlb(args):
    array = _array_from_args(args)
    sigma = 5.0 if args.sigma is None else args.sigma
    _emit(fisher_information(array, _source(args), sigma**2).to_dict(), args.out, "crlb.json")


def cmd_check_geometry(args):
    array = _array_from_args(args)
    probe = _source(args) if (args.source is not None or not args.array) else None
    _emit(check_assumption5(array, probe).to_dict(), args.out, "geometry.json")


def cmd_campaign(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.seed_given:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.sigma is not None:
        overrides["sigma"] = args.sigma
    if args.source is not None:
        overrides["source"] = args.source
    if args.sizes is not None:
        overrides["sizes"] = args.sizes
    if args.array:
        overrides["array_csv"] = args.array
    if args.out:
        overrides["output_dir"] = args.out
    cfg = replace(cfg, **overrides) if overrides else cfg
    res = run_campaign(cfg)
    for s in res.stats:
        print(
            f"{s.estimator:28s} size={s.size:5d} m={s.m:5d} bias={s.bias:.4g} "
            f"rmse={s.rmse:.4g} rcrlb={s.rcrlb:.4g} sigma2_rmse={s.sigma2_rmse:.4g} "
            f"diverged={s.divergence_count}"
        )
    if cfg.output_dir:
        for p in emit_results(res, cfg.output_dir):
            print(f"wrote {p}")


def build_parser():
    p = argparse.ArgumentParser(prog="tdoa", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, geometry=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--source", type=_vector, help="x,y[,z]")
        if geometry:
            sp.add_argument("--scenario", choices=["uniform_cube", "fixed_array", "custom_csv"])
            sp.add_argument("--array", help="sensor CSV (reference first)")
            sp.add_argument("--size", type=int, default=1, help="m for uniform_cube, repeats T otherwise")
            sp.add_argument("--edge", type=float, default=100.0)

    sp = sub.add_parser("simulate", help="simulate noisy range differences")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="run the two-step estimator on CSV data")
    common(sp, geometry=False)
    sp.add_argument("--array", required=True)
    sp.add_argument("--measurements", required=True)
    sp.add_argument("--iterations", type=int, default=1)
    sp.add_argument("--damping", type=float, default=0.0)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("crlb", help="Fisher information and CRLB at a source position")
    common(sp)
    sp.set_defaults(func=cmd_crlb)

    sp = sub.add_parser("check-geometry", help="conic/quadric rank test of a deployment")
    common(sp)
    sp.set_defaults(func=cmd_check_geometry)

    sp = sub.add_parser("campaign", help="Monte-Carlo campaign")
    sp.add_argument("--config", help="TOML file mirroring ExperimentConfig")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--scenario", choices=["uniform_cube", "fixed_array", "custom_csv"])
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--source", type=_vector)
    sp.add_argument("--sizes", type=lambda s: tuple(int(v) for v in s.split(",")))
    sp.add_argument("--array")
    sp.set_defaults(func=cmd_campaign)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    if args.command == "campaign":
        args.seed_given = args.seed is not None
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TdoaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
