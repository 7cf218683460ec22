"""Command-line entry point.

``ksdagg run`` executes one experiment/test combination (or all tests) and
writes rejection rates as CSV or JSON. Values come from, in increasing
precedence: scale presets, a config file (--config), explicit flags.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    SCALES,
    TESTS,
    emit_results,
    make_config,
    run_repetitions,
    worker_count,
)

# Config-file/flag fields forwarded to make_config as overrides.
_OVERRIDE_FIELDS = (
    "n",
    "alpha",
    "b1",
    "b2",
    "b3",
    "bootstrap",
    "reps",
    "l_lo",
    "l_hi",
    "star_bandwidths",
    "params",
    "dim",
    "hidden_dim",
    "burn_in",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksdagg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write rejection rates")
    run.add_argument("--experiment", choices=("gamma", "rbm"))
    run.add_argument("--test", choices=TESTS + ("all",))
    run.add_argument("--n", type=int, help="sample size per repetition")
    run.add_argument("--alpha", type=float, help="test level")
    run.add_argument("--b1", type=int, help="bootstrap replicates for the quantiles")
    run.add_argument("--b2", type=int, help="bootstrap replicates for the level correction")
    run.add_argument("--b3", type=int, help="bisection steps for the level correction")
    run.add_argument("--bootstrap", choices=("wild", "parametric"))
    run.add_argument("--reps", type=int, help="repetitions per parameter value")
    run.add_argument("--seed", type=int, help="master seed (default 0)")
    run.add_argument("--scale", choices=SCALES, help="preset sizes: paper or desk (default paper)")
    run.add_argument("--out", help="output path (default results.<format>)")
    run.add_argument("--format", choices=("csv", "json"), dest="fmt", help="output format (default csv)")
    run.add_argument("--config", help="JSON or YAML config file; flags override file values")
    run.add_argument("--l-lo", dest="l_lo", type=int, help="smallest power-of-two exponent of the collection")
    run.add_argument("--l-hi", dest="l_hi", type=int, help="largest power-of-two exponent of the collection")
    run.add_argument("--star-bandwidths", dest="star_bandwidths", type=int,
                     help="collection size for the geometric-ladder variant")
    run.add_argument("--params", type=float, nargs="+", help="alternative parameter grid")
    run.add_argument("--dim", type=int, help="RBM visible dimension")
    run.add_argument("--hidden-dim", dest="hidden_dim", type=int, help="RBM hidden dimension")
    run.add_argument("--burn-in", dest="burn_in", type=int, help="Gibbs burn-in sweeps")
    return parser


def load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        import yaml

        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise SystemExit(f"config file {path!r} must hold a single mapping")
    return data


def _merged_settings(args: argparse.Namespace) -> dict:
    settings = {}
    if args.config:
        settings.update(load_config_file(args.config))
    for name in _OVERRIDE_FIELDS + ("experiment", "test", "seed", "scale", "out", "fmt"):
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    return settings


def run_command(args: argparse.Namespace) -> int:
    settings = _merged_settings(args)
    experiment = settings.get("experiment")
    if experiment is None:
        raise SystemExit("an experiment is required (--experiment or config file)")
    test = settings.get("test", "ksdagg")
    scale = settings.get("scale", "paper")
    seed = int(settings.get("seed", 0))
    fmt = settings.get("fmt", settings.get("format", "csv"))
    out = settings.get("out", f"results.{fmt}")
    overrides = {k: settings.get(k) for k in _OVERRIDE_FIELDS}
    if overrides.get("params") is not None:
        overrides["params"] = tuple(float(p) for p in overrides["params"])

    tests = TESTS if test == "all" else (test,)
    rows = []
    for name in tests:
        config = make_config(experiment, name, scale=scale, seed=seed, **overrides)
        print(f"running {experiment}/{name} at {scale} scale "
              f"(n={config.n}, reps={config.reps}, workers={worker_count()})", file=sys.stderr)
        rows.extend(run_repetitions(config))
    emit_results(rows, fmt, out)
    print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return run_command(args)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
