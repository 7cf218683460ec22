"""Experiment harness: benchmark configs, repetition loop, result emission.

Two benchmark families ship with the package: a one-dimensional gamma
model tested against shape-shifted alternatives, and a Gaussian-Bernoulli
RBM tested against weight-noise alternatives. Each experiment/test pair
is run for R independent repetitions per alternative parameter; the
rejection rate per parameter is one result row.

Seeds are derived as a pure function of (master seed, experiment, test,
parameter index, repetition index), so results are independent of worker
scheduling and increasing R only appends repetitions.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ._validation import check_alpha, check_positive_int
from .aggregation import AggConfig, ksdagg_test
from .baselines import median_test, split_test
from .exceptions import ConfigError
from .kernels import geometric_collection, median_bandwidth, power_of_two_collection
from .models import GammaModel, make_random_rbm, perturb_rbm
from .rng import RngStream

logger = logging.getLogger("ksdagg")

EXPERIMENTS = ("gamma", "rbm")
TESTS = ("ksdagg", "ksdagg_star", "median", "split", "split_extra")
SCALES = ("paper", "desk")

WORKERS_ENV = "KSDAGG_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully pinned description of one experiment/test run."""

    experiment: str
    test: str
    n: int
    alpha: float
    b1: int
    b2: int
    b3: int
    bootstrap: str
    l_lo: int
    l_hi: int
    star_bandwidths: int
    params: tuple
    reps: int
    seed: int
    scale: str = "paper"
    dim: int = 1
    hidden_dim: int = 1
    burn_in: int = 2000
    family: str = "imq"
    imq_beta: float = 0.5

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS and self.experiment != "custom":
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.test not in TESTS and self.test not in _TEST_RUNNERS:
            raise ConfigError(f"unknown test {self.test!r}")
        check_alpha(self.alpha)
        check_positive_int(self.reps, "reps")
        check_positive_int(self.n, "n")
        if len(self.params) == 0:
            raise ConfigError("the alternative parameter grid must be non-empty")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))


# Scale presets. The paper-scale numbers follow the published benchmarks;
# the desk scale is sized so a full run fits in CI on one core.
_G = "gamma"
_R = "rbm"
_DEFAULTS = {
    (_G, "paper"): dict(n=500, reps=200, b1=500, b2=500, b3=50, params=(0.0, 0.1, 0.2, 0.3, 0.4),
                        l_lo=0, l_hi=10, bootstrap="parametric", dim=1),
    (_G, "desk"): dict(n=200, reps=100, b1=200, b2=200, b3=50, params=(0.0, 0.1, 0.2, 0.3, 0.4),
                       l_lo=0, l_hi=10, bootstrap="parametric", dim=1),
    (_R, "paper"): dict(n=1000, reps=200, b1=500, b2=500, b3=50, params=(0.0, 0.01, 0.02, 0.03),
                        l_lo=-20, l_hi=0, bootstrap="parametric", dim=50, hidden_dim=40),
    (_R, "desk"): dict(n=200, reps=100, b1=200, b2=200, b3=50, params=(0.0, 0.1),
                       l_lo=-20, l_hi=0, bootstrap="wild", dim=10, hidden_dim=5),
}
# The geometric-ladder variant uses more bootstrap replicates at paper
# scale, and a wild bootstrap for the RBM benchmark.
_STAR_OVERRIDES = {
    (_G, "paper"): dict(b1=2000, b2=2000),
    (_R, "paper"): dict(b1=2000, b2=2000, bootstrap="wild"),
}


def make_config(experiment: str, test: str, scale: str = "paper", seed: int = 0, **overrides) -> ExperimentConfig:
    """Build a config from experiment/test/scale presets plus overrides."""
    if scale not in SCALES:
        raise ConfigError(f"scale must be one of {SCALES}, got {scale!r}")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    fields = dict(alpha=0.05, b3=50, star_bandwidths=10, hidden_dim=1, burn_in=2000)
    fields.update(_DEFAULTS[(experiment, scale)])
    if test == "ksdagg_star":
        fields.update(_STAR_OVERRIDES.get((experiment, scale), {}))
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(experiment=experiment, test=test, scale=scale, seed=seed, **fields)


@dataclass(frozen=True)
class ResultRow:
    """One (experiment, test, parameter) rejection-rate estimate."""

    experiment: str
    test: str
    param: float
    n: int
    rate: float
    reps: int
    seed: int
    seconds: float

    def as_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "test": self.test,
            "param": self.param,
            "N": self.n,
            "rate": self.rate,
            "reps": self.reps,
            "seed": self.seed,
            "seconds": self.seconds,
        }


def repetition_stream(config: ExperimentConfig, param_index: int, rep: int) -> RngStream:
    """Root stream of one repetition; a pure function of the identifying key."""
    return RngStream(config.seed, (config.experiment, config.test, param_index, rep))


def _base_model(config: ExperimentConfig):
    """The model under test; fixed across all repetitions of an experiment."""
    if config.experiment == "gamma":
        return GammaModel(5.0, 5.0)
    if config.experiment == "rbm":
        model_stream = RngStream(config.seed, (config.experiment, "model"))
        return make_random_rbm(config.dim, config.hidden_dim, model_stream.generator(), burn_in=config.burn_in)
    raise ConfigError(f"no builtin model for experiment {config.experiment!r}")


def _data_model(config: ExperimentConfig, model, param: float, stream: RngStream):
    """The data-generating distribution for one alternative parameter."""
    if config.experiment == "gamma":
        return GammaModel(5.0 + param, 5.0)
    if config.experiment == "rbm":
        return perturb_rbm(model, param, stream.child("perturb").generator())
    raise ConfigError(f"no builtin data model for experiment {config.experiment!r}")


def _run_ksdagg(X, model, config, stream, collection):
    agg = AggConfig(
        collection=collection,
        alpha=config.alpha,
        b1=config.b1,
        b2=config.b2,
        b3=config.b3,
        bootstrap=config.bootstrap,
        family=config.family,
        imq_beta=config.imq_beta,
    )
    return ksdagg_test(X, model, agg, stream).reject


def _run_median(X, model, config, stream, collection):
    report = median_test(X, model, config.alpha, config.b1, config.bootstrap, stream,
                         family=config.family, imq_beta=config.imq_beta)
    return report.reject


def _run_split(X, model, config, stream, collection, extra=None):
    report = split_test(X, model, collection, config.alpha, config.b1, config.bootstrap, stream,
                        extra=extra, family=config.family, imq_beta=config.imq_beta)
    return report.reject


_TEST_RUNNERS = {}


def register_test_runner(name: str, runner) -> None:
    """Register a custom test for the repetition loop (used by the tests)."""
    _TEST_RUNNERS[name] = runner


def repetition_outcome(config: ExperimentConfig, param_index: int, rep: int) -> bool:
    """Run one repetition (fresh data draw plus full test); True on rejection."""
    param = config.params[param_index]
    stream = repetition_stream(config, param_index, rep)
    model = _base_model(config)
    q = _data_model(config, model, param, stream)
    X = q.sample(config.n, stream.child("data").generator())

    if config.test in _TEST_RUNNERS:
        return bool(_TEST_RUNNERS[config.test](config, param_index, rep, X, model, stream))

    if config.test == "ksdagg_star":
        collection = geometric_collection(X, config.star_bandwidths)
    else:
        collection = power_of_two_collection(median_bandwidth(X), config.l_lo, config.l_hi)

    test_stream = stream.child("test")
    if config.test in ("ksdagg", "ksdagg_star"):
        return bool(_run_ksdagg(X, model, config, test_stream, collection))
    if config.test == "median":
        return bool(_run_median(X, model, config, test_stream, collection))
    if config.test == "split":
        return bool(_run_split(X, model, config, test_stream, collection))
    if config.test == "split_extra":
        extra = q.sample(config.n, stream.child("extra").generator())
        return bool(_run_split(X, model, config, test_stream, collection, extra=extra))
    raise ConfigError(f"unknown test {config.test!r}")


def _repetition_task(args) -> tuple[int, int, bool]:
    config, param_index, rep = args
    try:
        return param_index, rep, repetition_outcome(config, param_index, rep)
    except Exception as exc:
        stream = repetition_stream(config, param_index, rep)
        raise RuntimeError(
            f"repetition failed: experiment={config.experiment} test={config.test} "
            f"param={config.params[param_index]} rep={rep} seed={stream.seed} key={stream.key}"
        ) from exc


def worker_count() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(value)) if value else 1
    except ValueError:
        logger.warning("ignoring invalid %s=%r", WORKERS_ENV, value)
        return 1


def _log_budget_warnings(config: ExperimentConfig) -> None:
    """Log when the bootstrap budgets fall below the power-guarantee bounds.

    The bounds target a type II error of 0.5 and are sufficient conditions
    for the power guarantees only; smaller budgets stay correct, so this
    never raises.
    """
    beta = 0.5
    log_term = math.log(8.0 / beta) + config.alpha * (1 - config.alpha)
    if config.test in ("ksdagg", "ksdagg_star"):
        n_kernels = config.star_bandwidths if config.test == "ksdagg_star" else config.l_hi - config.l_lo + 1
        w_max_inv = float(n_kernels)  # uniform weights
        checks = (
            ("b1", config.b1, 12.0 * w_max_inv**2 * log_term / config.alpha**2),
            ("b2", config.b2, 8.0 * math.log(2.0 / beta) / config.alpha**2),
            ("b3", config.b3, math.log2(4.0 * w_max_inv / config.alpha)),
        )
    else:
        checks = (("b1", config.b1, 3.0 * log_term / config.alpha**2),)
    for name, value, bound in checks:
        if value < bound:
            logger.warning(
                "%s=%d is below the power-guarantee bound %.3g (beta=%.2f); level is unaffected",
                name, value, bound, beta,
            )


def run_repetitions(config: ExperimentConfig, clock=time.perf_counter) -> list[ResultRow]:
    """Estimate the rejection rate for every alternative parameter.

    Repetitions run on a process pool capped by the KSDAGG_WORKERS
    environment variable (default 1). Outcomes are keyed by
    (parameter index, repetition index), so output is identical for any
    worker count.
    """
    _log_budget_warnings(config)
    workers = worker_count()
    rows = []
    for param_index, param in enumerate(config.params):
        t0 = clock()
        tasks = [(config, param_index, rep) for rep in range(config.reps)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_repetition_task, tasks, chunksize=1))
        else:
            outcomes = [_repetition_task(t) for t in tasks]
        outcomes.sort(key=lambda item: (item[0], item[1]))
        n_reject = sum(int(ok) for _, _, ok in outcomes)
        rows.append(
            ResultRow(
                experiment=config.experiment,
                test=config.test,
                param=param,
                n=config.n,
                rate=n_reject / config.reps,
                reps=config.reps,
                seed=config.seed,
                seconds=clock() - t0,
            )
        )
    return rows


CSV_HEADER = "experiment,test,param,N,rate,reps,seed,seconds"


def format_csv(rows) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.experiment},{row.test},{row.param:g},{row.n},{row.rate:.6f},"
            f"{row.reps},{row.seed},{row.seconds:.6f}"
        )
    return "\n".join(lines) + "\n"


def format_json(rows) -> str:
    return json.dumps([row.as_dict() for row in rows], indent=2) + "\n"


def emit_results(rows, fmt: str, path) -> None:
    """Write rows to ``path`` as CSV (exact column contract) or JSON."""
    if fmt == "csv":
        text = format_csv(rows)
    elif fmt == "json":
        text = format_json(rows)
    else:
        raise ConfigError(f"format must be 'csv' or 'json', got {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path!r}: {exc}") from exc
