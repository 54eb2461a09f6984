"""Experiment orchestration: single runs, multi-run batches, and emission.

A run executes the sample -> evaluate -> propagate loop against one problem
until the iteration budget (or an optional target error) is reached.  All
randomness derives from the single ``RunConfig.seed``: training data, test
data and the search stream use independent child seeds, and batch runs give
run *i* a seed mixed deterministically from ``(base_seed, i)`` so results do
not depend on the degree of parallelism.

Emitted artifacts (trace CSV, summary JSON, histogram CSV, text table) are
byte-deterministic functions of the configuration and seed; wall-clock
timings are kept in memory and only written when explicitly requested.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .benchmarks import Problem, make_problem
from .constants import ConstantBranchSpec, resolve_constant
from .expressions import Expression, mse, to_text
from .symbols import FunctionSet
from .tree import PrototypeTree, SearchParams

EMIT_FORMATS = ("summary-json", "trace-csv", "histogram-csv", "table-text")

#: instance-error cache entries kept per run before starting over
_MSE_CACHE_LIMIT = 500_000


@dataclass(frozen=True)
class RunConfig:
    """Everything one run depends on; defaults are the benchmark settings."""

    problem: str
    search: SearchParams = SearchParams()
    constants: ConstantBranchSpec = ConstantBranchSpec()
    iterations: int = 1_000_000
    target_error: float | None = None
    trace_stride: int = 100
    seed: int = 0
    record_instances: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iteration budget must be at least 1")
        if self.trace_stride < 1:
            raise ValueError("trace stride must be at least 1")

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "iterations": self.iterations,
            "target_error": self.target_error,
            "trace_stride": self.trace_stride,
            "seed": self.seed,
            "k": self.search.k,
            "delta_d": self.search.delta_d,
            "delta_p": self.search.delta_p,
            "max_depth": self.search.max_depth,
            "terminal_bias_first_visit": self.search.terminal_bias_first_visit,
            "m_low": self.constants.m_low,
            "m_high": self.constants.m_high,
            "digit_depth": self.constants.digit_depth,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        return RunConfig(
            problem=d["problem"],
            search=SearchParams(
                k=d["k"],
                delta_d=d["delta_d"],
                delta_p=d["delta_p"],
                max_depth=d["max_depth"],
                terminal_bias_first_visit=d["terminal_bias_first_visit"],
            ),
            constants=ConstantBranchSpec(m_low=d["m_low"], m_high=d["m_high"], digit_depth=d["digit_depth"]),
            iterations=d["iterations"],
            target_error=d.get("target_error"),
            trace_stride=d["trace_stride"],
            seed=d["seed"],
        )


@dataclass
class RunResult:
    """Outcome of one run.

    ``best_train_mse`` is the best raw training error seen during the run
    (the final value of the trace); ``best_expression`` and ``test_mse``
    come from the greedy best path through the final tree.
    """

    problem: str
    algorithm: str
    seed: int
    best_expression: str
    best_train_mse: float
    test_mse: float | None
    trace: list
    iterations: int
    node_count: int
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "problem": self.problem,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "best_expression": self.best_expression,
            "best_train_mse": self.best_train_mse,
            "test_mse": self.test_mse,
            "trace": [[it, err] for it, err in self.trace],
            "iterations": self.iterations,
            "node_count": self.node_count,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    @staticmethod
    def from_dict(d: dict) -> "RunResult":
        return RunResult(
            problem=d["problem"],
            algorithm=d["algorithm"],
            seed=d["seed"],
            best_expression=d["best_expression"],
            best_train_mse=d["best_train_mse"],
            test_mse=d["test_mse"],
            trace=[(int(it), float(err)) for it, err in d["trace"]],
            iterations=d["iterations"],
            node_count=d["node_count"],
            wall_time=d.get("wall_time", 0.0),
        )

    def best_so_far(self, iteration: int) -> float:
        """Best training error at or before ``iteration``, read off the trace."""
        best = None
        for it, err in self.trace:
            if it > iteration:
                break
            best = err
        if best is None:
            raise ValueError(f"trace has no entry at or before iteration {iteration}")
        return best


@dataclass
class AggregateReport:
    """Order statistics plus the per-run results they derive from."""

    problem: str
    algorithm: str
    base_seed: int
    config: RunConfig
    seeds: list
    runs: list
    train_best: float
    train_median: float
    test_best: float | None
    test_median: float | None
    train_histogram: list
    test_histogram: list | None

    def to_dict(self, include_timing: bool = False) -> dict:
        return {
            "problem": self.problem,
            "algorithm": self.algorithm,
            "base_seed": self.base_seed,
            "config": self.config.to_dict(),
            "seeds": list(self.seeds),
            "runs": [r.to_dict(include_timing) for r in self.runs],
            "aggregate": {
                "train_best": self.train_best,
                "train_median": self.train_median,
                "test_best": self.test_best,
                "test_median": self.test_median,
            },
            "train_histogram": [[lo, hi, n] for lo, hi, n in self.train_histogram],
            "test_histogram": None if self.test_histogram is None else [[lo, hi, n] for lo, hi, n in self.test_histogram],
        }

    @staticmethod
    def from_dict(d: dict) -> "AggregateReport":
        agg = d["aggregate"]
        return AggregateReport(
            problem=d["problem"],
            algorithm=d["algorithm"],
            base_seed=d["base_seed"],
            config=RunConfig.from_dict(d["config"]),
            seeds=list(d["seeds"]),
            runs=[RunResult.from_dict(r) for r in d["runs"]],
            train_best=agg["train_best"],
            train_median=agg["train_median"],
            test_best=agg["test_best"],
            test_median=agg["test_median"],
            train_histogram=[(lo, hi, n) for lo, hi, n in d["train_histogram"]],
            test_histogram=None
            if d["test_histogram"] is None
            else [(lo, hi, n) for lo, hi, n in d["test_histogram"]],
        )


# --- seeding ------------------------------------------------------------------

def derive_run_seed(base_seed: int, index: int) -> int:
    """Deterministic seed for run ``index`` of a batch, independent of order."""
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1, np.uint64)[0])


def _streams(seed: int):
    train_ss, test_ss, search_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.Generator(np.random.PCG64(train_ss)),
        np.random.Generator(np.random.PCG64(test_ss)),
        np.random.Generator(np.random.PCG64(search_ss)),
    )


def problem_datasets(problem: Problem, seed: int):
    """The train/test datasets and search stream a run with this seed uses."""
    train_rng, test_rng, search_rng = _streams(seed)
    return problem.training_data(train_rng), problem.test_data(test_rng), search_rng


# --- single runs ----------------------------------------------------------------

def run_search(config: RunConfig, problem: Problem | None = None):
    """Execute one search run; returns ``(RunResult, PrototypeTree)``.

    The tree comes back alive for inspection (state dumps, replay checks);
    plain :func:`run` discards it.
    """
    started = time.perf_counter()
    if problem is None:
        problem = make_problem(config.problem)
    train, test, rng = problem_datasets(problem, config.seed)
    tree = PrototypeTree(
        problem.function_set,
        config.search,
        config.constants if problem.uses_constant_branch else None,
        record_instances=config.record_instances,
    )
    trace = []
    iterations = 0
    # identical instances score identically, so cache errors by the sampled
    # choice sequence (a prefix code for the expression)
    seen = {}
    for it in range(1, config.iterations + 1):
        path = tree.sample_instance(rng)
        key = tuple(step[1] for step in path.entries)
        raw = seen.get(key)
        if raw is None:
            raw = mse(path.expression, train)
            if len(seen) >= _MSE_CACHE_LIMIT:
                seen.clear()
            seen[key] = raw
        if not tree.propagate(path, raw):
            tree.penalize_stagnation(path)
        iterations = it
        if it == 1 or it % config.trace_stride == 0:
            trace.append((it, tree.best_raw_error))
        if config.target_error is not None and tree.best_raw_error <= config.target_error:
            break
    if trace[-1][0] != iterations:
        trace.append((iterations, tree.best_raw_error))
    best_expr = tree.best_path_expression()
    result = RunResult(
        problem=problem.name,
        algorithm="ptp",
        seed=config.seed,
        best_expression=to_text(best_expr),
        best_train_mse=tree.best_raw_error,
        test_mse=mse(best_expr, test) if test is not None else None,
        trace=trace,
        iterations=iterations,
        node_count=tree.node_count(),
        wall_time=time.perf_counter() - started,
    )
    return result, tree


def run(config: RunConfig, problem: Problem | None = None) -> RunResult:
    """One prototype-tree search run."""
    return run_search(config, problem)[0]


def _uniform_instance(fset: FunctionSet, constants: ConstantBranchSpec, max_depth: int, rng, depth=1) -> Expression:
    choices = fset.symbols if depth < max_depth else fset.terminals
    sym = choices[int(rng.integers(0, len(choices)))]
    if sym.arity == 0:
        if sym.is_constant_marker:
            m = constants.m_values[int(rng.integers(0, len(constants.m_values)))]
            digits = [int(rng.integers(0, 10)) for _ in range(constants.digit_depth)]
            return Expression(sym, (), resolve_constant(m, digits, constants))
        return Expression(sym)
    kids = tuple(_uniform_instance(fset, constants, max_depth, rng, depth + 1) for _ in range(sym.arity))
    return Expression(sym, kids)


def random_search_baseline(config: RunConfig, problem: Problem | None = None) -> RunResult:
    """Uniform random search over the same program space; the sanity baseline.

    Samples every choice uniformly and stores no errors, so nothing is
    materialized (``node_count`` is reported as 0).
    """
    started = time.perf_counter()
    if problem is None:
        problem = make_problem(config.problem)
    train, test, rng = problem_datasets(problem, config.seed)
    fset = problem.function_set
    max_depth = config.search.max_depth
    best = math.inf
    best_expr = None
    trace = []
    iterations = 0
    for it in range(1, config.iterations + 1):
        expr = _uniform_instance(fset, config.constants, max_depth, rng)
        raw = mse(expr, train)
        if raw < best:
            best = raw
            best_expr = expr
        iterations = it
        if it == 1 or it % config.trace_stride == 0:
            trace.append((it, best))
        if config.target_error is not None and best <= config.target_error:
            break
    if trace[-1][0] != iterations:
        trace.append((iterations, best))
    return RunResult(
        problem=problem.name,
        algorithm="random",
        seed=config.seed,
        best_expression=to_text(best_expr),
        best_train_mse=best,
        test_mse=mse(best_expr, test) if test is not None else None,
        trace=trace,
        iterations=iterations,
        node_count=0,
        wall_time=time.perf_counter() - started,
    )


# --- batches --------------------------------------------------------------------

def _run_indexed(args):
    config, algorithm = args
    fn = run if algorithm == "ptp" else random_search_baseline
    return fn(config)


def run_many(config: RunConfig, runs: int, parallelism: int = 1, algorithm: str = "ptp") -> AggregateReport:
    """``runs`` independent runs with seeds derived from ``config.seed``.

    Results are identical for any ``parallelism``; any failing run aborts the
    batch with its seed named.
    """
    if runs < 1:
        raise ValueError("need at least one run")
    if algorithm not in ("ptp", "random"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    seeds = [derive_run_seed(config.seed, i) for i in range(runs)]
    configs = [replace(config, seed=s) for s in seeds]
    results = []
    if parallelism <= 1:
        for cfg in configs:
            try:
                results.append(_run_indexed((cfg, algorithm)))
            except Exception as exc:
                raise RuntimeError(f"run with seed {cfg.seed} failed: {exc}") from exc
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_run_indexed, (cfg, algorithm)) for cfg in configs]
            for cfg, fut in zip(configs, futures):
                exc = fut.exception()
                if exc is not None:
                    raise RuntimeError(f"run with seed {cfg.seed} failed: {exc}") from exc
                results.append(fut.result())
    return aggregate(config, seeds, results, algorithm)


def aggregate(config: RunConfig, seeds, results, algorithm: str = "ptp") -> AggregateReport:
    """Fold per-run results into the order statistics and histograms."""
    train = [r.best_train_mse for r in results]
    tests = [r.test_mse for r in results if r.test_mse is not None]
    return AggregateReport(
        problem=config.problem,
        algorithm=algorithm,
        base_seed=config.seed,
        config=config,
        seeds=list(seeds),
        runs=list(results),
        train_best=float(np.min(train)),
        train_median=float(np.median(train)),
        test_best=float(np.min(tests)) if tests else None,
        test_median=float(np.median(tests)) if tests else None,
        train_histogram=mse_histogram(train),
        test_histogram=mse_histogram(tests) if tests else None,
    )


def mse_histogram(values, zero_floor: float = 1e-32) -> list:
    """Counts per decade bin ``[10^e, 10^(e+1))``; ~zero values get ``[0, floor)``."""
    bins = {}
    zero_count = 0
    for v in values:
        if v < zero_floor:
            zero_count += 1
            continue
        e = math.floor(math.log10(v))
        bins[e] = bins.get(e, 0) + 1
    out = []
    if zero_count:
        out.append((0.0, zero_floor, zero_count))
    for e in sorted(bins):
        out.append((10.0 ** e, 10.0 ** (e + 1), bins[e]))
    return out


# --- emission ---------------------------------------------------------------------

def _table_text(reports) -> str:
    if isinstance(reports, AggregateReport):
        reports = [reports]
    header = f"{'problem':<16} {'runs':>5} {'train best':>12} {'train median':>13} {'test best':>12} {'test median':>12}"
    lines = [header, "-" * len(header)]
    for rep in reports:
        fmt = lambda v: "none" if v is None else f"{v:.3e}"
        lines.append(
            f"{rep.problem:<16} {len(rep.runs):>5} {fmt(rep.train_best):>12} {fmt(rep.train_median):>13}"
            f" {fmt(rep.test_best):>12} {fmt(rep.test_median):>12}"
        )
    return "\n".join(lines) + "\n"


def _trace_csv(result: RunResult) -> str:
    lines = ["iteration,best_mse"]
    lines.extend(f"{it},{err!r}" for it, err in result.trace)
    return "\n".join(lines) + "\n"


def _histogram_csv(report: AggregateReport) -> str:
    lines = ["set,bin_low,bin_high,count"]
    for lo, hi, n in report.train_histogram:
        lines.append(f"train,{lo!r},{hi!r},{n}")
    if report.test_histogram is not None:
        for lo, hi, n in report.test_histogram:
            lines.append(f"test,{lo!r},{hi!r},{n}")
    return "\n".join(lines) + "\n"


def render(obj, format: str, include_timing: bool = False) -> str:
    """Render a result or report to the given format's text."""
    if format == "summary-json":
        return json.dumps(obj.to_dict(include_timing), indent=2, sort_keys=True) + "\n"
    if format == "trace-csv":
        if not isinstance(obj, RunResult):
            raise ValueError("trace-csv renders a single RunResult")
        return _trace_csv(obj)
    if format == "histogram-csv":
        if not isinstance(obj, AggregateReport):
            raise ValueError("histogram-csv renders an AggregateReport")
        return _histogram_csv(obj)
    if format == "table-text":
        return _table_text(obj)
    raise ValueError(f"unknown format {format!r} (choose from {', '.join(EMIT_FORMATS)})")


def emit(obj, format: str, destination=None, include_timing: bool = False) -> None:
    """Write a rendering of ``obj`` to a path, a file object, or stdout."""
    text = render(obj, format, include_timing)
    if destination is None or destination == "-":
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text)
