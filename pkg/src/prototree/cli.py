"""Command line interface.

Subcommands: ``run`` (one search run), ``bench`` (a batch of independent
runs per problem), ``baseline`` (uniform random search), and ``list`` (the
problem registry).  Flags mirror the run configuration and default to the
standard benchmark settings; a flat ``key = value`` config file can override
the defaults, and explicit flags override the file.  Relative output paths
land in ``--out-dir``, or ``$PROTOTREE_OUT_DIR``, or the working directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import runner
from .benchmarks import make_problem, problem_names
from .constants import ConstantBranchSpec
from .datasets import write_csv
from .runner import RunConfig, emit
from .tree import SearchParams

ENV_OUT_DIR = "PROTOTREE_OUT_DIR"

_DEFAULTS = {
    "iterations": 1_000_000,
    "seed": 0,
    "k": 4.0,
    "delta_d": 0.001,
    "delta_p": 0.00075,
    "max_depth": 15,
    "terminal_bias": True,
    "m_low": 1,
    "m_high": 6,
    "digit_depth": 4,
    "target_error": None,
    "trace_stride": 100,
    "runs": 100,
    "parallelism": 1,
    "problem": None,
    "problems": None,
    "out_dir": None,
}

_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

_FILE_PARSERS = {
    "iterations": int,
    "seed": int,
    "k": float,
    "delta_d": float,
    "delta_p": float,
    "max_depth": int,
    "m_low": int,
    "m_high": int,
    "digit_depth": int,
    "target_error": float,
    "trace_stride": int,
    "runs": int,
    "parallelism": int,
    "problem": str,
    "problems": str,
    "out_dir": str,
}


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` comments and blank lines ignored."""
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key == "terminal_bias":
            if value.lower() not in _BOOL_WORDS:
                raise ValueError(f"{path}:{lineno}: expected a boolean, got {value!r}")
            values[key] = _BOOL_WORDS[value.lower()]
        elif key in _FILE_PARSERS:
            try:
                values[key] = _FILE_PARSERS[key](value)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def _settings(args) -> dict:
    values = dict(_DEFAULTS)
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for key in _DEFAULTS:
        supplied = getattr(args, key, None)
        if supplied is not None:
            values[key] = supplied
    return values


def _run_config(values: dict, problem: str) -> RunConfig:
    return RunConfig(
        problem=problem,
        search=SearchParams(
            k=values["k"],
            delta_d=values["delta_d"],
            delta_p=values["delta_p"],
            max_depth=values["max_depth"],
            terminal_bias_first_visit=values["terminal_bias"],
        ),
        constants=ConstantBranchSpec(
            m_low=values["m_low"], m_high=values["m_high"], digit_depth=values["digit_depth"]
        ),
        iterations=values["iterations"],
        target_error=values["target_error"],
        trace_stride=values["trace_stride"],
        seed=values["seed"],
    )


def _out_path(values: dict, name: str) -> Path:
    path = Path(name)
    if path.is_absolute():
        return path
    base = Path(values.get("out_dir") or os.environ.get(ENV_OUT_DIR) or ".")
    base.mkdir(parents=True, exist_ok=True)
    return base / path


def _print_result(result, verbose_expression=True):
    test = "none" if result.test_mse is None else f"{result.test_mse:.6e}"
    print(
        f"{result.problem} seed={result.seed}: train mse {result.best_train_mse:.6e}, "
        f"test mse {test}, {result.iterations} evaluations, "
        f"{result.node_count} nodes, {result.wall_time:.1f}s"
    )
    if verbose_expression:
        print(f"best expression: {result.best_expression}")


def _single_run(args, algorithm: str) -> int:
    values = _settings(args)
    problem_name = values["problem"]
    if not problem_name:
        raise ValueError("no problem given (use --problem or a config file)")
    config = _run_config(values, problem_name)
    problem = make_problem(problem_name)
    if getattr(args, "train_csv", None) or getattr(args, "test_csv", None):
        train, test, _ = runner.problem_datasets(problem, config.seed)
        if args.train_csv:
            write_csv(train, _out_path(values, args.train_csv), list(problem.var_names))
        if args.test_csv:
            if test is None:
                raise ValueError(f"{problem_name} defines no test set")
            write_csv(test, _out_path(values, args.test_csv), list(problem.var_names))
    if algorithm == "ptp":
        result = runner.run(config, problem)
    else:
        result = runner.random_search_baseline(config, problem)
    _print_result(result)
    if args.trace_out:
        emit(result, "trace-csv", _out_path(values, args.trace_out))
    if args.summary_out:
        emit(result, "summary-json", _out_path(values, args.summary_out), include_timing=args.include_timing)
    return 0


def cmd_run(args) -> int:
    return _single_run(args, "ptp")


def cmd_baseline(args) -> int:
    return _single_run(args, "random")


def cmd_bench(args) -> int:
    values = _settings(args)
    names = values["problems"] or values["problem"]
    if not names:
        raise ValueError("no problems given (use --problems or a config file)")
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    reports = []
    for name in names:
        make_problem(name)  # fail fast on unknown names before any long run
    for name in names:
        config = _run_config(values, name)
        report = runner.run_many(
            config, values["runs"], parallelism=values["parallelism"], algorithm=args.algorithm
        )
        reports.append(report)
        if args.artifacts:
            emit(report, "summary-json", _out_path(values, f"{name}.summary.json"),
                 include_timing=args.include_timing)
            emit(report, "histogram-csv", _out_path(values, f"{name}.histogram.csv"))
    emit(reports, "table-text")
    if args.table_out:
        emit(reports, "table-text", _out_path(values, args.table_out))
    return 0


def cmd_list(args) -> int:
    for name in problem_names():
        p = make_problem(name)
        test = p.test_spec.describe() if p.test_spec else "none"
        print(
            f"{name:<16} vars={','.join(p.var_names):<10} symbols={len(p.function_set):>2} "
            f"train={p.train_spec.describe():<18} test={test:<18} {p.description}"
        )
    return 0


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file overriding defaults")
    parser.add_argument("--iterations", type=int, help="evaluation budget per run (default 1000000)")
    parser.add_argument("--seed", type=int, help="base seed (default 0)")
    parser.add_argument("--k", type=float, help="rank power-law exponent (default 4)")
    parser.add_argument("--delta-d", dest="delta_d", type=float, help="depth discount factor (default 0.001)")
    parser.add_argument("--delta-p", dest="delta_p", type=float, help="stagnation penalty factor (default 0.00075)")
    parser.add_argument("--max-depth", dest="max_depth", type=int, help="maximum program depth (default 15)")
    parser.add_argument(
        "--terminal-bias",
        dest="terminal_bias",
        action=argparse.BooleanOptionalAction,
        help="draw a terminal on a node's first visit (default on)",
    )
    parser.add_argument("--m-low", dest="m_low", type=int, help="lowest float-position choice (default 1)")
    parser.add_argument("--m-high", dest="m_high", type=int, help="highest float-position choice (default 6)")
    parser.add_argument("--digit-depth", dest="digit_depth", type=int, help="digit nodes per constant (default 4)")
    parser.add_argument("--target-error", dest="target_error", type=float, help="stop once best mse reaches this")
    parser.add_argument("--trace-stride", dest="trace_stride", type=int, help="record the trace every N iterations")
    parser.add_argument("--out-dir", dest="out_dir", help=f"directory for outputs (or ${ENV_OUT_DIR})")
    parser.add_argument("--include-timing", action="store_true", help="include wall times in JSON artifacts")


def _add_single_outputs(parser: argparse.ArgumentParser):
    parser.add_argument("--problem", help="problem name (see 'list')")
    parser.add_argument("--trace-out", dest="trace_out", help="write the best-error trace CSV here")
    parser.add_argument("--summary-out", dest="summary_out", help="write the run summary JSON here")
    parser.add_argument("--train-csv", dest="train_csv", help="export the training data as CSV")
    parser.add_argument("--test-csv", dest="test_csv", help="export the test data as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prototree",
        description="Symbolic regression by sampling programs from a probabilistic prototype tree.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one search run")
    _add_common(p_run)
    _add_single_outputs(p_run)
    p_run.set_defaults(handler=cmd_run)

    p_base = sub.add_parser("baseline", help="execute one uniform random-search run")
    _add_common(p_base)
    _add_single_outputs(p_base)
    p_base.set_defaults(handler=cmd_baseline)

    p_bench = sub.add_parser("bench", help="run a batch of independent runs per problem")
    _add_common(p_bench)
    p_bench.add_argument("--problems", help="comma-separated problem names")
    p_bench.add_argument("--problem", help=argparse.SUPPRESS)
    p_bench.add_argument("--runs", type=int, help="independent runs per problem (default 100)")
    p_bench.add_argument("--parallelism", type=int, help="worker processes (default 1)")
    p_bench.add_argument("--algorithm", choices=("ptp", "random"), default="ptp", help="search to benchmark")
    p_bench.add_argument("--artifacts", action="store_true", help="write per-problem summary JSON and histogram CSV")
    p_bench.add_argument("--table-out", dest="table_out", help="also write the results table here")
    p_bench.set_defaults(handler=cmd_bench)

    p_list = sub.add_parser("list", help="list the problem registry")
    p_list.set_defaults(handler=cmd_list)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
