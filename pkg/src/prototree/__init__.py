"""Symbolic regression by sampling programs from one probabilistic prototype tree.

The tree holds, per argument slot and symbol choice, the best error of any
evaluated instance that used that choice.  Choices are drawn from a rank
power law over those errors, instances are scored on training data, and the
errors propagate back with a depth discount and a stagnation penalty.  The
package ships the standard benchmark problems, a seeded multi-run harness
with a uniform random-search baseline, and a CLI (``prototree``).
"""

from .benchmarks import DataSpec, Problem, generate, make_problem, problem_names, register_problem
from .constants import ConstantBranchSpec, ConstantPath, resolve_constant
from .datasets import Dataset, read_csv, write_csv
from .errors import InputMismatchError, NoSolutionError, ParseError, UnknownProblemError
from .expressions import (
    Expression,
    depth,
    evaluate,
    evaluate_rows,
    from_text,
    make_const,
    make_op,
    make_var,
    mse,
    size,
    to_text,
)
from .runner import (
    AggregateReport,
    RunConfig,
    RunResult,
    derive_run_seed,
    emit,
    mse_histogram,
    random_search_baseline,
    render,
    run,
    run_many,
    run_search,
)
from .symbols import FunctionSet, Symbol, build_function_set
from .tree import ChoiceRecord, PrototypeNode, PrototypeTree, SamplePath, SearchParams, choice_probabilities

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "ChoiceRecord",
    "ConstantBranchSpec",
    "ConstantPath",
    "DataSpec",
    "Dataset",
    "Expression",
    "FunctionSet",
    "InputMismatchError",
    "NoSolutionError",
    "ParseError",
    "PrototypeNode",
    "PrototypeTree",
    "Problem",
    "RunConfig",
    "RunResult",
    "SamplePath",
    "SearchParams",
    "Symbol",
    "UnknownProblemError",
    "build_function_set",
    "choice_probabilities",
    "depth",
    "derive_run_seed",
    "emit",
    "evaluate",
    "evaluate_rows",
    "from_text",
    "generate",
    "make_const",
    "make_op",
    "make_problem",
    "make_var",
    "mse",
    "mse_histogram",
    "problem_names",
    "random_search_baseline",
    "read_csv",
    "register_problem",
    "render",
    "resolve_constant",
    "run",
    "run_many",
    "run_search",
    "size",
    "to_text",
    "write_csv",
]
