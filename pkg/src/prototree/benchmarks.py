"""The benchmark problems: targets, function sets, and data generation.

Each problem names its target function, the symbol alphabet the search may
use, and how to build its training (and optional testing) set.  ``U[a,b,n]``
draws n points per variable uniformly from [a, b]; ``E[a,b,s]`` enumerates
equidistant points a, a+s, ... up to b, expanded to a full grid for
multi-variable problems.

Targets are stored as expressions of the engine's own operators whenever the
alphabet can express them exactly, so a run that rediscovers the target
scores a mean squared error of exactly zero on its own data.  The two
targets that need machinery outside their alphabet (the harmonic-sum and the
inverse-quartic-sum problems) use plain vectorized callables instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .datasets import Dataset
from .errors import UnknownProblemError
from .expressions import Expression, evaluate_rows, make_const, make_op, make_var
from .symbols import FunctionSet, build_function_set


@dataclass(frozen=True)
class DataSpec:
    """How to generate one dataset; ``kind`` is ``uniform`` or ``equidistant``."""

    kind: str
    low: float
    high: float
    count: int | None = None  # uniform draws per variable
    step: float | None = None  # equidistant spacing

    def __post_init__(self):
        if self.kind not in ("uniform", "equidistant"):
            raise ValueError(f"unknown data spec kind {self.kind!r}")
        if not self.low < self.high:
            raise ValueError("need low < high")
        if self.kind == "uniform" and (self.count is None or self.count < 1):
            raise ValueError("uniform specs need count >= 1")
        if self.kind == "equidistant" and (self.step is None or self.step <= 0):
            raise ValueError("equidistant specs need step > 0")

    def describe(self) -> str:
        if self.kind == "uniform":
            return f"U[{self.low:g},{self.high:g},{self.count}]"
        return f"E[{self.low:g},{self.high:g},{self.step:g}]"


def uniform(low: float, high: float, count: int) -> DataSpec:
    return DataSpec("uniform", low, high, count=count)


def equidistant(low: float, high: float, step: float) -> DataSpec:
    return DataSpec("equidistant", low, high, step=step)


def _equidistant_axis(spec: DataSpec) -> np.ndarray:
    span = (spec.high - spec.low) / spec.step
    steps = int(round(span)) if abs(span - round(span)) < 1e-9 else int(np.floor(span + 1e-9))
    axis = spec.low + np.arange(steps + 1, dtype=np.float64) * spec.step
    # guard ulp-scale overshoot of the upper bound
    return np.minimum(axis, spec.high)


def generate(spec: DataSpec, target: Callable[[np.ndarray], np.ndarray], n_vars: int, rng=None) -> Dataset:
    """Build a dataset from ``spec``; ``target`` maps an (n, d) matrix to targets.

    Uniform specs draw every variable of every row independently and need an
    ``rng``; equidistant specs enumerate a deterministic grid.
    """
    if spec.kind == "uniform":
        if rng is None:
            raise ValueError("uniform data specs need an rng")
        X = rng.uniform(spec.low, spec.high, size=(spec.count, n_vars))
    else:
        axis = _equidistant_axis(spec)
        if n_vars == 1:
            X = axis.reshape(-1, 1)
        else:
            grids = np.meshgrid(*([axis] * n_vars), indexing="ij")
            X = np.stack([g.ravel() for g in grids], axis=1)
    y = np.asarray(target(X), dtype=np.float64)
    return Dataset(X=X, y=np.broadcast_to(y, (X.shape[0],)).copy())


@dataclass(frozen=True)
class Problem:
    """One benchmark: target, alphabet, and data recipes."""

    name: str
    description: str
    function_set: FunctionSet
    var_names: tuple[str, ...]
    train_spec: DataSpec
    test_spec: DataSpec | None
    target_expression: Expression | None = None
    target_fn: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def uses_constant_branch(self) -> bool:
        return self.function_set.has_constant_marker

    def target_values(self, X: np.ndarray) -> np.ndarray:
        if self.target_expression is not None:
            out = evaluate_rows(self.target_expression, X)
            return np.broadcast_to(out, (np.asarray(X).shape[0],)).copy()
        return np.asarray(self.target_fn(X), dtype=np.float64)

    def training_data(self, rng=None) -> Dataset:
        return generate(self.train_spec, self.target_values, self.n_vars, rng)

    def test_data(self, rng=None) -> Dataset | None:
        if self.test_spec is None:
            return None
        return generate(self.test_spec, self.target_values, self.n_vars, rng)


# --- target constructions ---------------------------------------------------

def _nguyen4_target() -> Expression:
    x = make_var(0, "x")
    powers = {2: make_op("mul", x, x)}
    for p in range(3, 7):
        powers[p] = make_op("mul", powers[p - 1], x)
    total = powers[6]
    for p in (5, 4, 3, 2):
        total = make_op("add", total, powers[p])
    return make_op("add", total, x)


def _nguyen7_target() -> Expression:
    x = make_var(0, "x")
    one = make_const(1.0)
    return make_op(
        "add",
        make_op("log", make_op("add", x, one)),
        make_op("log", make_op("add", make_op("mul", x, x), one)),
    )


def _korns12_target() -> Expression:
    w = make_var(2, "w")
    x = make_var(3, "x")
    return make_op(
        "sub",
        make_const(2.0),
        make_op(
            "mul",
            make_const(2.1),
            make_op("mul", make_op("cos", make_op("mul", make_const(9.8), x)),
                    make_op("sin", make_op("mul", make_const(1.3), w))),
        ),
    )


def _vladislavleva4_target() -> Expression:
    total = None
    for i, nm in enumerate(("u", "v", "w", "x", "y")):
        v = make_var(i, nm)
        shifted = make_op("sub", v, make_const(3.0))
        sq = make_op("mul", shifted, shifted)
        total = sq if total is None else make_op("add", total, sq)
    return make_op("div", make_const(10.0), make_op("add", make_const(5.0), total))


def _pagie1_targets(X: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        x, y = X[:, 0], X[:, 1]
        return 1.0 / (1.0 + x ** -4.0) + 1.0 / (1.0 + y ** -4.0)


def _keijzer6_targets(X: np.ndarray) -> np.ndarray:
    # harmonic sum 1/1 + ... + 1/floor(x), summed in ascending order
    n = np.maximum(np.floor(X[:, 0]).astype(np.int64), 0)
    top = int(n.max(initial=0))
    table = np.zeros(top + 1, dtype=np.float64)
    if top >= 1:
        table[1:] = np.cumsum(1.0 / np.arange(1, top + 1, dtype=np.float64))
    return table[n]


# --- registry ----------------------------------------------------------------

def _nguyen_set() -> FunctionSet:
    return build_function_set(
        ["add", "sub", "mul", "div", "sin", "cos", "exp", "log"], ["x"], literals=[1.0]
    )


_FACTORIES = {}


def _register(factory):
    problem = factory()
    _FACTORIES[problem.name] = factory
    return factory


@_register
def _nguyen4() -> Problem:
    return Problem(
        name="nguyen4",
        description="sixth-degree polynomial x^6+x^5+x^4+x^3+x^2+x",
        function_set=_nguyen_set(),
        var_names=("x",),
        train_spec=uniform(-1.0, 1.0, 20),
        test_spec=None,
        target_expression=_nguyen4_target(),
    )


@_register
def _nguyen7() -> Problem:
    return Problem(
        name="nguyen7",
        description="log(x+1) + log(x^2+1)",
        function_set=_nguyen_set(),
        var_names=("x",),
        train_spec=uniform(0.0, 2.0, 20),
        test_spec=None,
        target_expression=_nguyen7_target(),
    )


@_register
def _pagie1() -> Problem:
    return Problem(
        name="pagie1",
        description="1/(1+x^-4) + 1/(1+y^-4) on a 2-d grid",
        function_set=build_function_set(
            ["add", "sub", "mul", "div", "pow", "sqrt", "log", "inv"], ["x", "y"], constant=True
        ),
        var_names=("x", "y"),
        train_spec=equidistant(-5.0, 5.0, 0.4),
        test_spec=None,
        target_fn=_pagie1_targets,
    )


@_register
def _keijzer6() -> Problem:
    return Problem(
        name="keijzer6",
        description="harmonic number sum_{i=1..floor(x)} 1/i",
        function_set=build_function_set(
            ["add", "mul", "sin", "cos", "sqrt", "log", "inv"], ["x"], constant=True
        ),
        var_names=("x",),
        train_spec=equidistant(1.0, 50.0, 1.0),
        test_spec=equidistant(1.0, 120.0, 1.0),
        target_fn=_keijzer6_targets,
    )


@_register
def _korns12() -> Problem:
    return Problem(
        name="korns12",
        description="2 - 2.1*cos(9.8*x)*sin(1.3*w), five variables exposed",
        function_set=build_function_set(
            ["add", "sub", "mul", "div", "sin", "cos", "tan", "tanh", "sqrt", "exp", "log", "square", "cube"],
            ["u", "v", "w", "x", "y"],
            constant=True,
        ),
        var_names=("u", "v", "w", "x", "y"),
        train_spec=uniform(-50.0, 50.0, 10000),
        test_spec=uniform(-50.0, 50.0, 10000),
        target_expression=_korns12_target(),
    )


@_register
def _vladislavleva4() -> Problem:
    return Problem(
        name="vladislavleva4",
        description="10 / (5 + sum_i (x_i - 3)^2) over five variables",
        function_set=build_function_set(
            ["add", "sub", "mul", "div", "pow", "sin", "cos", "sqrt", "exp", "log", "inv"],
            ["u", "v", "w", "x", "y"],
            constant=True,
        ),
        var_names=("u", "v", "w", "x", "y"),
        train_spec=uniform(0.05, 6.05, 1024),
        test_spec=uniform(-0.25, 6.35, 5000),
        target_expression=_vladislavleva4_target(),
    )


def problem_names() -> list[str]:
    return list(_FACTORIES)


def make_problem(name: str) -> Problem:
    """Build a registered problem; raises :class:`UnknownProblemError` otherwise."""
    try:
        factory = _FACTORIES[name]
    except KeyError:
        known = ", ".join(_FACTORIES)
        raise UnknownProblemError(f"unknown problem {name!r} (known: {known})") from None
    return factory()


def register_problem(factory: Callable[[], Problem]) -> None:
    """Add a problem factory to the registry (name taken from the instance)."""
    _FACTORIES[factory().name] = factory
