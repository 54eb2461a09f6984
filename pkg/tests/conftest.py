import numpy as np
import pytest

from prototree import ConstantBranchSpec, Dataset, build_function_set
from prototree.tree import PrototypeTree, SearchParams


class ForcedRandom:
    """Stand-in rng feeding a fixed sequence of unit floats."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def pick(index, n):
    """A unit float that makes a uniform draw over ``n`` choices pick ``index``."""
    return (index + 0.5) / n


@pytest.fixture
def fig_set():
    # the {+, s, x} walk-through alphabet: ids add=0, sin=1, x=2
    return build_function_set(["add", "sin"], ["x"])


@pytest.fixture
def fig_tree(fig_set):
    params = SearchParams(delta_d=0.0, delta_p=0.0, max_depth=3, terminal_bias_first_visit=False)
    return PrototypeTree(fig_set, params)


@pytest.fixture
def const_tree():
    # minimal alphabet with a constant branch: x (id 0), c (id 1)
    fset = build_function_set([], ["x"], constant=True)
    params = SearchParams(delta_d=0.5, delta_p=0.0, max_depth=3, terminal_bias_first_visit=False)
    return PrototypeTree(fset, params, ConstantBranchSpec(m_low=1, m_high=6, digit_depth=4))


@pytest.fixture
def line_data():
    X = np.array([[0.0], [1.0], [2.0], [-1.5]])
    return Dataset(X=X, y=X[:, 0].copy())
