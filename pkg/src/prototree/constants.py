"""Constant creation by digit concatenation.

A constant branch is a float-position node followed by a fixed-length chain
of digit nodes.  The branch resolves to ``c = gamma / 10**m`` where ``gamma``
is the base-10 concatenation of the chosen digits (leading zeros allowed, so
``gamma`` may be 0) and ``m`` is the chosen float position.  The division is
a single correctly rounded float operation, which makes the mapping exact
and reproducible: ``resolve_constant(4, (3, 1, 1)) == 0.0311``.

Inside the search these nodes are ordinary prototype-tree nodes; for depth
accounting the whole branch counts as one terminal of the outer tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class ConstantBranchSpec:
    """Shape of every constant branch in a tree.

    ``m_low..m_high`` (inclusive) are the float-position choices and
    ``digit_depth`` is the number of digit nodes.  Defaults give constants
    ``gamma / 10**m`` with four digits and m in 1..6.
    """

    m_low: int = 1
    m_high: int = 6
    digit_depth: int = 4

    def __post_init__(self):
        if self.m_high < self.m_low:
            raise ValueError("empty float-position range")
        if self.digit_depth < 1:
            raise ValueError("need at least one digit node")

    @property
    def m_values(self) -> tuple[int, ...]:
        return tuple(range(self.m_low, self.m_high + 1))


@dataclass(frozen=True)
class ConstantPath:
    """The choices made in one sampled constant branch."""

    m: int
    digits: tuple[int, ...]
    value: float


def resolve_constant(m: int, digits: Sequence[int], spec: ConstantBranchSpec | None = None) -> float:
    """Map float-position ``m`` and a digit sequence to the constant value.

    When ``spec`` is given, ``m`` and the digit count are validated against
    it.  The result is exact: ``gamma`` is assembled in integer arithmetic
    and divided by the exact power of ten in one float operation.
    """
    gamma = 0
    for d in digits:
        if not 0 <= int(d) <= 9:
            raise ValueError(f"digit out of range: {d}")
        gamma = gamma * 10 + int(d)
    if spec is not None:
        if not spec.m_low <= m <= spec.m_high:
            raise ValueError(f"float position {m} outside {spec.m_low}..{spec.m_high}")
        if len(tuple(digits)) != spec.digit_depth:
            raise ValueError(f"expected {spec.digit_depth} digits, got {len(tuple(digits))}")
    if m < 0:
        raise ValueError(f"float position must be non-negative, got {m}")
    return gamma / (10 ** m)
