from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from prototree import ConstantBranchSpec, resolve_constant


def test_worked_example_is_exact():
    assert resolve_constant(4, (3, 1, 1)) == 0.0311


def test_all_zero_digits_give_zero_for_any_m():
    for m in range(1, 7):
        assert resolve_constant(m, (0, 0, 0)) == 0.0


def test_three_nines_at_m2():
    assert resolve_constant(2, (9, 9, 9)) == 9.99


def test_leading_zeros_allowed():
    assert resolve_constant(3, (0, 1, 1)) == 0.011


def test_out_of_range_rejected():
    with pytest.raises(ValueError, match="digit"):
        resolve_constant(2, (3, 10, 1))
    spec = ConstantBranchSpec(m_low=2, m_high=4, digit_depth=3)
    with pytest.raises(ValueError, match="float position"):
        resolve_constant(1, (1, 2, 3), spec)
    with pytest.raises(ValueError, match="digits"):
        resolve_constant(2, (1, 2), spec)
    with pytest.raises(ValueError, match="non-negative"):
        resolve_constant(-1, (1, 2, 3))


def test_spec_validation():
    with pytest.raises(ValueError, match="range"):
        ConstantBranchSpec(m_low=3, m_high=2)
    with pytest.raises(ValueError, match="digit"):
        ConstantBranchSpec(digit_depth=0)
    assert ConstantBranchSpec().m_values == (1, 2, 3, 4, 5, 6)


def test_depth3_m234_range_by_enumeration():
    # oracle: enumerate all 3 * 10^3 combinations
    values = [
        resolve_constant(m, digits)
        for m in (2, 3, 4)
        for digits in product(range(10), repeat=3)
    ]
    assert min(values) == 0.0
    assert max(values) == 9.99
    assert len(values) == 3000


@given(
    st.integers(min_value=0, max_value=9),
    st.lists(st.integers(min_value=0, max_value=9), min_size=1, max_size=6),
)
def test_resolution_matches_exact_rational(m, digits):
    gamma = int("".join(map(str, digits)))
    expected = float(Fraction(gamma, 10 ** m))  # correctly rounded rational
    once = resolve_constant(m, digits)
    assert once == expected
    assert resolve_constant(m, digits) == once
