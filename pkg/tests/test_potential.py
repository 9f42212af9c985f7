import pytest

from src.models.errors import InvalidSystemError
from src.models.potential import (
    first_symbol_potential,
    indicator_branch_potential,
    polynomial_potential,
)


def test_coordinate_potential_uses_cylinder_midpoint(half_system, coordinate):
    f = coordinate.word_function(half_system)
    assert f((0,)) == pytest.approx(0.25)
    assert f((1, 1)) == pytest.approx(0.875)
    assert f.error_bound(3) == pytest.approx(0.0625)


def test_polynomial_fixed_point_value(half_system):
    potential = polynomial_potential([1.0, 2.0])
    assert potential.fixed_point_value(half_system, 1) == pytest.approx(3.0)
    assert potential.to_dict()['coefficients'] == [1.0, 2.0]


def test_first_symbol_potential_checks_length(half_system):
    with pytest.raises(InvalidSystemError):
        first_symbol_potential([1.0, 0.0, 2.0]).word_function(half_system)


def test_indicator_branch():
    potential = indicator_branch_potential(2, 2)
    assert potential.values == (0.0, 1.0)
    assert potential.word_local
    with pytest.raises(InvalidSystemError):
        indicator_branch_potential(3, 2)
