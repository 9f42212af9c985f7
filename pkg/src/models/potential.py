from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial

from src.models.errors import InvalidSystemError
from src.models.symbolic import WordFunction, first_symbol_function


@dataclass(frozen=True)
class PotentialSpec:
    """A potential f on Σ: either F∘Π for F continuous on [0,1], or word-local."""
    name: str
    function: Optional[Callable] = None
    modulus: Optional[Callable] = None
    values: Optional[Tuple[float, ...]] = None
    parameters: Tuple = ()

    @property
    def word_local(self):
        return self.values is not None

    def _check_values(self, system):
        if len(self.values) != system.m:
            raise InvalidSystemError(
                f'potential {self.name} has {len(self.values)} values for {system.m} branches')

    def word_function(self, system):
        if self.word_local:
            self._check_values(system)
            return first_symbol_function(self.values, name=self.name)

        F = self.function
        modulus = self.modulus

        def evaluate(words):
            lo, hi, _ = system.cylinders(words)
            return np.asarray(F(0.5 * (lo + hi)), dtype=float)

        def error_bound(length):
            return float(modulus(0.5 * system.max_diameter(length)))

        return WordFunction(evaluator=evaluate, error_bound=error_bound, name=self.name)

    def fixed_point_value(self, system, symbol):
        """f on the constant word (i, i, i, ...)."""
        if self.word_local:
            self._check_values(system)
            return float(self.values[symbol])
        fixed_point = system.branches[symbol].fixed_point
        if fixed_point is None:
            raise InvalidSystemError(f'branch {symbol + 1} has no fixed point', branch=symbol + 1)
        return float(self.function(np.asarray([fixed_point]))[0])

    def to_dict(self):
        data = {'name': self.name}
        if self.word_local:
            data['values'] = list(self.values)
        if self.parameters:
            data.update(dict(self.parameters))
        return data


def coordinate_potential():
    return PotentialSpec(
        name='coordinate',
        function=lambda x: np.asarray(x, dtype=float),
        modulus=lambda delta: delta)


def polynomial_potential(coefficients):
    coefficients = tuple(float(c) for c in coefficients)
    if not coefficients:
        raise InvalidSystemError('polynomial potential needs at least one coefficient')
    lipschitz = sum(k * abs(c) for k, c in enumerate(coefficients))
    return PotentialSpec(
        name='polynomial',
        function=lambda x: polynomial.polyval(np.asarray(x, dtype=float), coefficients),
        modulus=lambda delta: lipschitz * delta,
        parameters=(('coefficients', list(coefficients)),))


def first_symbol_potential(values):
    return PotentialSpec(name='first_symbol', values=tuple(float(v) for v in values))


def indicator_branch_potential(branch, m):
    """1 on the cylinder of ``branch`` (1-based), 0 elsewhere."""
    if not 1 <= branch <= m:
        raise InvalidSystemError(f'indicator branch {branch} is outside 1..{m}')
    values = tuple(1.0 if symbol == branch - 1 else 0.0 for symbol in range(m))
    return PotentialSpec(name='indicator_branch', values=values,
                         parameters=(('branch', branch),))
