import inspect
import math

import numpy as np
import pytest

from src.models import oracle
from src.models.errors import (
    InfeasibleAlphaError,
    InstanceTooLargeError,
    InvalidOptionsError,
    InvalidSystemError,
    NonStationaryChainError,
)
from src.models.oracle import (
    BesicovitchSpec,
    besicovitch_potential,
    besicovitch_spectrum,
    besicovitch_system,
    brute_force_ratio,
    markov_block_entropy_exact,
)
from src.models.symbolic import MarkovChainSpec, block_marginal, shannon_entropy

COIN = BesicovitchSpec(m=2, ratio=0.5, values=(1.0, 0.0))


def binary_entropy_bits(p):
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


@pytest.mark.parametrize('alpha, expected', [
    (0.5, 1.0),
    (0.3, 0.881291),
    (0.2, 0.721928),
    (1.0, 0.0),
])
def test_besicovitch_closed_form(alpha, expected):
    assert besicovitch_spectrum(COIN, alpha) == pytest.approx(expected, abs=1e-6)


def test_besicovitch_is_concave():
    alphas = np.linspace(0.05, 0.95, 19)
    values = [besicovitch_spectrum(COIN, a) for a in alphas]
    for left, middle, right in zip(values, values[1:], values[2:]):
        assert middle >= (left + right) / 2 - 1e-12
    assert max(values) == pytest.approx(1.0)


def test_besicovitch_ties_at_boundary():
    spec = BesicovitchSpec(m=3, ratio=1.0 / 3.0, values=(1.0, 1.0, 0.0))
    assert besicovitch_spectrum(spec, 1.0) == pytest.approx(math.log(2) / math.log(3))


def test_besicovitch_rejects_bad_input():
    with pytest.raises(InfeasibleAlphaError):
        besicovitch_spectrum(COIN, 1.2)
    with pytest.raises(InvalidSystemError):
        BesicovitchSpec(m=3, ratio=0.5, values=(1.0, 0.0, 0.0))


def test_markov_iid_rows():
    p = [0.3, 0.7]
    result = markov_block_entropy_exact(MarkovChainSpec.iid(p), 5)
    entropy = -(0.3 * math.log(0.3) + 0.7 * math.log(0.7))
    assert result.rate == pytest.approx(entropy, abs=1e-12)
    assert result.block_entropy == pytest.approx(5 * entropy, abs=1e-12)


def test_markov_permutation_chain_has_zero_rate():
    chain = MarkovChainSpec(transition=[[0.0, 1.0], [1.0, 0.0]], initial=[0.5, 0.5])
    result = markov_block_entropy_exact(chain, 7)
    assert result.rate == 0.0
    assert result.block_entropy == pytest.approx(math.log(2))


def test_markov_rate_and_enumeration_agree():
    chain = MarkovChainSpec.from_transition([[0.9, 0.1], [0.2, 0.8]])
    assert markov_block_entropy_exact(chain, 1).rate == pytest.approx(0.383523, abs=1e-6)
    for n in range(1, 13):
        exact = markov_block_entropy_exact(chain, n).block_entropy
        assert shannon_entropy(block_marginal(chain, n)) == pytest.approx(exact, abs=1e-10)


def test_markov_needs_stationary_chain():
    chain = MarkovChainSpec(transition=[[0.9, 0.1], [0.2, 0.8]], initial=[0.5, 0.5],
                            stationary=False)
    with pytest.raises(NonStationaryChainError):
        markov_block_entropy_exact(chain, 3)


def test_brute_force_examples():
    system = besicovitch_system(COIN)
    potential = besicovitch_potential(COIN)
    assert brute_force_ratio(system, potential, 0.5, 1) == pytest.approx(1.0, abs=1e-9)
    assert brute_force_ratio(system, potential, 0.3, 2) == pytest.approx(0.881291, abs=0.02)
    assert brute_force_ratio(system, potential, 1.0, 1) == 0.0


def test_brute_force_stays_tiny():
    system = besicovitch_system(COIN)
    potential = besicovitch_potential(COIN)
    with pytest.raises(InstanceTooLargeError):
        brute_force_ratio(system, potential, 0.5, 4)
    with pytest.raises(InvalidOptionsError):
        brute_force_ratio(system, potential, 0.5, 1, grid_step=0.001)


def test_oracle_does_not_use_the_estimators():
    assert 'src.models.estimator' not in inspect.getsource(oracle)


def test_binary_entropy_helper_matches_closed_form():
    assert besicovitch_spectrum(COIN, 0.3) == pytest.approx(binary_entropy_bits(0.3), abs=1e-12)
