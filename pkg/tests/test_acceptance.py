"""End-to-end checks against closed forms, exact enumerations and brute force."""
import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import entr

from src.models.estimator import build_depth_table, lower_bound, moran_dimension, upper_bound
from src.models.ifs import geometric_potential, lemma1_gap, linear_system
from src.models.oracle import BesicovitchSpec, besicovitch_spectrum
from src.models.potential import coordinate_potential
from src.models.sampler import alternating_sampler
from src.models.spectrum import SolverOptions
from src.models.symbolic import BlockMeasure, MarkovChainSpec, abramov_stats, first_symbol_function
from src.routes.validate import run_suite

COIN = BesicovitchSpec(m=2, ratio=0.5, values=(1.0, 0.0))
# admissible number of first-branch symbols at n = 14 for a window of 0.05
ADMISSIBLE_COUNT = {0.2: 3, 0.3: 4, 0.5: 7}


@pytest.mark.parametrize('alpha', [0.2, 0.3, 0.5])
def test_besicovitch_lower_bound(half_system, bernoulli_potential, alpha):
    opts = SolverOptions(n=14, rho=0.05)
    table = build_depth_table(half_system, bernoulli_potential, 14)
    result = lower_bound(half_system, bernoulli_potential, alpha, opts, table=table)
    assert result.dimension == pytest.approx(besicovitch_spectrum(COIN, alpha), abs=0.02)


@pytest.mark.parametrize('alpha', [0.2, 0.3, 0.5])
def test_besicovitch_upper_bound_counts_window(half_system, bernoulli_potential, alpha):
    closed = besicovitch_spectrum(COIN, alpha)
    k = ADMISSIBLE_COUNT[alpha]
    deep = upper_bound(half_system, bernoulli_potential, alpha, SolverOptions(n=14, rho=0.05))
    shallow = upper_bound(half_system, bernoulli_potential, alpha, SolverOptions(n=10, rho=0.05))
    assert deep.cover_size == math.comb(14, k)
    assert deep.dimension == pytest.approx(math.log2(math.comb(14, k)) / 14, abs=1e-9)
    assert 0.0 <= closed - deep.dimension < closed - shallow.dimension


def test_moran_exactness():
    root = brentq(lambda s: 2.0 ** -s + 3.0 ** -s - 1.0, 0.0, 1.0, xtol=1e-15)
    uneven = linear_system([0.5, 1.0 / 3.0])
    values = [moran_dimension(uneven, n) for n in (4, 8, 12)]
    assert max(values) - min(values) <= 1e-9
    assert values[0] == pytest.approx(root, abs=1e-6)
    assert moran_dimension(linear_system([0.5, 0.5]), 12) == pytest.approx(1.0, abs=1e-9)


def test_lemma1_gap_decreases(mp_system):
    gaps = [lemma1_gap(mp_system, n) for n in (4, 8, 16)]
    assert gaps[2] < gaps[1] < gaps[0]
    assert lemma1_gap(linear_system([0.5, 1.0 / 3.0]), 8) <= 1e-12


@pytest.mark.parametrize('n', [2, 4, 8])
def test_abramov_identities(n):
    ratios = np.array([0.5, 1.0 / 3.0])
    q = np.array([0.4, 0.6])
    values = np.array([1.0, -0.5])
    system = linear_system(ratios)
    stats = abramov_stats(BlockMeasure.product(q, n), n,
                          [geometric_potential(system), first_symbol_function(values)])
    assert stats.entropy_rate == pytest.approx(float(np.sum(entr(q))), abs=1e-12)
    assert stats.averages[0] == pytest.approx(float(np.sum(q * -np.log(ratios))), abs=1e-12)
    assert stats.averages[1] == pytest.approx(float(np.sum(q * values)), abs=1e-12)


def test_markov_block_entropy_converges():
    df, failed = run_suite('markov', 12)
    assert not failed
    assert df['entropy_rate'].iloc[0] == pytest.approx(0.383523, abs=1e-6)
    h = df['entropy_rate'].iloc[0]
    chain = MarkovChainSpec.from_transition([[0.9, 0.1], [0.2, 0.8]])
    first = float(np.sum(entr(chain.initial)))
    expected = [h + (first - h) / n for n in df['n']]
    np.testing.assert_allclose(df['enumerated_rate'], expected, atol=1e-10)


def test_brute_force_equivalence():
    df, failed = run_suite('brute_force', 2)
    assert not failed
    assert (df['gibbs_residual'] <= 1e-8).all()


def test_parabolic_dispatch():
    df, failed = run_suite('parabolic', 8)
    assert not failed
    example = df[df['system'] == 'example2']
    assert example['flag'].all()
    assert (example['lower'] == example['upper']).all()


def test_parabolic_attractor_estimate_is_monotone(example2):
    values = [moran_dimension(example2, n) for n in (6, 10, 14)]
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] >= 0.75


def test_sampler_approaches_fixed_point(mp_system):
    checkpoints = list(alternating_sampler(
        mp_system, coordinate_potential(), MarkovChainSpec.iid([0.5, 0.5]), 0,
        lambda i: i, horizon=100000, seed=0))
    last = checkpoints[-3:]
    assert last[-1].n_q == 65 * 66 * 67 // 3
    distances = [c.f_distance for c in last]
    g_averages = [c.birkhoff_g for c in last]
    assert distances[0] > distances[1] > distances[2]
    assert g_averages[0] > g_averages[1] > g_averages[2]
