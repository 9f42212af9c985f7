import math

import numpy as np
import pytest
from scipy.optimize import brentq

from src.models import estimator
from src.models.errors import (
    AlphaUnreachableError,
    InfeasibleAlphaError,
    InvalidOptionsError,
    InvalidSystemError,
    NoCylindersError,
    NotContractingError,
    SolverDidNotConvergeError,
)
from src.models.estimator import (
    alpha_range,
    attractor_lower_bound,
    build_depth_table,
    full_spectrum,
    gibbs_residual,
    lower_bound,
    moran_dimension,
    moran_profile,
    parabolic_interval,
    solve_moran,
    srb_average,
    upper_bound,
)
from src.models.potential import indicator_branch_potential
from src.models.spectrum import SolverOptions

UNEVEN_ROOT = brentq(lambda s: 2.0 ** -s + 3.0 ** -s - 1.0, 0.0, 1.0, xtol=1e-15)


@pytest.fixture
def left_indicator():
    return indicator_branch_potential(1, 2)


def test_solver_options_validation():
    with pytest.raises(InvalidOptionsError):
        SolverOptions(n=1)
    with pytest.raises(InvalidOptionsError):
        SolverOptions(tolerance=0.0)
    with pytest.raises(InvalidOptionsError):
        SolverOptions(rho=-0.1)
    assert SolverOptions(n=4).replace(rho=0.2).rho == 0.2


def test_moran_on_tiling_system(half_system):
    assert moran_dimension(half_system, 5) == pytest.approx(1.0, abs=1e-9)


def test_moran_is_depth_independent_on_linear_system(uneven_system):
    s4 = moran_dimension(uneven_system, 4)
    s8 = moran_dimension(uneven_system, 8)
    assert s4 == pytest.approx(s8, abs=1e-9)
    assert s4 == pytest.approx(UNEVEN_ROOT, abs=1e-6)


def test_moran_with_constant_word_filter(half_system):
    s = moran_dimension(half_system, 4, filter=lambda words: np.all(words == words[:, :1], axis=1))
    assert s == pytest.approx(0.25, abs=1e-9)


def test_solve_moran_edge_cases():
    with pytest.raises(NoCylindersError):
        solve_moran([])
    with pytest.raises(NotContractingError):
        solve_moran([0.0, -1.0])
    assert solve_moran([-3.0])[0] == 0.0


def test_moran_profile(half_system):
    profile, lowest = moran_profile(half_system, (3, 5))
    assert [n for n, _ in profile] == [3, 5]
    assert lowest == pytest.approx(1.0, abs=1e-9)


def test_upper_bound_with_vacuous_window(half_system, left_indicator):
    result = upper_bound(half_system, left_indicator, 0.5, SolverOptions(n=6, rho=0.6))
    assert result.dimension == pytest.approx(1.0, abs=1e-9)
    assert result.cover_size == 64


def test_upper_bound_single_word(half_system, left_indicator):
    n = 6
    result = upper_bound(half_system, left_indicator, 1.0, SolverOptions(n=n, rho=1.0 / (2 * n)))
    assert result.cover_size == 1
    assert result.dimension == 0.0


def test_upper_bound_counts_window_words(half_system, bernoulli_potential):
    result = upper_bound(half_system, bernoulli_potential, 0.3, SolverOptions(n=14, rho=0.05))
    assert result.cover_size == math.comb(14, 4)
    assert result.dimension == pytest.approx(math.log2(math.comb(14, 4)) / 14, abs=1e-9)


def test_upper_bound_reports_nearest_average(half_system, bernoulli_potential):
    with pytest.raises(AlphaUnreachableError) as e:
        upper_bound(half_system, bernoulli_potential, 0.3, SolverOptions(n=4, rho=0.01))
    assert e.value.details['nearest'] == pytest.approx(0.25)
    assert e.value.details['range'] == [0.0, 1.0]


def test_default_window_and_floor(half_system, mp_system):
    opts = SolverOptions(n=4)
    assert opts.window(0.0) == 0.05
    assert opts.window(0.1) == pytest.approx(0.2)
    assert opts.lyapunov_floor(half_system) == 0.0
    assert opts.lyapunov_floor(mp_system) == pytest.approx(1e-3 * math.log(2))


def test_lower_bound_symmetric_alpha(half_system, left_indicator):
    result = lower_bound(half_system, left_indicator, 0.5, SolverOptions(n=6))
    assert result.dimension == pytest.approx(1.0, abs=1e-6)
    assert not result.boundary


def test_lower_bound_boundary_is_dirac(half_system, left_indicator):
    result = lower_bound(half_system, left_indicator, 1.0, SolverOptions(n=6))
    assert result.boundary
    assert result.dimension == 0.0
    assert result.measure.support_size == 1


def test_lower_bound_besicovitch_value(half_system, bernoulli_potential):
    result = lower_bound(half_system, bernoulli_potential, 0.3, SolverOptions(n=14))
    assert result.dimension == pytest.approx(0.881291, abs=0.02)
    assert result.achieved_alpha == pytest.approx(0.3, abs=1e-9)
    assert result.dimension == pytest.approx(result.entropy_rate / result.achieved_lyapunov)


def test_lower_bound_gibbs_form(uneven_system, bernoulli_potential):
    opts = SolverOptions(n=8)
    table = build_depth_table(uneven_system, bernoulli_potential, 8)
    result = lower_bound(uneven_system, bernoulli_potential, 0.3, opts, table=table)
    assert gibbs_residual(result, table) <= 1e-8
    assert result.achieved_alpha == pytest.approx(0.3, abs=1e-9)


def test_lower_bound_infeasible_alpha(half_system, bernoulli_potential):
    with pytest.raises(InfeasibleAlphaError) as e:
        lower_bound(half_system, bernoulli_potential, 1.5, SolverOptions(n=4))
    assert e.value.details['range'] == [0.0, 1.0]


def test_attractor_lower_bound_matches_moran(uneven_system):
    assert attractor_lower_bound(uneven_system, SolverOptions(n=6)) == \
        pytest.approx(UNEVEN_ROOT, abs=1e-6)


def test_alpha_range(half_system, left_indicator):
    assert alpha_range(half_system, left_indicator, 4) == (0.0, 1.0)


def test_parabolic_interval(half_system, mp_system, example2, coordinate):
    assert parabolic_interval(half_system, coordinate).empty
    interval = parabolic_interval(example2, coordinate)
    assert (interval.lo, interval.hi) == pytest.approx((0.0, 1.0))
    single = parabolic_interval(mp_system, coordinate)
    assert single.lo == single.hi == pytest.approx(0.0)
    assert single.contains(0.0) and not single.contains(0.1)


def test_full_spectrum_sorts_and_keeps_going(half_system, bernoulli_potential):
    points = full_spectrum(half_system, bernoulli_potential, [0.5, 2.0, 0.25],
                           SolverOptions(n=8))
    assert [p.alpha for p in points] == [0.25, 0.5, 2.0]
    assert not any(p.in_parabolic_interval for p in points)
    assert points[0].error is None and points[1].error is None
    assert points[2].failed and 'outside' in points[2].error
    assert points[1].lower == pytest.approx(1.0, abs=1e-6)
    assert 0.0 <= points[1].lower <= points[1].upper + 0.25


def test_full_spectrum_thread_count_does_not_change_values(half_system, bernoulli_potential,
                                                          monkeypatch):
    alphas = [0.25, 0.375, 0.5]
    opts = SolverOptions(n=8)
    single = full_spectrum(half_system, bernoulli_potential, alphas, opts)
    monkeypatch.setenv('MFSPEC_THREADS', '3')
    threaded = full_spectrum(half_system, bernoulli_potential, alphas, opts)
    assert [p.to_dict() for p in single] == [p.to_dict() for p in threaded]


def test_full_spectrum_on_example2_is_flat(example2, coordinate):
    points = full_spectrum(example2, coordinate, [0.2, 0.5, 0.8], SolverOptions(n=8))
    assert all(p.in_parabolic_interval for p in points)
    assert all(p.lower == p.upper for p in points)
    assert points[0].lower == pytest.approx(1.0, abs=1e-6)


def test_full_spectrum_on_mp_flags_only_f0(mp_system, coordinate):
    points = full_spectrum(mp_system, coordinate, [0.0, 0.3], SolverOptions(n=8))
    assert [p.in_parabolic_interval for p in points] == [True, False]


def test_srb_average(mp_system, example2, coordinate):
    first = srb_average(mp_system, coordinate, iterations=20000, burn_in=500, seed=3)
    second = srb_average(mp_system, coordinate, iterations=20000, burn_in=500, seed=3)
    assert first == second
    assert 0.0 < first < 1.0
    with pytest.raises(InvalidSystemError):
        srb_average(example2, coordinate, iterations=100)


def test_tilt_raises_when_bracket_collapses_off_target(monkeypatch):
    # a mean that jumps from 0 to 1 at q = 0.1 can never hit 0.5
    def step_gibbs(log_diameter, phi, t, q):
        weights = np.array([1.0, 0.0]) if q < 0.1 else np.array([0.0, 1.0])
        return weights, None, 0.0

    monkeypatch.setattr(estimator, '_gibbs', step_gibbs)
    with pytest.raises(SolverDidNotConvergeError) as e:
        estimator._tilt(np.zeros(2), np.array([0.0, 1.0]), 0.0, 0.5, 700.0, 1e-12)
    assert e.value.details['q'] == pytest.approx(0.1)
