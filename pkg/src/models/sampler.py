"""
Alternating-block sampler: hyperbolic blocks of length i drawn from a source
measure, each followed by the constant block (a, ..., a) of length i·k_i.
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.models.errors import InvalidScheduleError, InvalidSystemError
from src.models.symbolic import BlockMeasure, MarkovChainSpec

logger = logging.getLogger(__name__)

# extra source symbols after the last block so the final points see a tail
TAIL_SYMBOLS = 64
SCHEDULE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SamplerCheckpoint:
    q: int
    n_q: int
    k: int
    epsilon: float
    birkhoff_f: float
    birkhoff_g: float
    target: float

    @property
    def f_distance(self):
        return abs(self.birkhoff_f - self.target)

    def to_dict(self):
        return {
            'q': self.q,
            'n_q': self.n_q,
            'k': self.k,
            'epsilon': self.epsilon,
            'birkhoff_f': self.birkhoff_f,
            'birkhoff_g': self.birkhoff_g,
            'target': self.target,
            'f_distance': self.f_distance
        }


def default_epsilons(ks):
    return [1.0 / (i * (1 + k)) for i, k in enumerate(ks, start=1)]


def validate_schedule(ks, epsilons, tolerance=SCHEDULE_TOLERANCE):
    """k_i nondecreasing and growing, k_i·ε_i nonincreasing; all-zero k is the degenerate case."""
    if len(ks) == 0:
        raise InvalidScheduleError('schedule is empty')
    if len(epsilons) != len(ks):
        raise InvalidScheduleError(
            f'{len(epsilons)} epsilons given for {len(ks)} blocks')
    for i, (k, epsilon) in enumerate(zip(ks, epsilons), start=1):
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
            raise InvalidScheduleError(f'k_{i} must be a nonnegative integer, got {k!r}', block=i)
        if not epsilon > 0:
            raise InvalidScheduleError(f'epsilon_{i} must be positive, got {epsilon!r}', block=i)
    if not any(ks):
        return

    for i, (previous, current) in enumerate(zip(ks, ks[1:]), start=2):
        if current < previous:
            raise InvalidScheduleError(f'k_i must be nondecreasing, but k_{i} < k_{i - 1}', block=i)
    if len(ks) >= 2 and not ks[-1] > ks[0]:
        raise InvalidScheduleError('k_i must grow along the schedule')

    products = [k * epsilon for k, epsilon in zip(ks, epsilons)]
    for i, (previous, current) in enumerate(zip(products, products[1:]), start=2):
        if current > previous + tolerance:
            raise InvalidScheduleError(
                f'k_i*epsilon_i must decrease to 0, but it rises at block {i} '
                f'({previous:g} -> {current:g})', block=i)


def _expand_schedule(schedule, horizon):
    """k_1, k_2, ... for every block that still fits inside ``horizon`` symbols."""
    ks = []
    total = 0
    i = 1
    while True:
        if callable(schedule):
            k = schedule(i)
        elif i <= len(schedule):
            k = schedule[i - 1]
        else:
            break
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 0:
            raise InvalidScheduleError(f'k_{i} must be a nonnegative integer, got {k!r}', block=i)
        length = i * (1 + int(k))
        if total + length > horizon:
            break
        ks.append(int(k))
        total += length
        i += 1
    if not ks:
        raise InvalidScheduleError(f'horizon {horizon} is shorter than the first block')
    return ks


def _source_block(source, length, rng):
    if isinstance(source, MarkovChainSpec):
        return source.sample(length, rng)
    count = -(-length // source.n)
    picks = rng.choice(source.words.shape[0], size=count, p=source.weights)
    return source.words[picks].astype(np.int64).reshape(-1)[:length]


def _backward_points(system, sequence):
    """points[k] ≈ Π(σ^k ω), by x_k = T_{ω_k}(x_{k+1}) from the midpoint at the far end."""
    maps = [branch.map for branch in system.branches]
    points = np.empty(sequence.shape[0] + 1)
    x = 0.5
    points[-1] = x
    for k in range(sequence.shape[0] - 1, -1, -1):
        x = float(maps[sequence[k]](x))
        points[k] = x
    return points


def alternating_sampler(system, potential, source, symbol, schedule, epsilons=None,
                        horizon=100000, seed=0):
    """Yield a SamplerCheckpoint after every block i, at n_q = Σ_{j≤i} j(1+k_j).

    ``source`` is a MarkovChainSpec or a BlockMeasure; ``symbol`` is the 0-based
    parabolic branch. The schedule is validated before the generator is returned.
    """
    if symbol not in system.parabolic_symbols:
        raise InvalidSystemError(f'branch {symbol + 1} is not parabolic', branch=symbol + 1)
    if not isinstance(source, (MarkovChainSpec, BlockMeasure)):
        raise InvalidScheduleError('source must be a Markov chain or a block measure')
    if source.m != system.m:
        raise InvalidSystemError(f'source has {source.m} symbols, system has {system.m}')

    ks = _expand_schedule(schedule, horizon)
    epsilons = default_epsilons(ks) if epsilons is None else list(epsilons)[:len(ks)]
    validate_schedule(ks, epsilons)
    return _run(system, potential, source, symbol, ks, epsilons, seed)


def _run(system, potential, source, symbol, ks, epsilons, seed):
    rng = np.random.default_rng(seed)
    pieces = []
    checkpoints = []
    total = 0
    for i, k in enumerate(ks, start=1):
        pieces.append(_source_block(source, i, rng))
        pieces.append(np.full(i * k, symbol, dtype=np.int64))
        total += i * (1 + k)
        checkpoints.append(total)
    pieces.append(_source_block(source, TAIL_SYMBOLS, rng))
    sequence = np.concatenate(pieces)

    points = _backward_points(system, sequence)
    if potential.word_local:
        f_values = potential.word_function(system).evaluate(sequence[:, None])
    else:
        f_values = np.asarray(potential.function(points[:-1]), dtype=float)
    g_values = np.empty(sequence.shape[0])
    for index, branch in enumerate(system.branches):
        mask = sequence == index
        if np.any(mask):
            g_values[mask] = -branch.log_derivative(points[1:][mask])

    f_sums = np.cumsum(f_values)
    g_sums = np.cumsum(g_values)
    target = potential.fixed_point_value(system, symbol)
    logger.info('sampler blocks=%d length=%d symbol=%d', len(ks), total, symbol + 1)

    for q, (n_q, k, epsilon) in enumerate(zip(checkpoints, ks, epsilons), start=1):
        yield SamplerCheckpoint(
            q=q,
            n_q=n_q,
            k=k,
            epsilon=float(epsilon),
            birkhoff_f=float(f_sums[n_q - 1] / n_q),
            birkhoff_g=float(g_sums[n_q - 1] / n_q),
            target=target)
