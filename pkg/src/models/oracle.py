"""
Reference values computed without the spectrum estimators: the
Besicovitch-Eggleston closed form, exact Markov block entropies and a
brute-force simplex search for tiny instances.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import entr, logsumexp

from src.models.errors import (
    InfeasibleAlphaError,
    InstanceTooLargeError,
    InvalidOptionsError,
    InvalidSystemError,
    NonStationaryChainError,
    NotContractingError,
)
from src.models.ifs import linear_system, log_diameters
from src.models.potential import first_symbol_potential
from src.models.symbolic import birkhoff_sums, enumerate_words

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-12
MAX_BRUTE_WORDS = 8
MIN_GRID_STEP = 0.01
GRID_POINT_LIMIT = 5_000_000


@dataclass(frozen=True)
class BesicovitchSpec:
    m: int
    ratio: float
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        if self.m < 2:
            raise InvalidSystemError('m must be at least 2')
        if not 0.0 < self.ratio < 1.0:
            raise InvalidSystemError(f'ratio must lie in (0, 1), got {self.ratio}')
        if self.m * self.ratio > 1.0 + 1e-12:
            raise InvalidSystemError(f'{self.m} images of ratio {self.ratio} do not fit in [0,1]')
        if len(self.values) != self.m:
            raise InvalidSystemError(f'{len(self.values)} values given for m={self.m}')
        if not all(math.isfinite(v) for v in self.values):
            raise InvalidSystemError('values must be finite')

    def to_dict(self):
        return {'m': self.m, 'ratio': self.ratio, 'values': list(self.values)}


def besicovitch_system(spec):
    return linear_system([spec.ratio] * spec.m)


def besicovitch_potential(spec):
    return first_symbol_potential(spec.values)


def _tilted(values, q):
    logits = q * values
    return np.exp(logits - logsumexp(logits))


def _bracket(mean, alpha):
    """Doubling search for [-b, b] with mean(-b) < alpha < mean(b)."""
    bound = 1.0
    while not (mean(-bound) < alpha < mean(bound)):
        bound *= 2.0
        if bound > 2.0 ** 60:
            raise InfeasibleAlphaError(f'alpha={alpha:g} could not be bracketed', alpha=alpha)
    return -bound, bound


def besicovitch_spectrum(spec, alpha):
    """max{H(p) : Σ p_i c_i = alpha} / log(1/r)."""
    values = np.asarray(spec.values)
    lo, hi = float(np.min(values)), float(np.max(values))
    scale = math.log(1.0 / spec.ratio)
    tolerance = ROOT_TOLERANCE * max(1.0, float(np.max(np.abs(values))))
    if alpha < lo - tolerance or alpha > hi + tolerance:
        raise InfeasibleAlphaError(
            f'alpha={alpha:g} is outside [{lo:g}, {hi:g}]', alpha=alpha, range=[lo, hi])

    if hi - lo <= tolerance:
        return math.log(spec.m) / scale
    for edge in (lo, hi):
        if abs(alpha - edge) <= tolerance:
            ties = int(np.count_nonzero(np.abs(values - edge) <= tolerance))
            return math.log(ties) / scale

    def mean(q):
        return float(np.sum(_tilted(values, q) * values))

    a, b = _bracket(mean, alpha)
    q = brentq(lambda x: mean(x) - alpha, a, b, xtol=ROOT_TOLERANCE)
    p = _tilted(values, q)
    return float(np.sum(entr(p))) / scale


@dataclass(frozen=True)
class MarkovEntropy:
    block_entropy: float
    rate: float

    def to_dict(self):
        return {'block_entropy': self.block_entropy, 'rate': self.rate}


def markov_block_entropy_exact(chain, n):
    """H_n = H(p) + (n-1)h with h = -Σ_i p_i Σ_j P_ij log P_ij (nats)."""
    if not chain.stationary:
        raise NonStationaryChainError('exact block entropy needs a stationary chain')
    if n < 1:
        raise InvalidOptionsError(f'block length must be at least 1, got {n}')
    p = chain.initial
    rate = float(np.sum(p * np.sum(entr(chain.transition), axis=1)))
    return MarkovEntropy(block_entropy=float(np.sum(entr(p))) + (n - 1) * rate, rate=rate)


def _simplex_grid(parts, steps):
    """Every vector of ``parts`` nonnegative integers summing to ``steps`` (stars and bars)."""
    if parts == 1:
        return np.full((1, 1), steps, dtype=np.int64)
    bars = np.array(list(itertools.combinations(range(steps + parts - 1), parts - 1)),
                    dtype=np.int64)
    edges = np.concatenate([
        np.full((bars.shape[0], 1), -1),
        bars,
        np.full((bars.shape[0], 1), steps + parts - 1)], axis=1)
    return np.diff(edges, axis=1) - 1


def brute_force_ratio(system, potential, alpha, n, grid_step=0.01):
    """max H/L over block measures on a simplex grid, for at most 8 words."""
    if grid_step < MIN_GRID_STEP:
        raise InvalidOptionsError(f'grid_step must be at least {MIN_GRID_STEP}, got {grid_step}')
    count = system.m ** n
    if count > MAX_BRUTE_WORDS:
        raise InstanceTooLargeError(
            f'{count} words is too many for the brute-force oracle (max {MAX_BRUTE_WORDS})',
            words=count)
    steps = int(round(1.0 / grid_step))
    points = math.comb(steps + count - 1, count - 1)
    if points > GRID_POINT_LIMIT:
        raise InstanceTooLargeError(
            f'simplex grid has {points} points, over the limit of {GRID_POINT_LIMIT}',
            points=points)

    words = enumerate_words(system.m, n)
    phi = birkhoff_sums(potential.word_function(system), words)
    lengths = -log_diameters(system, words)
    if np.any(lengths <= 0):
        raise NotContractingError('some cylinders have diameter >= 1; use a larger depth n')

    weights = _simplex_grid(count, steps) / steps
    slack = grid_step * float(np.max(phi) - np.min(phi)) / 2.0
    feasible = np.abs(weights @ phi - n * alpha) <= slack + 1e-12
    if not np.any(feasible):
        raise InfeasibleAlphaError(
            f'no grid measure reaches alpha={alpha:g}', alpha=alpha,
            range=[float(np.min(phi)) / n, float(np.max(phi)) / n])
    weights = weights[feasible]
    ratios = np.sum(entr(weights), axis=1) / (weights @ lengths)
    best = float(np.max(ratios))
    logger.debug('brute force alpha=%r n=%d feasible=%d best=%.6g', alpha, n, weights.shape[0], best)
    return best
