"""
Interval iterated function systems: branches, cylinder intervals and the
geometric potential g(ω) = -log T'_{ω1}(Π(σω)).
"""
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from src.config import Config
from src.models.errors import (
    DegenerateCylinderError,
    InsufficientDepthError,
    InvalidSystemError,
)
from src.models.symbolic import (
    Alphabet,
    Word,
    WordFunction,
    birkhoff_sums,
    enumerate_words,
    sample_words,
)

logger = logging.getLogger(__name__)

PARABOLIC_TOLERANCE = 1e-9
CHECK_GRID_POINTS = 257


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    length: Optional[float] = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidSystemError(f'interval [{self.lo}, {self.hi}] has lo > hi')

    @property
    def diameter(self):
        return self.hi - self.lo if self.length is None else self.length

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, other, tolerance=0.0):
        return self.lo - tolerance <= other.lo and other.hi <= self.hi + tolerance

    def to_dict(self):
        return {'lo': self.lo, 'hi': self.hi, 'diameter': self.diameter}


def _constant_like(y, value):
    return np.full(np.shape(y), float(value))


@dataclass(frozen=True)
class Branch:
    """One increasing C¹ map of [0,1] into itself.

    ``span(lo, hi, length)`` returns the length of the image of [lo, hi]; branches
    with a closed form use it to avoid cancellation in map(hi) - map(lo).
    """
    map: Callable
    derivative: Callable
    parabolic: bool = False
    fixed_point: Optional[float] = None
    span: Optional[Callable] = None
    name: str = ''

    @property
    def image(self):
        return Interval(float(self.map(0.0)), float(self.map(1.0)))

    def image_length(self, lo, hi, length):
        if self.span is not None:
            return self.span(lo, hi, length)
        return self.map(hi) - self.map(lo)

    def log_derivative(self, y):
        return np.log(self.derivative(y))

    @functools.lru_cache(maxsize=512)
    def modulus(self, radius):
        """Sampled modulus of continuity of log T' at the given radius."""
        if radius <= 0:
            return 0.0
        grid = np.linspace(0.0, 1.0, Config.MODULUS_GRID_POINTS)
        shifted = np.minimum(grid + radius, 1.0)
        return float(np.max(np.abs(self.log_derivative(shifted) - self.log_derivative(grid))))

    def check(self, symbol):
        grid = np.linspace(0.0, 1.0, CHECK_GRID_POINTS)
        slopes = np.asarray(self.derivative(grid), dtype=float)
        if np.any(slopes <= 0):
            raise InvalidSystemError(f'branch {symbol + 1} is not increasing', branch=symbol + 1)
        if self.parabolic:
            if self.fixed_point is None:
                raise InvalidSystemError(
                    f'parabolic branch {symbol + 1} needs a fixed point', branch=symbol + 1)
            if abs(float(self.map(self.fixed_point)) - self.fixed_point) > PARABOLIC_TOLERANCE or \
                    abs(float(self.derivative(self.fixed_point)) - 1.0) > PARABOLIC_TOLERANCE:
                raise InvalidSystemError(
                    f'branch {symbol + 1} is flagged parabolic but T({self.fixed_point}) or '
                    f"T'({self.fixed_point}) is not 1-neutral", branch=symbol + 1)
        elif np.any(slopes >= 1.0):
            raise InvalidSystemError(
                f'hyperbolic branch {symbol + 1} has derivative >= 1 on the sample grid',
                branch=symbol + 1)


@dataclass(frozen=True, eq=False)
class IfsSystem:
    branches: Tuple[Branch, ...]
    name: str = 'custom'
    parameters: dict = field(default_factory=dict)
    forward: Optional[Callable] = None
    _diameters: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'branches', tuple(self.branches))
        Alphabet(len(self.branches))

    @property
    def alphabet(self):
        return Alphabet(len(self.branches))

    @property
    def m(self):
        return len(self.branches)

    @property
    def parabolic_symbols(self):
        return tuple(i for i, branch in enumerate(self.branches) if branch.parabolic)

    @property
    def has_parabolic(self):
        return bool(self.parabolic_symbols)

    def check(self):
        for symbol, branch in enumerate(self.branches):
            branch.check(symbol)

        # Open images must be pairwise disjoint; touching endpoints are fine
        images = sorted((branch.image for branch in self.branches), key=lambda image: image.lo)
        for left, right in zip(images, images[1:]):
            if left.hi > right.lo + 1e-12:
                raise InvalidSystemError(
                    f'branch images [{left.lo}, {left.hi}] and [{right.lo}, {right.hi}] overlap')

        depths = range(1, min(4, self.exhaustive_depth) + 1)
        diameters = [self.max_diameter(depth) for depth in depths]
        for shallow, deep in zip(diameters, diameters[1:]):
            if not deep < shallow:
                raise InvalidSystemError(
                    'maximal cylinder diameter does not decrease with depth', diameters=diameters)
        return self

    def cylinders(self, words):
        """Endpoints and diameters of T_{w1}∘…∘T_{wn}([0,1]) for every row of ``words``."""
        words = np.asarray(words)
        count = words.shape[0]
        lo = np.zeros(count)
        hi = np.ones(count)
        length = np.ones(count)
        for position in range(words.shape[1] - 1, -1, -1):
            symbols = words[:, position]
            for symbol, branch in enumerate(self.branches):
                mask = symbols == symbol
                if not np.any(mask):
                    continue
                l, h, d = lo[mask], hi[mask], length[mask]
                lo[mask] = branch.map(l)
                hi[mask] = branch.map(h)
                length[mask] = branch.image_length(l, h, d)
        return lo, hi, length

    @property
    def exhaustive_depth(self):
        depth = 0
        while self.m ** (depth + 1) <= Config.DIAMETER_TABLE_WORDS:
            depth += 1
        return max(depth, 1)

    def max_diameter(self, depth):
        """Largest cylinder diameter at ``depth``; past the table depth the last
        exhaustive value is used, which still bounds it by nesting."""
        if depth <= 0:
            return 1.0
        depth = min(depth, self.exhaustive_depth)
        if depth not in self._diameters:
            _, _, length = self.cylinders(enumerate_words(self.m, depth))
            self._diameters[depth] = float(np.max(length))
        return self._diameters[depth]

    def to_dict(self):
        return {
            'name': self.name,
            'm': self.m,
            'parameters': dict(self.parameters),
            'parabolic_symbols': [symbol + 1 for symbol in self.parabolic_symbols],
            'fixed_points': [branch.fixed_point for branch in self.branches]
        }


def linear_system(ratios, offsets=None):
    ratios = [float(r) for r in ratios]
    if len(ratios) < 2:
        raise InvalidSystemError('a linear system needs at least two ratios')
    if any(not 0.0 < r < 1.0 for r in ratios):
        raise InvalidSystemError(f'ratios must lie in (0, 1), got {ratios}')
    if offsets is None:
        if sum(ratios) > 1.0 + 1e-12:
            raise InvalidSystemError(f'ratios {ratios} do not fit side by side in [0,1]')
        offsets = [sum(ratios[:i]) for i in range(len(ratios))]
    offsets = [float(o) for o in offsets]
    if len(offsets) != len(ratios):
        raise InvalidSystemError('one offset per ratio is required')

    branches = []
    for r, o in zip(ratios, offsets):
        branches.append(Branch(
            map=lambda y, r=r, o=o: o + r * y,
            derivative=lambda y, r=r: _constant_like(y, r),
            fixed_point=o / (1.0 - r),
            span=lambda lo, hi, length, r=r: r * length,
            name=f'{o:g}+{r:g}y'))
    return IfsSystem(branches=tuple(branches), name='linear',
                     parameters={'ratios': ratios, 'offsets': offsets}).check()


def _example2_forward(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        left = x / (1.0 - x)
        right = (2.0 * x - 1.0) / x
    return np.where(x <= 0.5, left, right)


def example2_system():
    """Inverse branches of T(x) = x/(1-x) on [0,1/2], (2x-1)/x on (1/2,1]."""
    left = Branch(
        map=lambda y: y / (1.0 + y),
        derivative=lambda y: 1.0 / (1.0 + y) ** 2,
        parabolic=True,
        fixed_point=0.0,
        span=lambda lo, hi, length: length / ((1.0 + lo) * (1.0 + hi)),
        name='y/(1+y)')
    right = Branch(
        map=lambda y: 1.0 / (2.0 - y),
        derivative=lambda y: 1.0 / (2.0 - y) ** 2,
        parabolic=True,
        fixed_point=1.0,
        span=lambda lo, hi, length: length / ((2.0 - lo) * (2.0 - hi)),
        name='1/(2-y)')
    return IfsSystem(branches=(left, right), name='example2', parameters={},
                     forward=_example2_forward).check()


BISECTION_STEPS = 8
NEWTON_STEPS = 60
# one ulp either way counts as converged
NEWTON_RELATIVE_STOP = 4e-16


def _mp_inverse_scalar(y, beta, lo, hi, shift):
    target = y + shift
    a, b = lo, hi
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        if mid + mid ** (1.0 + beta) >= target:
            b = mid
        else:
            a = mid
    x = b
    for _ in range(NEWTON_STEPS):
        step = (x + x ** (1.0 + beta) - target) / (1.0 + (1.0 + beta) * x ** beta)
        x = max(x - step, lo)
        if abs(step) <= NEWTON_RELATIVE_STOP * x + 1e-300:
            break
    return min(max(x, lo), hi)


def _mp_inverse(y, beta, lo, hi, shift):
    """Root of x + x^{1+β} - shift = y on [lo, hi].

    The left side is increasing and convex, so after bracketing Newton started
    from the upper end descends monotonically onto the root.
    """
    if np.ndim(y) == 0:
        return _mp_inverse_scalar(float(y), beta, lo, hi, shift)
    target = np.asarray(y, dtype=float) + shift
    a = np.full_like(target, lo)
    b = np.full_like(target, hi)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        above = mid + mid ** (1.0 + beta) >= target
        b = np.where(above, mid, b)
        a = np.where(above, a, mid)
    x = b
    for _ in range(NEWTON_STEPS):
        step = (x + x ** (1.0 + beta) - target) / (1.0 + (1.0 + beta) * x ** beta)
        x = np.maximum(x - step, lo)
        if x.size == 0 or np.all(np.abs(step) <= NEWTON_RELATIVE_STOP * x + 1e-300):
            break
    return np.clip(x, lo, hi)


def manneville_pomeau_system(beta):
    """Inverse branches of T(x) = x + x^{1+β} mod 1."""
    beta = float(beta)
    if beta <= 0:
        raise InvalidSystemError(f'beta must be positive, got {beta}')
    cut = brentq(lambda x: x + x ** (1.0 + beta) - 1.0, 0.0, 1.0, xtol=1e-15,
                 rtol=4 * np.finfo(float).eps)

    def forward(x):
        x = np.asarray(x, dtype=float)
        value = x + x ** (1.0 + beta)
        return np.where(x < cut, value, value - 1.0)

    def inverse_left(y):
        return _mp_inverse(y, beta, 0.0, cut, 0.0)

    def inverse_right(y):
        return _mp_inverse(y, beta, cut, 1.0, 1.0)

    left = Branch(
        map=inverse_left,
        derivative=lambda y: 1.0 / (1.0 + (1.0 + beta) * inverse_left(y) ** beta),
        parabolic=True,
        fixed_point=0.0,
        name='left inverse')
    right = Branch(
        map=inverse_right,
        derivative=lambda y: 1.0 / (1.0 + (1.0 + beta) * inverse_right(y) ** beta),
        fixed_point=1.0,
        name='right inverse')
    parameters = {'beta': beta, 'cut': cut, 'has_acim': beta < 1.0}
    return IfsSystem(branches=(left, right), name='manneville_pomeau',
                     parameters=parameters, forward=forward).check()


SYSTEM_BUILDERS = {
    'linear': linear_system,
    'example2': example2_system,
    'manneville_pomeau': manneville_pomeau_system,
}


def _as_word(word):
    return word if isinstance(word, Word) else Word(word)


def cylinder_interval(system, word):
    word = _as_word(word).check(system.alphabet)
    lo, hi, length = system.cylinders(word.as_array()[None, :])
    return Interval(float(lo[0]), float(max(hi[0], lo[0])), float(length[0]))


def log_diameters(system, words):
    """log D_n for every row; a collapsed cylinder raises with its word."""
    _, _, length = system.cylinders(words)
    bad = ~(length > 0)
    if np.any(bad):
        index = int(np.argmax(bad))
        word = Word(tuple(np.asarray(words)[index]))
        raise DegenerateCylinderError(
            f'cylinder {word.label()} collapsed to zero diameter', word=word.label())
    return np.log(length)


def lambda_n(system, word):
    word = _as_word(word).check(system.alphabet)
    return float(-log_diameters(system, word.as_array()[None, :])[0] / word.n)


def geometric_potential(system):
    """g as a WordFunction: Π(σω) is approximated by the suffix-cylinder midpoint."""

    def evaluate(words):
        words = np.asarray(words)
        first = words[:, 0]
        if words.shape[1] >= 2:
            lo, hi, _ = system.cylinders(words[:, 1:])
            points = 0.5 * (lo + hi)
        else:
            # empty suffix: the cylinder is all of [0,1]
            points = np.full(words.shape[0], 0.5)
        values = np.empty(words.shape[0])
        for symbol, branch in enumerate(system.branches):
            mask = first == symbol
            if np.any(mask):
                values[mask] = -branch.log_derivative(points[mask])
        return values

    def error_bound(length):
        radius = 0.5 * system.max_diameter(length - 1)
        return max(branch.modulus(radius) for branch in system.branches)

    return WordFunction(evaluator=evaluate, error_bound=error_bound, name='g')


def g_eval(system, word):
    word = _as_word(word).check(system.alphabet)
    if word.n < 2:
        raise InsufficientDepthError(
            'g needs a symbol plus at least one suffix symbol', word=word.label())
    return geometric_potential(system)(word)


def project(system, word):
    """Midpoint of the cylinder and the radius that contains every Π(ω), ω ∈ [w]."""
    interval = cylinder_interval(system, word)
    return interval.midpoint, 0.5 * interval.diameter


@dataclass(frozen=True)
class SamplingPlan:
    mode: str = 'exhaustive'
    count: int = 4096
    seed: int = 0
    cap: Optional[int] = None

    def words(self, m, n):
        if self.mode == 'exhaustive':
            return enumerate_words(m, n, self.cap)
        if self.mode == 'random':
            return sample_words(m, n, self.count, self.seed)
        raise InvalidSystemError(f"unknown sampling mode '{self.mode}'")


def lemma1_gap(system, n, plan=None):
    """max over sampled words of |λ_n(w) - (1/n) Σ g(σ^k w)|."""
    plan = plan or SamplingPlan()
    words = plan.words(system.m, n)
    lyapunov = -log_diameters(system, words) / n
    averages = birkhoff_sums(geometric_potential(system), words) / n
    gap = float(np.max(np.abs(lyapunov - averages)))
    logger.info('lemma1 gap system=%s n=%d words=%d gap=%.3e', system.name, n, words.shape[0], gap)
    return gap


def mean_value_bracket(system, word):
    """(g_n(w), min, max) of -log T'_{w1} over the suffix cylinder, g_n = -log(D_n/D_{n-1}(σw))."""
    word = _as_word(word)
    if word.n < 2:
        raise InsufficientDepthError('mean value check needs n >= 2', word=word.label())
    whole = cylinder_interval(system, word)
    suffix = cylinder_interval(system, word.suffix(1))
    ratio = -math.log(whole.diameter / suffix.diameter)
    branch = system.branches[word.symbols[0]]
    grid = np.linspace(suffix.lo, suffix.hi, 65)
    values = -branch.log_derivative(grid)
    return ratio, float(np.min(values)), float(np.max(values))
