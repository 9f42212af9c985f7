"""
Words, block measures and the statistics computed from them.

Symbols are ``0..m-1`` internally and ``1..m`` in reports. Arrays of words
have shape ``(count, length)``; all sums go through ``np.sum`` so the
reduction is pairwise and independent of how the caller batches work.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.special import entr

from src.config import Config
from src.models.errors import (
    EnumerationLimitError,
    InvalidMeasureError,
    InvalidSystemError,
    NonStationaryChainError,
)

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-300
SUM_TOLERANCE = 1e-12
STATIONARY_TOLERANCE = 1e-10

# largest m**n that still fits an int64 word code
_CODE_LIMIT = 2 ** 62


@dataclass(frozen=True)
class Alphabet:
    m: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 2:
            raise InvalidSystemError(f'alphabet needs at least 2 symbols, got {self.m}', m=self.m)

    def word_count(self, n):
        return self.m ** n


@dataclass(frozen=True)
class Word:
    symbols: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'symbols', tuple(int(s) for s in self.symbols))
        if len(self.symbols) == 0:
            raise InvalidMeasureError('words must have at least one symbol')
        if min(self.symbols) < 0:
            raise InvalidMeasureError(f'negative symbol in word {self.symbols}')

    @property
    def n(self):
        return len(self.symbols)

    def check(self, alphabet):
        if max(self.symbols) >= alphabet.m:
            raise InvalidMeasureError(
                f'word {self.label()} uses a symbol outside 1..{alphabet.m}', word=self.label())
        return self

    def as_array(self):
        return np.array(self.symbols, dtype=np.int64)

    def suffix(self, start):
        return Word(self.symbols[start:])

    def extend(self, symbol):
        return Word(self.symbols + (int(symbol),))

    def label(self):
        return ''.join(str(s + 1) for s in self.symbols) if max(self.symbols) < 9 \
            else '.'.join(str(s + 1) for s in self.symbols)

    def __len__(self):
        return self.n


def _word_dtype(m):
    return np.uint8 if m <= 256 else np.int64


def check_enumeration(m, n, cap=None):
    cap = Config.ENUMERATION_CAP if cap is None else cap
    count = m ** n
    if count > cap:
        raise EnumerationLimitError(
            f'{m}^{n} = {count} words exceeds the enumeration cap {cap}',
            m=m, n=n, cap=cap)
    return count


def enumerate_words(m, n, cap=None):
    """All words of length n in lexicographic order, shape (m**n, n)."""
    count = check_enumeration(m, n, cap)
    codes = np.arange(count, dtype=np.int64)
    return decode_codes(codes, m, n)


def decode_codes(codes, m, n):
    codes = np.asarray(codes, dtype=np.int64)
    words = np.empty((codes.shape[0], n), dtype=_word_dtype(m))
    rest = codes.copy()
    for position in range(n - 1, -1, -1):
        words[:, position] = rest % m
        rest //= m
    return words


def word_codes(words, m):
    words = np.asarray(words)
    codes = np.zeros(words.shape[0], dtype=np.int64)
    for position in range(words.shape[1]):
        codes = codes * m + words[:, position].astype(np.int64)
    return codes


def sample_words(m, n, count, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, m, size=(count, n)).astype(_word_dtype(m))


@dataclass(frozen=True, eq=False)
class BlockMeasure:
    """Probability vector over (a sparse subset of) the words of length n."""
    n: int
    m: int
    words: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        words = np.asarray(self.words)
        weights = np.asarray(self.weights, dtype=float)
        if words.ndim != 2 or words.shape[1] != self.n:
            raise InvalidMeasureError(f'all keyed words must have length {self.n}', n=self.n)
        if words.shape[0] != weights.shape[0]:
            raise InvalidMeasureError('one weight per word is required')
        if words.shape[0] == 0:
            raise InvalidMeasureError('a block measure needs at least one word')
        if words.size and (words.min() < 0 or words.max() >= self.m):
            raise InvalidMeasureError(f'words use symbols outside 1..{self.m}')
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidMeasureError('weights must be finite and nonnegative')
        total = np.sum(weights)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidMeasureError(f'weights sum to {total!r}, not 1', total=float(total))
        object.__setattr__(self, 'words', words)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def from_mapping(cls, mapping, m):
        items = [(Word(w) if not isinstance(w, Word) else w, float(p)) for w, p in mapping.items()]
        if not items:
            raise InvalidMeasureError('a block measure needs at least one word')
        n = items[0][0].n
        for word, _ in items:
            if word.n != n:
                raise InvalidMeasureError(f'all keyed words must have length {n}', n=n)
            word.check(Alphabet(m))
        words = np.array([w.symbols for w, _ in items], dtype=_word_dtype(m))
        return cls(n=n, m=m, words=words, weights=np.array([p for _, p in items]))

    @classmethod
    def uniform(cls, m, n, cap=None):
        words = enumerate_words(m, n, cap)
        return cls(n=n, m=m, words=words, weights=np.full(words.shape[0], 1.0 / words.shape[0]))

    @classmethod
    def dirac(cls, word, m):
        word = word if isinstance(word, Word) else Word(word)
        word.check(Alphabet(m))
        words = np.array([word.symbols], dtype=_word_dtype(m))
        return cls(n=word.n, m=m, words=words, weights=np.ones(1))

    @classmethod
    def product(cls, q, n, cap=None):
        """n-fold product of the one-block distribution q."""
        q = np.asarray(q, dtype=float)
        m = q.shape[0]
        words = enumerate_words(m, n, cap)
        weights = np.prod(q[words.astype(np.int64)], axis=1)
        keep = weights > 0
        return cls(n=n, m=m, words=words[keep], weights=weights[keep] / np.sum(weights[keep]))

    @property
    def support_size(self):
        return int(np.count_nonzero(self.weights > 0))

    def as_dict(self):
        return {Word(tuple(row)): float(p) for row, p in zip(self.words, self.weights)}

    def weight(self, word):
        word = word if isinstance(word, Word) else Word(word)
        if word.n != self.n:
            return 0.0
        match = np.all(self.words == np.array(word.symbols), axis=1)
        return float(np.sum(self.weights[match]))


@dataclass(frozen=True, eq=False)
class MarkovChainSpec:
    transition: np.ndarray
    initial: np.ndarray
    stationary: bool = True

    def __post_init__(self):
        P = np.asarray(self.transition, dtype=float)
        p = np.asarray(self.initial, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise InvalidMeasureError('transition matrix must be square with m >= 2')
        if p.shape != (P.shape[0],):
            raise InvalidMeasureError('initial vector length must match the transition matrix')
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > SUM_TOLERANCE):
            raise InvalidMeasureError('transition rows must be probability vectors')
        if np.any(p < 0) or abs(p.sum() - 1.0) > SUM_TOLERANCE:
            raise InvalidMeasureError('initial vector must be a probability vector')
        if self.stationary and np.max(np.abs(p @ P - p)) > STATIONARY_TOLERANCE:
            raise NonStationaryChainError(
                'initial vector is flagged stationary but pP != p',
                residual=float(np.max(np.abs(p @ P - p))))
        object.__setattr__(self, 'transition', P)
        object.__setattr__(self, 'initial', p)

    @property
    def m(self):
        return self.transition.shape[0]

    @classmethod
    def from_transition(cls, transition):
        """Chain started from the stationary vector of an irreducible P."""
        P = np.asarray(transition, dtype=float)
        values, vectors = np.linalg.eig(P.T)
        index = int(np.argmin(np.abs(values - 1.0)))
        p = np.real(vectors[:, index])
        p = np.abs(p) / np.sum(np.abs(p))
        # one power step removes the eigen-solver's last-digit noise
        p = p @ P
        return cls(transition=P, initial=p / p.sum())

    @classmethod
    def iid(cls, q):
        q = np.asarray(q, dtype=float)
        return cls(transition=np.tile(q, (q.shape[0], 1)), initial=q)

    def sample(self, length, rng, start=None):
        """One path of the chain as an int array."""
        P = self.transition
        cumulative = np.cumsum(P, axis=1)
        path = np.empty(length, dtype=np.int64)
        state = rng.choice(self.m, p=self.initial) if start is None else start
        uniforms = rng.random(length)
        for k in range(length):
            path[k] = state
            state = min(int(np.searchsorted(cumulative[state], uniforms[k], side='right')), self.m - 1)
        return path


@dataclass(frozen=True)
class WordFunction:
    """A function on Σ seen through finite words.

    ``evaluator`` maps an array of words (count, length) to values; ``error_bound(L)``
    bounds |f(ω) - evaluator(w)| for every ω in the cylinder of a length-L word.
    """
    evaluator: Callable[[np.ndarray], np.ndarray]
    error_bound: Callable[[int], float]
    name: str = 'f'

    def evaluate(self, words):
        words = np.asarray(words)
        return np.asarray(self.evaluator(words), dtype=float)

    def __call__(self, word):
        word = word if isinstance(word, Word) else Word(word)
        return float(self.evaluate(word.as_array()[None, :])[0])


def constant_function(value):
    return WordFunction(
        evaluator=lambda words: np.full(np.asarray(words).shape[0], float(value)),
        error_bound=lambda n: 0.0,
        name=f'constant({value})')


def first_symbol_function(values, name='first_symbol'):
    values = np.asarray(values, dtype=float)
    return WordFunction(
        evaluator=lambda words: values[np.asarray(words)[:, 0].astype(np.int64)],
        error_bound=lambda n: 0.0,
        name=name)


def shannon_entropy(measure):
    """Shannon entropy in nats; weights below WEIGHT_FLOOR count as zero."""
    weights = measure.weights[measure.weights > WEIGHT_FLOOR]
    return float(np.sum(entr(weights)))


def block_marginal(chain, n, cap=None):
    """Distribution of the first n symbols of the chain."""
    if n < 1:
        raise InvalidMeasureError('block length must be at least 1', n=n)
    words = enumerate_words(chain.m, n, cap).astype(np.int64)
    weights = chain.initial[words[:, 0]]
    if n > 1:
        weights = weights * np.prod(chain.transition[words[:, :-1], words[:, 1:]], axis=1)
    keep = weights > 0
    logger.debug('block marginal n=%d support=%d of %d', n, int(keep.sum()), words.shape[0])
    return BlockMeasure(n=n, m=chain.m, words=words[keep].astype(_word_dtype(chain.m)),
                        weights=weights[keep])


def _evaluate_suffixes(f, suffixes):
    """Evaluate f once per distinct suffix and scatter the values back."""
    count, length = suffixes.shape
    m = max(2, int(suffixes.max()) + 1) if suffixes.size else 2
    if m ** length >= _CODE_LIMIT or count < 2:
        return f.evaluate(suffixes)
    codes = word_codes(suffixes, m)
    unique, inverse = np.unique(codes, return_inverse=True)
    if unique.shape[0] == count:
        return f.evaluate(suffixes)
    values = f.evaluate(decode_codes(unique, m, length))
    return values[inverse.reshape(-1)]


def birkhoff_sums(f, words):
    """Σ_k f(w_{k+1..n}) for every row of ``words``."""
    words = np.asarray(words)
    total = np.zeros(words.shape[0])
    for start in range(words.shape[1]):
        total += _evaluate_suffixes(f, words[:, start:])
    return total


def birkhoff_sum(f, word):
    word = word if isinstance(word, Word) else Word(word)
    return float(birkhoff_sums(f, word.as_array()[None, :])[0])


def variation_bound(f, n):
    if n < 1:
        raise InvalidMeasureError('variation needs n >= 1', n=n)
    return 2.0 * float(f.error_bound(n))


def birkhoff_variation(f, n):
    """Bound on var_n of the averaged function A_n f."""
    return float(np.mean([variation_bound(f, n - k) for k in range(n)]))


@dataclass(frozen=True)
class AbramovStats:
    entropy_rate: float
    averages: Tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self):
        return {'entropy_rate': self.entropy_rate, 'averages': list(self.averages)}


def abramov_stats(measure, n, functions: Sequence[WordFunction]):
    """σ-level entropy rate and f-averages of the n-th level Bernoulli extension."""
    if n != measure.n:
        raise InvalidMeasureError(f'measure has block length {measure.n}, not {n}', n=n)
    averages = []
    for f in functions:
        sums = birkhoff_sums(f, measure.words)
        averages.append(float(np.sum(measure.weights * sums)) / n)
    return AbramovStats(entropy_rate=shannon_entropy(measure) / n, averages=tuple(averages))
