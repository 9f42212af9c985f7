import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.config import Config
from src.models.errors import InvalidOptionsError

DEFAULT_WINDOW = 0.05
PARABOLIC_DELTA_FACTOR = 1e-3

# Column order of every spectrum table
COLUMNS = (
    'alpha', 'lower', 'upper', 'flag', 'n', 'rho', 'delta', 'lemma1_gap', 'iterations',
    't', 'q', 'cover_size', 'achieved_alpha', 'achieved_lyapunov', 'error',
)


@dataclass(frozen=True)
class SolverOptions:
    n: int = 10
    rho: Optional[float] = None
    delta: Optional[float] = None
    tolerance: float = 1e-8
    moran_tolerance: float = 1e-10
    max_iterations: int = 200
    enumeration_cap: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 2:
            raise InvalidOptionsError(f'depth n must be an integer >= 2, got {self.n!r}')
        if not self.tolerance > 0 or not self.moran_tolerance > 0:
            raise InvalidOptionsError('tolerances must be positive')
        if self.max_iterations < 1:
            raise InvalidOptionsError('max_iterations must be at least 1')
        if self.rho is not None and not self.rho > 0:
            raise InvalidOptionsError(f'window rho must be positive, got {self.rho}')
        if self.delta is not None and not self.delta >= 0:
            raise InvalidOptionsError(f'lyapunov floor delta must be >= 0, got {self.delta}')
        if self.enumeration_cap is not None and self.enumeration_cap < 1:
            raise InvalidOptionsError('enumeration_cap must be positive')

    @property
    def cap(self):
        return Config.ENUMERATION_CAP if self.enumeration_cap is None else self.enumeration_cap

    def window(self, variation_slack):
        if self.rho is not None:
            return self.rho
        return max(DEFAULT_WINDOW, 2.0 * variation_slack)

    def lyapunov_floor(self, system):
        """Σ̃(δ) restriction for the cover; parabolic systems get a small default."""
        if self.delta is not None:
            return self.delta
        if system.has_parabolic:
            return PARABOLIC_DELTA_FACTOR * math.log(system.m)
        return 0.0

    def replace(self, **changes):
        values = self.to_dict()
        values.update(changes)
        return SolverOptions(**values)

    def to_dict(self):
        return {
            'n': self.n,
            'rho': self.rho,
            'delta': self.delta,
            'tolerance': self.tolerance,
            'moran_tolerance': self.moran_tolerance,
            'max_iterations': self.max_iterations,
            'enumeration_cap': self.enumeration_cap,
            'seed': self.seed
        }


@dataclass(frozen=True)
class ParabolicInterval:
    lo: float = math.nan
    hi: float = math.nan
    empty: bool = True

    def contains(self, alpha):
        return not self.empty and self.lo <= alpha <= self.hi

    def to_dict(self):
        if self.empty:
            return {'empty': True}
        return {'empty': False, 'lo': self.lo, 'hi': self.hi}


@dataclass(frozen=True, eq=False)
class LowerBoundResult:
    dimension: float
    t: float
    q: float
    achieved_alpha: float
    achieved_lyapunov: float
    entropy_rate: float
    iterations: int
    log_partition: float
    variation_slack: float
    boundary: bool
    measure: object = None
    table_index: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {
            'dimension': self.dimension,
            't': self.t,
            'q': self.q,
            'achieved_alpha': self.achieved_alpha,
            'achieved_lyapunov': self.achieved_lyapunov,
            'entropy_rate': self.entropy_rate,
            'iterations': self.iterations,
            'variation_slack': self.variation_slack,
            'boundary': self.boundary
        }


@dataclass(frozen=True)
class UpperBoundResult:
    dimension: float
    cover_size: int
    rho: float
    delta: float
    n: int
    iterations: int

    def to_dict(self):
        return {
            'dimension': self.dimension,
            'cover_size': self.cover_size,
            'rho': self.rho,
            'delta': self.delta,
            'n': self.n,
            'iterations': self.iterations
        }


@dataclass(frozen=True)
class SpectrumPoint:
    alpha: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    in_parabolic_interval: bool = False
    n: Optional[int] = None
    rho: Optional[float] = None
    delta: Optional[float] = None
    lemma1_gap: Optional[float] = None
    iterations: Optional[int] = None
    t: Optional[float] = None
    q: Optional[float] = None
    cover_size: Optional[int] = None
    achieved_alpha: Optional[float] = None
    achieved_lyapunov: Optional[float] = None
    error: Optional[str] = None

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        return {
            'alpha': self.alpha,
            'lower': self.lower,
            'upper': self.upper,
            'flag': self.in_parabolic_interval,
            'n': self.n,
            'rho': self.rho,
            'delta': self.delta,
            'lemma1_gap': self.lemma1_gap,
            'iterations': self.iterations,
            't': self.t,
            'q': self.q,
            'cover_size': self.cover_size,
            'achieved_alpha': self.achieved_alpha,
            'achieved_lyapunov': self.achieved_lyapunov,
            'error': self.error
        }
