"""
Dimension estimators for Birkhoff level sets.

Lower values come from the best n-block measure (max H/L under the Birkhoff
constraint, solved by Dinkelbach iteration over Gibbs measures); upper values
from the Moran equation over the cylinders whose word average lies in the
window. Inside the parabolic interval both are the attractor estimate.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from src.config import thread_count
from src.models.errors import (
    AlphaUnreachableError,
    EnumerationLimitError,
    InfeasibleAlphaError,
    InvalidSystemError,
    MfspecError,
    NoCylindersError,
    NotContractingError,
    SolverDidNotConvergeError,
)
from src.models.ifs import SamplingPlan, lemma1_gap, log_diameters
from src.models.spectrum import (
    LowerBoundResult,
    ParabolicInterval,
    SpectrumPoint,
    UpperBoundResult,
)
from src.models.symbolic import (
    BlockMeasure,
    birkhoff_sums,
    birkhoff_variation,
    enumerate_words,
)

logger = logging.getLogger(__name__)

EXPONENT_CAP = 700.0
TILT_ITERATIONS = 200
LEMMA1_SAMPLE = 4096


@dataclass(frozen=True, eq=False)
class DepthTable:
    """Every word of length n with its log-diameter and Birkhoff sum."""
    n: int
    m: int
    words: np.ndarray
    log_diameter: np.ndarray
    phi: np.ndarray
    variation_slack: float

    @property
    def lyapunov(self):
        return -self.log_diameter / self.n

    @property
    def averages(self):
        return self.phi / self.n


def build_depth_table(system, potential, n, cap=None):
    words = enumerate_words(system.m, n, cap)
    f = potential.word_function(system)
    table = DepthTable(
        n=n,
        m=system.m,
        words=words,
        log_diameter=log_diameters(system, words),
        phi=birkhoff_sums(f, words),
        variation_slack=birkhoff_variation(f, n))
    logger.debug('depth table system=%s n=%d words=%d', system.name, n, words.shape[0])
    return table


def alpha_range(system, potential, n, cap=None, table=None):
    """Range of word averages at depth n."""
    table = table or build_depth_table(system, potential, n, cap)
    return float(np.min(table.averages)), float(np.max(table.averages))


def parabolic_interval(system, potential):
    values = [potential.fixed_point_value(system, symbol) for symbol in system.parabolic_symbols]
    if not values:
        return ParabolicInterval()
    return ParabolicInterval(lo=min(values), hi=max(values), empty=False)


def solve_moran(log_diameter, tolerance=1e-10):
    """Root s of Σ D^s = 1; returns (s, iterations)."""
    log_diameter = np.asarray(log_diameter, dtype=float)
    if log_diameter.size == 0:
        raise NoCylindersError('no cylinders passed the filter')
    if np.any(log_diameter >= 0):
        raise NotContractingError(
            'some cylinders have diameter >= 1; use a larger depth n',
            max_diameter=float(np.exp(np.max(log_diameter))))
    if log_diameter.size == 1:
        return 0.0, 0

    def pressure(s):
        return float(logsumexp(s * log_diameter))

    upper = math.log(log_diameter.size) / float(np.min(-log_diameter))
    if pressure(upper) >= 0:
        # all diameters equal: the bracket end is the root up to rounding
        return upper, 0
    root, info = brentq(pressure, 0.0, upper, xtol=tolerance, full_output=True)
    return float(root), int(info.iterations)


def moran_dimension(system, n, filter=None, cap=None, tolerance=1e-10):
    """s_n solving Σ_{w in filter} D_n(w)^s = 1; ``filter`` maps a word array to a mask."""
    words = enumerate_words(system.m, n, cap)
    log_diameter = log_diameters(system, words)
    if filter is not None:
        log_diameter = log_diameter[np.asarray(filter(words), dtype=bool)]
    return solve_moran(log_diameter, tolerance)[0]


def moran_profile(system, depths, filter=None, cap=None, tolerance=1e-10):
    """[(n, s_n)] over ``depths`` and the smallest value, a finite stand-in for liminf."""
    profile = [(n, moran_dimension(system, n, filter, cap, tolerance)) for n in depths]
    return profile, min(s for _, s in profile)


def upper_bound(system, potential, alpha, opts, table=None):
    table = table or build_depth_table(system, potential, opts.n, opts.cap)
    rho = opts.window(table.variation_slack)
    delta = opts.lyapunov_floor(system)
    averages = table.averages
    mask = np.abs(averages - alpha) < rho
    if delta > 0:
        mask &= table.lyapunov >= delta
    if not np.any(mask):
        nearest = float(averages[np.argmin(np.abs(averages - alpha))])
        raise AlphaUnreachableError(
            f'no word of length {opts.n} has average within {rho:g} of alpha={alpha:g}; '
            f'nearest achievable average is {nearest:g}',
            alpha=alpha, nearest=nearest,
            range=[float(np.min(averages)), float(np.max(averages))])
    s, iterations = solve_moran(table.log_diameter[mask], opts.moran_tolerance)
    cover_size = int(np.count_nonzero(mask))
    logger.info('upper bound alpha=%r n=%d cover_size=%d s=%.12g', alpha, opts.n, cover_size, s)
    return UpperBoundResult(dimension=s, cover_size=cover_size, rho=rho, delta=delta,
                            n=opts.n, iterations=iterations)


def _gibbs(log_diameter, phi, t, q):
    logits = t * log_diameter + q * phi
    log_z = float(logsumexp(logits))
    log_weights = logits - log_z
    return np.exp(log_weights), log_weights, log_z


def _tilt(log_diameter, phi, t, target, q_cap, tolerance):
    """q with Gibbs mean of φ equal to ``target``: Newton on the increasing mean,
    falling back to bisection whenever the step leaves the bracket."""

    def moments(q):
        weights, _, _ = _gibbs(log_diameter, phi, t, q)
        mean = float(np.sum(weights * phi))
        return mean, float(np.sum(weights * (phi - mean) ** 2))

    a, b = -q_cap, q_cap
    if moments(a)[0] > target + tolerance or moments(b)[0] < target - tolerance:
        raise SolverDidNotConvergeError(
            f'target {target:g} is not reachable with |q| <= {q_cap:g}', t=t)
    q = 0.0
    for _ in range(TILT_ITERATIONS):
        mean, variance = moments(q)
        gap = mean - target
        if abs(gap) <= tolerance:
            return q
        if gap > 0:
            b = q
        else:
            a = q
        if b - a <= 1e-15 * max(1.0, abs(q)):
            raise SolverDidNotConvergeError(
                f'q-tilt bracket collapsed with the mean still {gap:g} from the target',
                t=t, q=q, gap=gap)
        step = q - gap / variance if variance > 0 else math.nan
        q = step if a < step < b else 0.5 * (a + b)
    raise SolverDidNotConvergeError('q-tilt did not converge', t=t, q=q)


@dataclass(frozen=True)
class _Solution:
    t: float
    q: float
    log_partition: float
    weights: np.ndarray
    entropy: float
    lyapunov: float
    iterations: int


def _dinkelbach(log_diameter, phi, target, opts, tune):
    """max H(ν)/L(ν) over Gibbs measures ν ∝ D^t e^{qφ}; q is tuned to the constraint
    when ``tune`` is set and stays 0 otherwise."""
    lengths = -log_diameter
    q_cap = EXPONENT_CAP / max(float(np.max(np.abs(phi))), 1e-300)
    constraint_tolerance = 1e-12 * max(1.0, float(np.max(np.abs(phi))))
    t = 0.0
    q = 0.0
    for iteration in range(1, opts.max_iterations + 1):
        if tune:
            q = _tilt(log_diameter, phi, t, target, q_cap, constraint_tolerance)
        weights, log_weights, log_z = _gibbs(log_diameter, phi, t, q)
        entropy = float(np.sum(-weights * log_weights))
        lyapunov = float(np.sum(weights * lengths))
        if not lyapunov > 0:
            raise NotContractingError('measure has zero Lyapunov sum; use a larger depth n')
        gap = entropy - t * lyapunov
        if abs(gap) <= opts.tolerance * max(1.0, lyapunov):
            return _Solution(t, q, log_z, weights, entropy, lyapunov, iteration)
        t = entropy / lyapunov
    raise SolverDidNotConvergeError(
        f'Dinkelbach iteration did not converge in {opts.max_iterations} steps', t=t, q=q)


def _lower_bound_result(table, index, solution, tuned, boundary):
    n = table.n
    weights = solution.weights
    keep = weights > 0
    index = index[keep]
    measure = BlockMeasure(n=n, m=table.m, words=table.words[index],
                           weights=weights[keep] / np.sum(weights[keep]))
    phi = table.phi[index]
    return LowerBoundResult(
        dimension=solution.entropy / solution.lyapunov,
        t=solution.t,
        q=solution.q if tuned else 0.0,
        achieved_alpha=float(np.sum(measure.weights * phi)) / n,
        achieved_lyapunov=solution.lyapunov / n,
        entropy_rate=solution.entropy / n,
        iterations=solution.iterations,
        log_partition=solution.log_partition,
        variation_slack=table.variation_slack,
        boundary=boundary,
        measure=measure,
        table_index=index)


def lower_bound(system, potential, alpha, opts, table=None):
    """Best n-block measure with Birkhoff average alpha; its H/L is the lower value."""
    table = table or build_depth_table(system, potential, opts.n, opts.cap)
    n = table.n
    allowed = np.arange(table.words.shape[0])
    if opts.delta:
        allowed = allowed[table.lyapunov >= opts.delta]
        if allowed.size == 0:
            raise NoCylindersError(f'no word of length {n} has lyapunov >= {opts.delta:g}')

    phi = table.phi[allowed]
    target = n * alpha
    lowest, highest = float(np.min(phi)), float(np.max(phi))
    feasibility = 1e-9 * max(1.0, float(np.max(np.abs(phi))))
    if target < lowest - feasibility or target > highest + feasibility:
        raise InfeasibleAlphaError(
            f'alpha={alpha:g} is outside the achievable range '
            f'[{lowest / n:g}, {highest / n:g}] at depth {n}',
            alpha=alpha, range=[lowest / n, highest / n])

    edge = None
    if abs(target - highest) <= feasibility:
        edge = highest
    elif abs(target - lowest) <= feasibility:
        edge = lowest

    if edge is not None:
        # boundary alpha: only the extremal words are feasible
        index = allowed[np.abs(phi - edge) <= feasibility]
        solution = _dinkelbach(table.log_diameter[index], table.phi[index], target, opts, tune=False)
        result = _lower_bound_result(table, index, solution, tuned=False, boundary=True)
    else:
        solution = _dinkelbach(table.log_diameter[allowed], phi, target, opts, tune=True)
        result = _lower_bound_result(table, allowed, solution, tuned=True, boundary=False)

    logger.info('lower bound alpha=%r n=%d dim=%.12g t=%.6g q=%.6g iterations=%d boundary=%s',
                alpha, n, result.dimension, result.t, result.q, result.iterations, result.boundary)
    return result


def attractor_lower_bound(system, opts, cap=None):
    """Best n-block measure without a Birkhoff constraint."""
    words = enumerate_words(system.m, opts.n, cap or opts.cap)
    log_diameter = log_diameters(system, words)
    solution = _dinkelbach(log_diameter, np.zeros_like(log_diameter), 0.0, opts, tune=False)
    return solution.entropy / solution.lyapunov


def gibbs_residual(result, table):
    """max |log ν(w) - (t log D + qφ - log Z)| over the support of the returned measure."""
    index = result.table_index
    expected = result.t * table.log_diameter[index] + result.q * table.phi[index] \
        - result.log_partition
    return float(np.max(np.abs(np.log(result.measure.weights) - expected)))


def _lemma1_gap_for(system, opts):
    try:
        return lemma1_gap(system, opts.n, SamplingPlan(cap=opts.cap))
    except EnumerationLimitError:
        return lemma1_gap(system, opts.n,
                          SamplingPlan(mode='random', count=LEMMA1_SAMPLE, seed=opts.seed))


def full_spectrum(system, potential, alphas, opts):
    """One SpectrumPoint per alpha, sorted by alpha; failed points carry their error."""
    interval = parabolic_interval(system, potential)
    table = build_depth_table(system, potential, opts.n, opts.cap)
    gap = _lemma1_gap_for(system, opts)
    rho = opts.window(table.variation_slack)
    delta = opts.lyapunov_floor(system)

    attractor = None
    attractor_error = None
    if any(interval.contains(alpha) for alpha in alphas):
        try:
            attractor = solve_moran(table.log_diameter, opts.moran_tolerance)[0]
        except MfspecError as e:
            attractor_error = str(e)

    def evaluate(alpha):
        common = {'alpha': alpha, 'n': opts.n, 'rho': rho, 'delta': delta, 'lemma1_gap': gap}
        if interval.contains(alpha):
            return SpectrumPoint(lower=attractor, upper=attractor, in_parabolic_interval=True,
                                 error=attractor_error, **common)
        errors = []
        lower = upper = None
        try:
            lower = lower_bound(system, potential, alpha, opts, table=table)
        except MfspecError as e:
            errors.append(str(e))
        try:
            upper = upper_bound(system, potential, alpha, opts, table=table)
        except MfspecError as e:
            errors.append(str(e))
        return SpectrumPoint(
            lower=lower.dimension if lower else None,
            upper=upper.dimension if upper else None,
            iterations=lower.iterations if lower else None,
            t=lower.t if lower else None,
            q=lower.q if lower else None,
            cover_size=upper.cover_size if upper else None,
            achieved_alpha=lower.achieved_alpha if lower else None,
            achieved_lyapunov=lower.achieved_lyapunov if lower else None,
            error='; '.join(errors) or None,
            **common)

    alphas = [float(alpha) for alpha in alphas]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        points = list(pool.map(evaluate, alphas))
    return sorted(points, key=lambda point: point.alpha)


def srb_average(system, potential, iterations=200000, burn_in=1000, seed=0):
    """Forward-orbit average of F for maps with an absolutely continuous invariant measure."""
    if system.forward is None or not system.parameters.get('has_acim'):
        raise InvalidSystemError(
            f'system {system.name} has no absolutely continuous invariant probability measure')
    rng = np.random.default_rng(seed)
    forward = system.forward
    x = float(rng.random())
    points = np.empty(iterations)
    for step in range(burn_in + iterations):
        x = float(forward(x))
        if not 0.0 < x < 1.0:
            # the orbit hit a fixed point in floating point; restart it
            x = float(rng.random())
        if step >= burn_in:
            points[step - burn_in] = x
    if potential.word_local:
        symbols = np.zeros(iterations, dtype=np.int64)
        for symbol, branch in enumerate(system.branches):
            image = branch.image
            symbols[(points >= image.lo) & (points <= image.hi)] = symbol
        values = np.asarray(potential.values)[symbols]
    else:
        values = potential.function(points)
    return float(np.mean(values))
