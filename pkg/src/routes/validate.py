import json
import logging

import click
import numpy as np
from scipy.optimize import brentq
from scipy.special import entr

from src.models.errors import MfspecError
from src.models.estimator import (
    build_depth_table,
    full_spectrum,
    gibbs_residual,
    lower_bound,
    moran_dimension,
    upper_bound,
)
from src.models.ifs import (
    example2_system,
    geometric_potential,
    lemma1_gap,
    linear_system,
    manneville_pomeau_system,
)
from src.models.oracle import (
    BesicovitchSpec,
    besicovitch_potential,
    besicovitch_spectrum,
    besicovitch_system,
    brute_force_ratio,
    markov_block_entropy_exact,
)
from src.models.potential import coordinate_potential
from src.models.run_config import FORMATS, VALIDATE_SUITES
from src.models.spectrum import SolverOptions
from src.models.symbolic import (
    BlockMeasure,
    MarkovChainSpec,
    abramov_stats,
    block_marginal,
    first_symbol_function,
    shannon_entropy,
)
from src.routes.import_export import (
    diagnostics_log,
    diagnostics_path,
    export_table,
    table_frame,
    table_text,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_FATAL = 1

DEFAULT_DEPTHS = {
    'besicovitch': 14,
    'moran': 12,
    'lemma1': 16,
    'markov': 12,
    'brute_force': 2,
    'abramov': 8,
    'parabolic': 10,
}

BESICOVITCH_ALPHAS = (0.2, 0.3, 0.5)
BESICOVITCH_TOLERANCE = 0.02
BESICOVITCH_WINDOW = 0.05
MORAN_TOLERANCE = 1e-6
DEPTH_INVARIANCE = 1e-9
LINEAR_GAP = 1e-12
MARKOV_TOLERANCE = 1e-10
MARKOV_TRANSITION = ((0.9, 0.1), (0.2, 0.8))
BRUTE_ALPHAS = (0.3, 0.5, 0.7)
BRUTE_SLACK = 0.01
GIBBS_TOLERANCE = 1e-8
ABRAMOV_TOLERANCE = 1e-12
ABRAMOV_RATIOS = (0.5, 1.0 / 3.0)
ABRAMOV_WEIGHTS = (0.4, 0.6)
ABRAMOV_VALUES = (1.0, -0.5)

validate_bp = click.Group('validate')


def _besicovitch_rows(n, seed):
    spec = BesicovitchSpec(m=2, ratio=0.5, values=(1.0, 0.0))
    system = besicovitch_system(spec)
    potential = besicovitch_potential(spec)
    opts = SolverOptions(n=n, rho=BESICOVITCH_WINDOW, seed=seed)
    table = build_depth_table(system, potential, n, opts.cap)
    rows = []
    for alpha in BESICOVITCH_ALPHAS:
        closed = besicovitch_spectrum(spec, alpha)
        lower = lower_bound(system, potential, alpha, opts, table=table).dimension
        upper = upper_bound(system, potential, alpha, opts, table=table).dimension
        rows.append({
            'alpha': alpha,
            'lower': lower,
            'upper': upper,
            'closed_form': closed,
            'lower_error': abs(lower - closed),
            'window_slack': closed - upper,
            'passed': abs(lower - closed) <= BESICOVITCH_TOLERANCE
        })
    return rows


def _moran_rows(n, seed):
    depths = sorted({max(2, n // 3), max(2, 2 * n // 3), n})
    root = brentq(lambda s: 2.0 ** -s + 3.0 ** -s - 1.0, 0.0, 1.0, xtol=1e-15)
    rows = []
    for name, ratios, reference in (('linear(1/2,1/3)', (0.5, 1.0 / 3.0), root),
                                    ('linear(1/2,1/2)', (0.5, 0.5), 1.0)):
        system = linear_system(ratios)
        first = None
        for depth in depths:
            value = moran_dimension(system, depth)
            first = value if first is None else first
            rows.append({
                'system': name,
                'n': depth,
                'value': value,
                'reference': reference,
                'error': abs(value - reference),
                'passed': abs(value - reference) <= MORAN_TOLERANCE and
                abs(value - first) <= DEPTH_INVARIANCE
            })
    return rows


def _lemma1_rows(n, seed):
    depths = sorted({max(2, n // 4), max(2, n // 2), n})
    rows = []
    previous = None
    system = manneville_pomeau_system(0.5)
    for depth in depths:
        gap = lemma1_gap(system, depth)
        rows.append({
            'system': 'manneville_pomeau(0.5)',
            'n': depth,
            'gap': gap,
            'passed': previous is None or gap < previous
        })
        previous = gap
    for ratios in ((0.5, 0.5), (0.5, 1.0 / 3.0)):
        gap = lemma1_gap(linear_system(ratios), n)
        rows.append({
            'system': f'linear{tuple(round(r, 6) for r in ratios)}',
            'n': n,
            'gap': gap,
            'passed': gap <= LINEAR_GAP
        })
    return rows


def _markov_rows(n, seed):
    chain = MarkovChainSpec.from_transition(np.array(MARKOV_TRANSITION))
    rows = []
    for depth in range(1, n + 1):
        exact = markov_block_entropy_exact(chain, depth)
        enumerated = shannon_entropy(block_marginal(chain, depth)) / depth
        rows.append({
            'n': depth,
            'enumerated_rate': enumerated,
            'exact_rate': exact.block_entropy / depth,
            'entropy_rate': exact.rate,
            'error': abs(enumerated - exact.block_entropy / depth),
            'passed': abs(enumerated - exact.block_entropy / depth) <= MARKOV_TOLERANCE
        })
    return rows


def _brute_force_rows(n, seed):
    spec = BesicovitchSpec(m=2, ratio=0.5, values=(1.0, 0.0))
    system = besicovitch_system(spec)
    potential = besicovitch_potential(spec)
    opts = SolverOptions(n=max(n, 2), seed=seed)
    table = build_depth_table(system, potential, opts.n, opts.cap)
    rows = []
    for alpha in BRUTE_ALPHAS:
        result = lower_bound(system, potential, alpha, opts, table=table)
        brute = brute_force_ratio(system, potential, alpha, opts.n)
        residual = gibbs_residual(result, table)
        rows.append({
            'alpha': alpha,
            'n': opts.n,
            'lower': result.dimension,
            'brute_force': brute,
            'gibbs_residual': residual,
            'passed': result.dimension >= brute - BRUTE_SLACK and residual <= GIBBS_TOLERANCE
        })
    return rows


def _abramov_rows(n, seed):
    system = linear_system(ABRAMOV_RATIOS)
    q = np.array(ABRAMOV_WEIGHTS)
    functions = [geometric_potential(system), first_symbol_function(ABRAMOV_VALUES)]
    entropy = float(np.sum(entr(q)))
    lyapunov = float(np.sum(q * -np.log(ABRAMOV_RATIOS)))
    average = float(np.sum(q * np.array(ABRAMOV_VALUES)))
    rows = []
    for depth in [d for d in (2, 4, 8) if d <= n] or [n]:
        stats = abramov_stats(BlockMeasure.product(q, depth), depth, functions)
        error = max(abs(stats.entropy_rate - entropy),
                    abs(stats.averages[0] - lyapunov),
                    abs(stats.averages[1] - average))
        rows.append({
            'n': depth,
            'entropy_rate': stats.entropy_rate,
            'entropy_closed': entropy,
            'lyapunov': stats.averages[0],
            'lyapunov_closed': lyapunov,
            'f_average': stats.averages[1],
            'f_closed': average,
            'error': error,
            'passed': error <= ABRAMOV_TOLERANCE
        })
    return rows


def _parabolic_rows(n, seed):
    opts = SolverOptions(n=n, seed=seed)
    potential = coordinate_potential()
    cases = (
        ('example2', example2_system(), [float(a) for a in np.linspace(0.1, 0.9, 5)],
         [True] * 5),
        ('manneville_pomeau(0.5)', manneville_pomeau_system(0.5), [0.0, 0.25, 0.5],
         [True, False, False]),
    )
    rows = []
    for name, system, alphas, expected in cases:
        points = full_spectrum(system, potential, alphas, opts)
        for point, flag in zip(points, expected):
            rows.append({
                'system': name,
                'alpha': point.alpha,
                'flag': point.in_parabolic_interval,
                'expected_flag': flag,
                'lower': point.lower,
                'upper': point.upper,
                'passed': point.in_parabolic_interval == flag
            })
    return rows


SUITES = {
    'besicovitch': _besicovitch_rows,
    'moran': _moran_rows,
    'lemma1': _lemma1_rows,
    'markov': _markov_rows,
    'brute_force': _brute_force_rows,
    'abramov': _abramov_rows,
    'parabolic': _parabolic_rows,
}


def run_suite(suite, n=None, seed=0):
    """Rows of one validation suite as a DataFrame, plus whether any row failed."""
    n = DEFAULT_DEPTHS[suite] if n is None else n
    rows = SUITES[suite](n, seed)
    for row in rows:
        logger.info('suite=%s %s', suite, ' '.join(f'{key}={value}' for key, value in row.items()))
    df = table_frame(rows)
    return df, not bool(df['passed'].all())


@validate_bp.command('validate')
@click.argument('suite', type=click.Choice(VALIDATE_SUITES))
@click.option('--n', 'n', type=int, default=None, help='Depth; each suite has its own default.')
@click.option('--output', '-o', default=None, help='Write the table here instead of stdout.')
@click.option('--format', 'output_format', type=click.Choice(FORMATS), default='csv')
@click.option('--seed', type=int, default=0)
@click.pass_context
def validate_command(ctx, suite, n, output, output_format, seed):
    """Check the estimators against closed forms and brute force."""
    try:
        if output is None:
            df, failed = run_suite(suite, n, seed)
            click.echo(table_text(df))
        else:
            with diagnostics_log(diagnostics_path(output)):
                df, failed = run_suite(suite, n, seed)
                export_table(df, output, output_format,
                             summary={'Suite': suite, 'Depth': n or DEFAULT_DEPTHS[suite]},
                             sheet_name='Validation')
            click.echo(output)
    except MfspecError as e:
        click.echo(json.dumps(e.to_dict(), default=str), err=True)
        ctx.exit(EXIT_FATAL)
    ctx.exit(EXIT_PARTIAL if failed else EXIT_OK)
