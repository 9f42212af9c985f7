import dataclasses
import json
import logging

import click

from src.models.errors import ConfigError, MfspecError
from src.models.estimator import (
    alpha_range,
    attractor_lower_bound,
    full_spectrum,
    moran_dimension,
    moran_profile,
    parabolic_interval,
    srb_average,
)
from src.models.ifs import SamplingPlan, lemma1_gap
from src.models.run_config import CommandConfig, build_potential, build_system
from src.models.spectrum import COLUMNS
from src.routes.import_export import (
    default_output_path,
    diagnostics_log,
    diagnostics_path,
    export_table,
    load_config,
    table_frame,
)
from src.routes.validate import EXIT_FATAL, EXIT_OK, EXIT_PARTIAL, run_suite

logger = logging.getLogger(__name__)

SRB_ITERATIONS = 100000

spectrum_bp = click.Group('spectrum')


def _summary(config, output_path):
    summary = {
        'Command': config.command.name,
        'System': json.dumps(config.system.to_dict()) if config.system else '',
        'Potential': json.dumps(config.potential.to_dict()) if config.potential else '',
        'Solver': json.dumps(config.solver.to_dict()),
        'Output': output_path
    }
    return summary


def spectrum_table(system, potential, alphas, opts):
    points = full_spectrum(system, potential, alphas, opts)
    for point in points:
        logger.info('alpha=%r n=%d cover_size=%s lemma1_gap=%s iterations=%s flag=%s error=%s',
                    point.alpha, point.n, point.cover_size, point.lemma1_gap, point.iterations,
                    point.in_parabolic_interval, point.error)
    failed = any(point.failed for point in points)
    return table_frame(points, COLUMNS), failed


def _quantity(rows, name, compute):
    try:
        value = compute()
        rows.append({'quantity': name, 'value': float(value), 'error': None})
        logger.info('quantity=%s value=%r', name, float(value))
    except MfspecError as e:
        rows.append({'quantity': name, 'value': None, 'error': str(e)})
        logger.info('quantity=%s error=%s', name, e)


def dimension_table(system, potential, opts, depths=()):
    """Quantity/value table: attractor estimates, achievable range and parabolic data."""
    rows = []
    n = opts.n
    _quantity(rows, f'moran_dimension[n={n}]', lambda: moran_dimension(system, n, cap=opts.cap))
    _quantity(rows, f'attractor_lower_bound[n={n}]', lambda: attractor_lower_bound(system, opts))

    if depths:
        try:
            profile, lowest = moran_profile(system, depths, cap=opts.cap)
            for depth, value in profile:
                rows.append({'quantity': f'moran_profile[n={depth}]', 'value': value, 'error': None})
            rows.append({'quantity': 'moran_profile_min', 'value': lowest, 'error': None})
        except MfspecError as e:
            rows.append({'quantity': 'moran_profile', 'value': None, 'error': str(e)})

    try:
        lo, hi = alpha_range(system, potential, n, opts.cap)
        rows.append({'quantity': f'alpha_min[n={n}]', 'value': lo, 'error': None})
        rows.append({'quantity': f'alpha_max[n={n}]', 'value': hi, 'error': None})
    except MfspecError as e:
        rows.append({'quantity': 'alpha_range', 'value': None, 'error': str(e)})

    interval = parabolic_interval(system, potential)
    if not interval.empty:
        rows.append({'quantity': 'parabolic_lo', 'value': interval.lo, 'error': None})
        rows.append({'quantity': 'parabolic_hi', 'value': interval.hi, 'error': None})
    for symbol in range(system.m):
        _quantity(rows, f'fixed_point_value[branch={symbol + 1}]',
                  lambda symbol=symbol: potential.fixed_point_value(system, symbol))

    _quantity(rows, f'lemma1_gap[n={n}]',
              lambda: lemma1_gap(system, n, SamplingPlan(cap=opts.cap)))
    if system.parameters.get('has_acim'):
        _quantity(rows, 'srb_average',
                  lambda: srb_average(system, potential, SRB_ITERATIONS, seed=opts.seed))

    failed = any(row['error'] for row in rows)
    return table_frame(rows, ('quantity', 'value', 'error')), failed


def run(config, config_path='mfspec.json', output=None):
    """Execute one RunConfig; returns the exit code (0 ok, 2 some rows failed, 1 fatal)."""
    output_path = output or config.output.path or \
        default_output_path(config_path, config.output.format)

    with diagnostics_log(diagnostics_path(output_path)):
        try:
            if config.command.name == 'validate':
                df, failed = run_suite(config.command.suite, config.command.n, config.solver.seed)
            else:
                system = build_system(config.system)
                potential = build_potential(config.potential, system)
                if config.command.name == 'dim':
                    df, failed = dimension_table(system, potential, config.solver,
                                                 config.command.depths)
                else:
                    df, failed = spectrum_table(system, potential, config.command.alpha_list,
                                                config.solver)

            export_table(df, output_path, config.output.format, config.output.precision,
                         summary=_summary(config, output_path))
        except MfspecError as e:
            logger.error('fatal %s', json.dumps(e.to_dict(), default=str))
            click.echo(json.dumps(e.to_dict(), default=str), err=True)
            return EXIT_FATAL
        except Exception as e:
            logger.exception('fatal error: %s', e)
            click.echo(json.dumps({'success': False, 'message': str(e)}), err=True)
            return EXIT_FATAL

    logger.info('run finished output=%s failed=%s', output_path, failed)
    return EXIT_PARTIAL if failed else EXIT_OK


def _load(ctx, config_path):
    try:
        return load_config(config_path)
    except MfspecError as e:
        click.echo(json.dumps(e.to_dict(), default=str), err=True)
        ctx.exit(EXIT_FATAL)


def _finish(ctx, config, config_path, output):
    code = run(config, config_path, output)
    if code != EXIT_FATAL:
        click.echo(output or config.output.path or
                   default_output_path(config_path, config.output.format))
    ctx.exit(code)


@spectrum_bp.command('run')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.option('--output', '-o', default=None, help='Table path; overrides output.path.')
@click.pass_context
def run_command(ctx, config_path, output):
    """Run the command described by a JSON config."""
    _finish(ctx, _load(ctx, config_path), config_path, output)


@spectrum_bp.command('dim')
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.option('--output', '-o', default=None, help='Table path; overrides output.path.')
@click.pass_context
def dim_command(ctx, config_path, output):
    """Attractor dimension estimates for the system of a JSON config."""
    config = _load(ctx, config_path)
    if config.system is None or config.potential is None:
        click.echo(json.dumps(ConfigError('dim needs a system and a potential').to_dict()),
                   err=True)
        ctx.exit(EXIT_FATAL)
    if config.command.name != 'dim':
        config = dataclasses.replace(config, command=CommandConfig(name='dim'))
    _finish(ctx, config, config_path, output)
