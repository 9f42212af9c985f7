import contextlib
import logging
import os

import pandas as pd

from src.models.errors import ConfigError
from src.models.run_config import FORMATS, parse_config

logger = logging.getLogger(__name__)

PACKAGE_LOGGER = 'src'
DIAGNOSTICS_FORMAT = 'level=%(levelname)s logger=%(name)s %(message)s'


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f'config file {path} does not exist', path=path)
    with open(path, encoding='utf-8') as handle:
        return parse_config(handle.read())


def default_output_path(config_path, output_format):
    stem = os.path.splitext(config_path)[0]
    return f'{stem}.{output_format}'


def diagnostics_path(output_path):
    return f'{output_path}.diagnostics.log'


@contextlib.contextmanager
def diagnostics_log(path):
    """Send INFO and above from the package loggers to ``path`` for the duration."""
    package = logging.getLogger(PACKAGE_LOGGER)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    handler = logging.FileHandler(path, mode='w', encoding='utf-8')
    handler.setLevel(logging.INFO)
    handler.setFormatter(logging.Formatter(DIAGNOSTICS_FORMAT))
    previous = package.level
    if package.getEffectiveLevel() > logging.INFO:
        package.setLevel(logging.INFO)
    package.addHandler(handler)
    try:
        yield handler
    finally:
        package.removeHandler(handler)
        package.setLevel(previous)
        handler.close()


def table_frame(rows, columns=None):
    """DataFrame from to_dict() rows, in a fixed column order."""
    df = pd.DataFrame([row.to_dict() if hasattr(row, 'to_dict') else row for row in rows])
    if columns is not None:
        df = df.reindex(columns=list(columns))
    return df


def export_table(df, path, output_format='csv', precision=10, summary=None, sheet_name='Spectrum'):
    """Write ``df`` as csv, json records or xlsx; xlsx gets a Summary sheet from ``summary``."""
    if output_format not in FORMATS:
        raise ConfigError(f"output format must be one of {', '.join(FORMATS)}, got '{output_format}'")
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)

    if output_format == 'csv':
        df.to_csv(path, index=False, float_format=f'%.{precision}g', lineterminator='\n')
    elif output_format == 'json':
        df.to_json(path, orient='records', indent=2, double_precision=min(precision, 15))
    else:
        with pd.ExcelWriter(path, engine='openpyxl') as writer:
            df.to_excel(writer, sheet_name=sheet_name, index=False)

            if summary:
                summary_data = {
                    'Information': list(summary.keys()),
                    'Detail': [str(value) for value in summary.values()]
                }
                summary_df = pd.DataFrame(summary_data)
                summary_df.to_excel(writer, sheet_name='Summary', index=False)

    logger.info('wrote %d rows to %s (%s)', len(df), path, output_format)
    return path


def read_table(path):
    """Read back a table written by export_table."""
    if path.endswith('.csv'):
        return pd.read_csv(path)
    if path.endswith('.json'):
        return pd.read_json(path, orient='records')
    return pd.read_excel(path, sheet_name=0)


def table_text(df, precision=6):
    return df.to_string(index=False, float_format=lambda value: f'{value:.{precision}g}')
