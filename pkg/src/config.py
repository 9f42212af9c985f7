import os


def _int_env(name, default):
    value = os.environ.get(name)
    if value is None or value.strip() == '':
        return default
    try:
        return int(value)
    except ValueError:
        return default


class Config:
    ENUMERATION_CAP = _int_env('MFSPEC_ENUMERATION_CAP', 2 ** 24)
    LOG_LEVEL = os.environ.get('MFSPEC_LOG_LEVEL', 'WARNING')

    # exhaustive max-diameter tables stop at this many words
    DIAMETER_TABLE_WORDS = 4096
    MODULUS_GRID_POINTS = 2049


def thread_count():
    # read at call time so tests and `mfspec` can change it per process
    return max(1, _int_env('MFSPEC_THREADS', 1))
