import json
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.models.errors import ConfigError, InvalidOptionsError
from src.models.ifs import SYSTEM_BUILDERS, example2_system, linear_system, manneville_pomeau_system
from src.models.potential import (
    coordinate_potential,
    first_symbol_potential,
    indicator_branch_potential,
    polynomial_potential,
)
from src.models.spectrum import SolverOptions

VALIDATE_SUITES = ('besicovitch', 'moran', 'lemma1', 'markov', 'brute_force', 'abramov', 'parabolic')
POTENTIALS = ('coordinate', 'polynomial', 'first_symbol', 'indicator_branch')
COMMANDS = ('spectrum', 'alpha', 'dim', 'validate')
FORMATS = ('csv', 'json', 'xlsx')


def _check_keys(data, allowed, where):
    if not isinstance(data, dict):
        raise ConfigError(f'{where} must be an object', key=where)
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in {where}", key=f'{where}.{key}')


def _require(data, key, where):
    if key not in data or data[key] is None:
        raise ConfigError(f'{where}.{key} is required', key=f'{where}.{key}')
    return data[key]


def _number(value, key, optional=False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{key} must be a number', key=key)
    return float(value)


def _integer(value, key, optional=False):
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'{key} must be an integer', key=key)
    return value


def _number_list(value, key, minimum=1):
    if not isinstance(value, list) or len(value) < minimum:
        raise ConfigError(f'{key} must be a list of at least {minimum} numbers', key=key)
    return tuple(_number(v, f'{key}[{i}]') for i, v in enumerate(value))


def _drop_none(data):
    return {key: value for key, value in data.items() if value is not None}


@dataclass(frozen=True)
class SystemConfig:
    name: str
    ratios: Optional[Tuple[float, ...]] = None
    offsets: Optional[Tuple[float, ...]] = None
    beta: Optional[float] = None

    @classmethod
    def parse(cls, data):
        _check_keys(data, ('name', 'ratios', 'offsets', 'beta'), 'system')
        name = data.get('name') or ('linear' if 'ratios' in data else None)
        if name is None:
            raise ConfigError('system.name is required', key='system.name')
        if name not in SYSTEM_BUILDERS:
            raise ConfigError(
                f"system.name must be one of {', '.join(SYSTEM_BUILDERS)}, got '{name}'",
                key='system.name')
        if name == 'linear':
            ratios = _number_list(_require(data, 'ratios', 'system'), 'system.ratios', minimum=2)
            offsets = data.get('offsets')
            if offsets is not None:
                offsets = _number_list(offsets, 'system.offsets', minimum=2)
            return cls(name=name, ratios=ratios, offsets=offsets)
        if name == 'manneville_pomeau':
            return cls(name=name, beta=_number(_require(data, 'beta', 'system'), 'system.beta'))
        return cls(name=name)

    def to_dict(self):
        return _drop_none({
            'name': self.name,
            'ratios': list(self.ratios) if self.ratios else None,
            'offsets': list(self.offsets) if self.offsets else None,
            'beta': self.beta
        })


@dataclass(frozen=True)
class PotentialConfig:
    name: str
    values: Optional[Tuple[float, ...]] = None
    coefficients: Optional[Tuple[float, ...]] = None
    branch: Optional[int] = None

    @classmethod
    def parse(cls, data):
        _check_keys(data, ('name', 'values', 'coefficients', 'branch'), 'potential')
        name = _require(data, 'name', 'potential')
        if name not in POTENTIALS:
            raise ConfigError(
                f"potential.name must be one of {', '.join(POTENTIALS)}, got '{name}'",
                key='potential.name')
        if name == 'first_symbol':
            return cls(name=name, values=_number_list(
                _require(data, 'values', 'potential'), 'potential.values', minimum=2))
        if name == 'polynomial':
            return cls(name=name, coefficients=_number_list(
                _require(data, 'coefficients', 'potential'), 'potential.coefficients'))
        if name == 'indicator_branch':
            return cls(name=name, branch=_integer(
                _require(data, 'branch', 'potential'), 'potential.branch'))
        return cls(name=name)

    def to_dict(self):
        return _drop_none({
            'name': self.name,
            'values': list(self.values) if self.values else None,
            'coefficients': list(self.coefficients) if self.coefficients else None,
            'branch': self.branch
        })


@dataclass(frozen=True)
class CommandConfig:
    name: str
    alphas: Tuple[float, ...] = ()
    alpha: Optional[float] = None
    depths: Tuple[int, ...] = ()
    suite: Optional[str] = None
    n: Optional[int] = None

    @classmethod
    def parse(cls, data):
        _check_keys(data, ('name', 'alphas', 'grid', 'alpha', 'depths', 'suite', 'n'), 'command')
        name = _require(data, 'name', 'command')
        if name not in COMMANDS:
            raise ConfigError(
                f"command.name must be one of {', '.join(COMMANDS)}, got '{name}'",
                key='command.name')

        if name == 'spectrum':
            if 'alphas' in data and 'grid' in data:
                raise ConfigError('command takes either alphas or grid, not both', key='command')
            if 'grid' in data:
                return cls(name=name, alphas=_parse_grid(data['grid']))
            return cls(name=name, alphas=_number_list(
                _require(data, 'alphas', 'command'), 'command.alphas'))
        if name == 'alpha':
            return cls(name=name, alpha=_number(_require(data, 'alpha', 'command'), 'command.alpha'))
        if name == 'dim':
            depths = data.get('depths') or []
            if not isinstance(depths, list):
                raise ConfigError('command.depths must be a list of integers', key='command.depths')
            depths = tuple(_integer(d, f'command.depths[{i}]') for i, d in enumerate(depths))
            return cls(name=name, depths=depths)

        suite = _require(data, 'suite', 'command')
        if suite not in VALIDATE_SUITES:
            raise ConfigError(
                f"command.suite must be one of {', '.join(VALIDATE_SUITES)}, got '{suite}'",
                key='command.suite')
        return cls(name=name, suite=suite,
                   n=_integer(data.get('n'), 'command.n', optional=True))

    @property
    def alpha_list(self):
        return list(self.alphas) if self.name == 'spectrum' else [self.alpha]

    def to_dict(self):
        data = {'name': self.name}
        if self.name == 'spectrum':
            data['alphas'] = list(self.alphas)
        elif self.name == 'alpha':
            data['alpha'] = self.alpha
        elif self.name == 'dim':
            data['depths'] = list(self.depths)
        else:
            data['suite'] = self.suite
            if self.n is not None:
                data['n'] = self.n
        return data


def _parse_grid(data):
    _check_keys(data, ('start', 'stop', 'num'), 'command.grid')
    start = _number(_require(data, 'start', 'command.grid'), 'command.grid.start')
    stop = _number(_require(data, 'stop', 'command.grid'), 'command.grid.stop')
    num = _integer(_require(data, 'num', 'command.grid'), 'command.grid.num')
    if num < 1:
        raise ConfigError('command.grid.num must be at least 1', key='command.grid.num')
    return tuple(float(a) for a in np.linspace(start, stop, num))


SOLVER_KEYS = ('n', 'rho', 'delta', 'tolerance', 'moran_tolerance', 'max_iterations',
               'enumeration_cap', 'seed')


def _parse_solver(data):
    _check_keys(data, SOLVER_KEYS, 'solver')
    values = {}
    for key in ('n', 'max_iterations', 'enumeration_cap', 'seed'):
        if key in data:
            values[key] = _integer(data[key], f'solver.{key}', optional=key == 'enumeration_cap')
    for key in ('rho', 'delta', 'tolerance', 'moran_tolerance'):
        if key in data:
            values[key] = _number(data[key], f'solver.{key}', optional=key in ('rho', 'delta'))
    try:
        return SolverOptions(**values)
    except InvalidOptionsError as e:
        raise ConfigError(f'solver: {e}', key='solver')


@dataclass(frozen=True)
class OutputConfig:
    path: Optional[str] = None
    format: str = 'csv'
    precision: int = 10

    @classmethod
    def parse(cls, data):
        _check_keys(data, ('path', 'format', 'precision'), 'output')
        path = data.get('path')
        if path is not None and not isinstance(path, str):
            raise ConfigError('output.path must be a string', key='output.path')
        output_format = data.get('format', 'csv')
        if output_format not in FORMATS:
            raise ConfigError(
                f"output.format must be one of {', '.join(FORMATS)}, got '{output_format}'",
                key='output.format')
        precision = _integer(data.get('precision', 10), 'output.precision')
        if not 1 <= precision <= 17:
            raise ConfigError('output.precision must be between 1 and 17', key='output.precision')
        return cls(path=path, format=output_format, precision=precision)

    def to_dict(self):
        return _drop_none({'path': self.path, 'format': self.format, 'precision': self.precision})


@dataclass(frozen=True)
class RunConfig:
    command: CommandConfig
    system: Optional[SystemConfig] = None
    potential: Optional[PotentialConfig] = None
    solver: SolverOptions = SolverOptions()
    output: OutputConfig = OutputConfig()

    def to_dict(self):
        data = {'command': self.command.to_dict()}
        if self.system is not None:
            data['system'] = self.system.to_dict()
        if self.potential is not None:
            data['potential'] = self.potential.to_dict()
        data['solver'] = self.solver.to_dict()
        data['output'] = self.output.to_dict()
        return data


def parse_config(text):
    """Validated RunConfig from JSON text; unknown keys are rejected."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'config is not valid JSON: {e}')
    _check_keys(data, ('system', 'potential', 'command', 'solver', 'output'), 'config')

    command = CommandConfig.parse(_require(data, 'command', 'config'))
    system = potential = None
    if command.name != 'validate' or 'system' in data:
        system = SystemConfig.parse(_require(data, 'system', 'config'))
    if command.name != 'validate' or 'potential' in data:
        potential = PotentialConfig.parse(_require(data, 'potential', 'config'))
    return RunConfig(
        command=command,
        system=system,
        potential=potential,
        solver=_parse_solver(data.get('solver') or {}),
        output=OutputConfig.parse(data.get('output') or {}))


def serialize_config(config):
    return json.dumps(config.to_dict(), indent=2)


def build_system(config):
    if config.name == 'linear':
        return linear_system(config.ratios, config.offsets)
    if config.name == 'manneville_pomeau':
        return manneville_pomeau_system(config.beta)
    return example2_system()


def build_potential(config, system):
    if config.name == 'coordinate':
        return coordinate_potential()
    if config.name == 'polynomial':
        return polynomial_potential(config.coefficients)
    if config.name == 'indicator_branch':
        return indicator_branch_potential(config.branch, system.m)
    return first_symbol_potential(config.values)
