import json

import pytest

from src.models.errors import ConfigError
from src.models.run_config import (
    CommandConfig,
    build_potential,
    build_system,
    parse_config,
    serialize_config,
)


def config_text(**overrides):
    data = {
        'system': {'name': 'linear', 'ratios': [0.5, 0.5]},
        'potential': {'name': 'first_symbol', 'values': [1.0, 0.0]},
        'command': {'name': 'spectrum', 'alphas': [0.25, 0.5]},
    }
    data.update(overrides)
    return json.dumps(data)


def test_minimal_config_gets_defaults():
    config = parse_config(config_text())
    assert config.system.ratios == (0.5, 0.5)
    assert config.command.alpha_list == [0.25, 0.5]
    assert config.solver.n == 10
    assert config.output.format == 'csv'
    assert config.output.precision == 10


def test_ratios_alone_mean_linear():
    config = parse_config(config_text(system={'ratios': [0.5, 0.25]}))
    assert config.system.name == 'linear'


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError) as e:
        parse_config(config_text(system={'name': 'linear', 'ratios_typo': [0.5, 0.5]}))
    assert "unknown key 'ratios_typo' in system" in str(e.value)
    assert e.value.details['key'] == 'system.ratios_typo'
    with pytest.raises(ConfigError):
        parse_config(config_text(extra=1))


def test_missing_and_mistyped_fields():
    with pytest.raises(ConfigError) as e:
        parse_config(config_text(system={'name': 'linear'}))
    assert str(e.value) == 'system.ratios is required'
    with pytest.raises(ConfigError) as e:
        parse_config(config_text(solver={'n': 'ten'}))
    assert str(e.value) == 'solver.n must be an integer'
    with pytest.raises(ConfigError):
        parse_config(config_text(solver={'n': True}))
    with pytest.raises(ConfigError):
        parse_config(config_text(output={'format': 'parquet'}))
    with pytest.raises(ConfigError):
        parse_config(config_text(output={'precision': 0}))
    with pytest.raises(ConfigError):
        parse_config(config_text(system={'name': 'tent'}))


def test_solver_validation_becomes_config_error():
    with pytest.raises(ConfigError) as e:
        parse_config(config_text(solver={'n': 1}))
    assert e.value.to_dict()['kind'] == 'config'


def test_invalid_json():
    with pytest.raises(ConfigError):
        parse_config('{"system": ')


def test_grid_expands_to_alphas():
    config = parse_config(config_text(command={
        'name': 'spectrum', 'grid': {'start': 0.0, 'stop': 1.0, 'num': 5}}))
    assert config.command.alphas == pytest.approx((0.0, 0.25, 0.5, 0.75, 1.0))
    with pytest.raises(ConfigError):
        parse_config(config_text(command={
            'name': 'spectrum', 'alphas': [0.5], 'grid': {'start': 0, 'stop': 1, 'num': 2}}))


def test_dim_config_on_manneville_pomeau():
    config = parse_config(config_text(
        system={'name': 'manneville_pomeau', 'beta': 0.5},
        potential={'name': 'coordinate'},
        command={'name': 'dim', 'depths': [4, 6]},
        solver={'n': 6}))
    assert config.command.depths == (4, 6)
    system = build_system(config.system)
    assert system.parabolic_symbols == (0,)
    assert system.parameters['beta'] == 0.5
    assert build_potential(config.potential, system).name == 'coordinate'


def test_validate_config_needs_no_system():
    config = parse_config(json.dumps({'command': {'name': 'validate', 'suite': 'markov', 'n': 4}}))
    assert config.system is None and config.potential is None
    assert config.command.n == 4
    with pytest.raises(ConfigError):
        parse_config(json.dumps({'command': {'name': 'validate', 'suite': 'everything'}}))


def test_round_trip():
    config = parse_config(config_text(
        solver={'n': 8, 'rho': 0.1, 'seed': 4},
        output={'path': 'out/spectrum.json', 'format': 'json', 'precision': 12}))
    assert parse_config(serialize_config(config)) == config


def test_build_from_config():
    config = parse_config(config_text(
        system={'name': 'linear', 'ratios': [0.5, 0.25], 'offsets': [0.0, 0.75]},
        potential={'name': 'indicator_branch', 'branch': 2}))
    system = build_system(config.system)
    assert system.m == 2
    potential = build_potential(config.potential, system)
    assert potential.values == (0.0, 1.0)
    assert CommandConfig(name='alpha', alpha=0.3).alpha_list == [0.3]
