import json

import pytest

from src.models.ifs import example2_system, linear_system, manneville_pomeau_system
from src.models.potential import coordinate_potential, first_symbol_potential


@pytest.fixture(scope='session')
def half_system():
    return linear_system([0.5, 0.5])


@pytest.fixture(scope='session')
def uneven_system():
    return linear_system([0.5, 1.0 / 3.0])


@pytest.fixture(scope='session')
def mp_system():
    return manneville_pomeau_system(0.5)


@pytest.fixture(scope='session')
def example2():
    return example2_system()


@pytest.fixture
def bernoulli_potential():
    return first_symbol_potential([1.0, 0.0])


@pytest.fixture
def coordinate():
    return coordinate_potential()


@pytest.fixture
def write_config(tmp_path):
    def write(data, name='config.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path
    return write
