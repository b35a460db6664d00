"""Pytest configuration script."""
# pylint: disable=redefined-outer-name

from pathlib import Path

import pytest

from fsm_watermark import bundle, data, utils
from fsm_watermark.fsm import connectivity_graph
from fsm_watermark.redux import LprkSpec, lpr_k
from fsm_watermark.run_config import SCHEME_SEED


@pytest.fixture(autouse=True)
def default_verbosity():
    """Every test starts with the default log level"""
    utils.set_verbosity(utils.INFO)
    yield
    utils.set_verbosity(utils.INFO)


# Fixtures of the bundled host
@pytest.fixture(scope='session')
def example_dirname():
    """Directory of the bundled example"""
    return Path(__file__).absolute().parent.parent / "example"


@pytest.fixture(scope='session')
def host_filepath(example_dirname):
    """Host machine in the JSON interchange format"""
    return example_dirname / "host_machine.json"


@pytest.fixture(scope='session')
def kiss2_filepath(example_dirname):
    """Same host in KISS2"""
    return example_dirname / "host_machine.kiss2"


@pytest.fixture(scope='session')
def host(host_filepath):
    """Bundled eight-state host"""
    return data.read_fsm(host_filepath)


@pytest.fixture(scope='session')
def host_graph(host):
    """Connectivity graph of the host"""
    return connectivity_graph(host)


@pytest.fixture(scope='session')
def longest_host_path():
    """Longest simple path of the host, lexically largest"""
    return [0, 1, 3, 7, 4, 5, 6, 2]


# Factories
@pytest.fixture(scope='session')
def generate_lprk(host_graph):
    """creates function to build the LPR(k) of the host"""
    built = {}

    def _generate(n, k, z=None):
        if (n, k, z) not in built:
            built[(n, k, z)] = lpr_k(host_graph, LprkSpec(n, k, z))
        return built[(n, k, z)]
    return _generate


@pytest.fixture(scope='session')
def generate_package(host):
    """creates function to embed a watermark in the host"""
    built = {}

    def _generate(n, k, mode="fixed", scheme_seed=SCHEME_SEED):
        if (n, k, mode, scheme_seed) not in built:
            built[(n, k, mode, scheme_seed)] = bundle.embed_watermark(
                host, n, k, mode=mode, scheme_seed=scheme_seed)
        return built[(n, k, mode, scheme_seed)]
    return _generate
