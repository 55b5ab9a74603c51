import numpy as np
import pytest

from mwkit.attractor import solve_invariant_list
from mwkit.cli.config import load_config
from mwkit.systems import path


def load(name):
    cfg = load_config(path(name))
    mw = cfg.build()
    return mw, cfg.number("resolution")


@pytest.fixture(scope="session")
def systems():
    """name -> (MWGraph, default resolution) for every bundled config."""
    names = ["cantor", "cantor14", "tent", "sierpinski", "sierpinski_phi", "sierpinski_psi",
             "two_vertex"]
    return {n: load(n) for n in names}


@pytest.fixture(scope="session")
def invariant(systems):
    """Cached invariant lists at each system's default resolution."""
    cache = {}

    def get(name, h=None):
        mw, h0 = systems[name]
        key = (name, h or h0)
        if key not in cache:
            cache[key] = solve_invariant_list(mw, h or h0)
        return cache[key]
    return get


@pytest.fixture(scope="session")
def cantor(systems):
    return systems["cantor"][0]


@pytest.fixture(scope="session")
def tent(systems):
    return systems["tent"][0]


@pytest.fixture(scope="session")
def sierpinski(systems):
    return systems["sierpinski"][0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
