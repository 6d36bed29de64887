import numpy as np
import pytest

from src.geometry import build_slab_geometry, simpson_rule
from src.levelset import circle_distance, init_from_function
from src.mesh import Rectangle, build_uniform_mesh
from src.spaces import ScalarSpace
from src.twophase import FlowLayout


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow solver tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def unit_mesh():
    # circles of radius 0.25 or 0.27 around (0.5, 0.5) miss every vertex of this grid
    return build_uniform_mesh(Rectangle(0.0, 1.0, 0.0, 1.0), 10, 10)


@pytest.fixture
def drop():
    return circle_distance((0.5, 0.5), 0.25)


def static_slab(mesh, phi0, t_n=0.0, dt=0.1, degree=2, index=0):
    """Slab whose level set is phi0 at all three Simpson times"""
    quadrature = simpson_rule(t_n, dt)
    fields = [init_from_function(mesh, degree, phi0, t) for t in quadrature.points]
    return build_slab_geometry(fields, quadrature, index)


def flow_layout(slab, k=1, with_surfactant=True):
    mesh = slab.mesh
    velocity = tuple(ScalarSpace(mesh, 2, slab.active_elements[i]) for i in (1, 2))
    pressure = tuple(ScalarSpace(mesh, 1, slab.active_elements[i]) for i in (1, 2))
    surfactant = ScalarSpace(mesh, 1, slab.active_elements[0]) if with_surfactant else None
    return FlowLayout(velocity, pressure, surfactant, k)


@pytest.fixture
def drop_slab(unit_mesh, drop):
    return static_slab(unit_mesh, drop)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_slab():
    return static_slab


@pytest.fixture
def make_layout():
    return flow_layout
