import numpy as np
import pytest

from polysafe import asset_path
from polysafe.environment import Cell, Polytope, load
from polysafe.pipeline import synthesize_environment
from polysafe.synthesis import AgentSystem, SynthesisConfig
from polysafe.trajectory import ControlPoints, build_reference, coeffs_from_control_points


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def corridor():
    return load(asset_path("corridor3.json"))


@pytest.fixture(scope="session")
def figure8():
    return load(asset_path("figure8_10cells.json"))


@pytest.fixture(scope="session")
def planar_agent():
    return AgentSystem.single_integrator(2)


@pytest.fixture(scope="session")
def corridor_library(corridor, planar_agent):
    library, failures = synthesize_environment(corridor, planar_agent, SynthesisConfig())
    assert not failures, f"corridor synthesis failed: {failures}"
    return library


@pytest.fixture
def line_agent():
    return AgentSystem(np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1)))


@pytest.fixture
def benchmark_cell():
    """1-D cell [0, 10] with the cubic segment P = [1, 2, 3, 4]."""
    return Cell("bench", Polytope.box([0.0], [10.0]), ControlPoints([[1.0, 2.0, 3.0, 4.0]]))


@pytest.fixture
def benchmark_ref(benchmark_cell):
    return build_reference(coeffs_from_control_points(benchmark_cell.segment))


@pytest.fixture
def strip_cell():
    """The half-strip ``0 <= x <= 1, y >= 0`` with a cubic running up its middle."""
    strip = Polytope([[1.0, 0.0], [-1.0, 0.0], [0.0, -1.0]], [1.0, 0.0, 0.0])
    return Cell("strip", strip, ControlPoints([[0.5, 0.5, 0.5, 0.5], [1.0, 2.0, 3.0, 4.0]]))
