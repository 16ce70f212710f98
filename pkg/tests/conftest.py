import numpy as np
import pytest

from manifold_hdr.grids import grid_for
from manifold_hdr.manifolds import Manifold

MANIFOLDS = [Manifold.circle(), Manifold.sphere(), Manifold.torus(2), Manifold.torus(3), Manifold.euclidean(2)]
COMPACT = [m for m in MANIFOLDS if m.kind != "euclidean"]
UNIT_BOX = ((-1.0, 1.0), (-1.0, 1.0))


def random_points(manifold, n, rng):
    bounds = ((-1.0, 1.0),) * manifold.dim if manifold.kind == "euclidean" else None
    return manifold.uniform(n, rng, bounds=bounds)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def sphere_grid_small():
    return grid_for(Manifold.sphere(), 1024)


@pytest.fixture(scope="session")
def torus_grid_small():
    return grid_for(Manifold.torus(2), 1024)


# lines printed by the acceptance suite, repeated at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
