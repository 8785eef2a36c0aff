import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from hermite_qi.bspline import UniformGrid  # noqa: E402
from hermite_qi.hierarchy import HierarchicalMesh  # noqa: E402

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DEGREE_PAIRS = [(2, 2), (3, 3), (4, 4)]


def random_mesh(rng, base=None, levels=3, frac=0.3):
    """Random nested mesh: each round splits a random subset of the finest active cells."""
    base = base or UniformGrid(n_base=(4, 4))
    mesh = HierarchicalMesh(base)
    for l in range(levels - 1):
        cells = mesh.active_cells(l) if l == mesh.depth - 1 else mesh.active_cells(mesh.depth - 1)
        if not cells:
            break
        pick = [c for c in cells if rng.random() < frac] or [cells[rng.integers(len(cells))]]
        mesh = mesh.split(pick)
    return mesh


def random_poly(rng, degrees):
    d1, d2 = degrees
    return rng.uniform(-1, 1, (d1 + 1, d2 + 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


@pytest.fixture
def base8():
    return UniformGrid()


@pytest.fixture
def left_half_mesh():
    refined = np.zeros((8, 8), dtype=bool)
    refined[:, :4] = True
    return HierarchicalMesh(UniformGrid(), [refined])


# criterion number -> one-line verdict, filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
