import os

os.environ.setdefault("MPLBACKEND", "Agg")

import numpy as np
import pytest

from mixedbvp import BoundaryCondition, make_grid


ALL_BCS = [BoundaryCondition.BC1, BoundaryCondition.BC2, BoundaryCondition.BC3]


@pytest.fixture(params=ALL_BCS, ids=lambda bc: bc.value)
def bc(request):
    return request.param


@pytest.fixture
def grid1000():
    return make_grid(1.0, 1000)


def random_smooth(rng, grid, modes=4):
    """Random band-limited density plus an affine part."""
    t = grid.nodes
    w = rng.uniform(-1.0, 1.0) + rng.uniform(-1.0, 1.0) * t
    for k in range(1, modes + 1):
        w = w + rng.uniform(-1.0, 1.0) * np.sin(2.0 * np.pi * k * t / grid.T)
        w = w + rng.uniform(-1.0, 1.0) * np.cos(2.0 * np.pi * k * t / grid.T)
    return w
