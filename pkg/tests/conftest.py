from functools import lru_cache

import numpy as np
import pytest

from rellichpoly.fem_eigen import SpectrumRequest, solve_spectrum
from rellichpoly.geometry import build_polytope, regular_polygon
from rellichpoly.meshing import mesh_at_level

SHAPES = {
    "square": [(0, 0), (1, 0), (1, 1), (0, 1)],
    "mixed_quad": [(0, 0), (2, -3), (4, -2), (2.75, 1.75)],
    "bisected_quad": [(0, 0), (0.5, -2), (4, 0), (5.5, 2)],
    "lshape": [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)],
    "trapezoid": [(0, 0), (3, 0), (2, 1), (0, 1)],
    "parallelogram": [(0, 0), (2, 0), (3, 1), (1, 1)],
    "rectangle": [(0, 0), (2, 0), (2, 1), (0, 1)],
    "right_isosceles": [(0, 0), (1, 0), (0, 1)],
    "generic_quad": [(0, 0), (2, 0), (3, 2), (-1, 1)],
    "kite": [(0, 0), (2, -1), (4, 0), (2, 3)],
}


def shape(name):
    if name == "pentagon":
        return regular_polygon(5, 1.0)
    return build_polytope(2, SHAPES[name])


@lru_cache(maxsize=None)
def _solve(name, level, num_eigs):
    P = shape(name)
    mesh = mesh_at_level(P, level)
    return P, mesh, solve_spectrum(SpectrumRequest(mesh, num_eigs))


@pytest.fixture(scope="session")
def fem():
    """``fem(name, level, num_eigs=1) -> (polytope, mesh, pairs)``, cached per session."""

    def get(name, level, num_eigs=1):
        return _solve(name, level, num_eigs)

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
