import numpy as np
import pytest

from rellichpoly.errors import DegenerateTriangle, TooFewInteriorNodes, TooManyInteriorNodes
from rellichpoly.fem_eigen import SpectrumRequest, assemble, solve_spectrum
from rellichpoly.geometry import build_polytope
from rellichpoly.meshing import Mesh, mesh_at_level

from conftest import shape

PI2 = np.pi**2


def _single_triangle(pts):
    nodes = np.array(pts, float)
    tris = np.array([[0, 1, 2]])
    bd = np.array([[0, 1, 0], [1, 2, 1], [2, 0, 2]])
    return Mesh(nodes, tris, bd, 0, 1.0)


def test_reference_element_matrices():
    K, M = assemble(_single_triangle([(0, 0), (1, 0), (0, 1)]))
    expected_k = [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]]
    np.testing.assert_allclose(K.toarray(), expected_k, atol=1e-15)
    area = 0.5
    expected_m = area / 12 * (np.ones((3, 3)) + np.eye(3))
    np.testing.assert_allclose(M.toarray(), expected_m, atol=1e-15)


def test_degenerate_triangle_rejected():
    with pytest.raises(DegenerateTriangle):
        assemble(_single_triangle([(0, 0), (1, 0), (2, 0)]))


@pytest.mark.parametrize("name", ["square", "mixed_quad", "lshape", "pentagon"])
def test_assembly_invariants(name):
    P = shape(name)
    mesh = mesh_at_level(P, 3)
    K, M = assemble(mesh)
    assert abs(K - K.T).max() < 1e-14
    assert abs(M - M.T).max() < 1e-14
    np.testing.assert_allclose(K @ np.ones(mesh.num_nodes), 0, atol=1e-12)
    one = np.ones(mesh.num_nodes)
    assert one @ (M @ one) == pytest.approx(P.volume, rel=1e-10)
    assert np.linalg.eigvalsh(K.toarray()).min() > -1e-10


def test_square_ground_state(fem):
    P, mesh, pairs = fem("square", 5, 3)
    lam = pairs[0].eigenvalue
    exact = 2 * PI2
    h = mesh.h_max
    assert lam > exact
    assert (lam - exact) / exact <= 2.0 * h**2
    # second and third approximate the double eigenvalue 5 pi^2
    for pair in pairs[1:]:
        assert pair.eigenvalue == pytest.approx(5 * PI2, rel=2e-2)


def test_right_isosceles_ground_state(fem):
    _, mesh, pairs = fem("right_isosceles", 5)
    lam = pairs[0].eigenvalue
    assert lam > 5 * PI2
    assert (lam - 5 * PI2) / (5 * PI2) <= 5.0 * mesh.h_max**2


@pytest.mark.parametrize("name", ["square", "right_isosceles", "mixed_quad", "pentagon"])
def test_eigenvalues_decrease_under_refinement(name, fem):
    prev = None
    for level in range(2, 6):
        lams = np.array([p.eigenvalue for p in fem(name, level, 3)[2]])
        if prev is not None:
            assert np.all(lams <= prev)
        prev = lams


@pytest.mark.parametrize("name", ["square", "lshape", "bisected_quad"])
def test_eigenpair_invariants(name, fem):
    _, mesh, pairs = fem(name, 4, 3)
    K, M = assemble(mesh)
    bnodes = mesh.boundary_nodes()
    C = np.stack([p.coefficients for p in pairs], axis=1)
    for j, pair in enumerate(pairs):
        c = pair.coefficients
        assert pair.index == j + 1
        assert pair.mesh_level == 4
        assert np.all(c[bnodes] == 0.0)
        assert c @ (M @ c) == pytest.approx(1.0, abs=1e-12)
        rq = (c @ (K @ c)) / (c @ (M @ c))
        assert rq == pytest.approx(pair.eigenvalue, rel=1e-10)
    gram = C.T @ (M @ C)
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() <= 1e-8
    lams = [p.eigenvalue for p in pairs]
    assert lams == sorted(lams)


def test_too_few_interior_nodes():
    mesh = mesh_at_level(shape("square"), 0)
    with pytest.raises(TooFewInteriorNodes):
        solve_spectrum(SpectrumRequest(mesh, 1))


def test_interior_node_cap():
    mesh = mesh_at_level(shape("square"), 7)
    with pytest.raises(TooManyInteriorNodes, match="6000"):
        solve_spectrum(SpectrumRequest(mesh, 1))


def test_bad_request():
    with pytest.raises(ValueError):
        SpectrumRequest(mesh_at_level(shape("square"), 1), 0)


def test_concurrent_solves_on_distinct_meshes():
    from concurrent.futures import ThreadPoolExecutor

    meshes = [mesh_at_level(build_polytope(2, [(0, 0), (s, 0), (s, s), (0, s)]), 3) for s in (1.0, 2.0)]
    with ThreadPoolExecutor(2) as ex:
        results = list(ex.map(lambda m: solve_spectrum(SpectrumRequest(m, 1))[0].eigenvalue, meshes))
    assert results[0] == pytest.approx(4 * results[1], rel=1e-10)
