import numpy as np
import pytest

from rellichpoly.errors import InconsistentMesh
from rellichpoly.exact import ExactEigenfunction, exact_neumann_masses
from rellichpoly.geometry import signed_distances
from rellichpoly.neumann import FemSource, neumann_masses, neumann_masses_fem, rellich_boundary_integral

PI2 = np.pi**2


def test_fem_square_masses_level6(fem):
    P, mesh, pairs = fem("square", 6)
    rep = neumann_masses_fem(P, mesh, pairs[0])
    assert rep.source == "fem(level=6)"
    np.testing.assert_allclose(rep.per_face_mass, 2 * PI2, rtol=0.05)
    np.testing.assert_array_equal(rep.per_face_measure, P.measures)


@pytest.mark.parametrize("name", ["square", "mixed_quad", "lshape", "pentagon"])
def test_fem_masses_nonnegative(name, fem):
    P, mesh, pairs = fem(name, 3, 3)
    for pair in pairs:
        rep = neumann_masses_fem(P, mesh, pair)
        assert np.all(rep.per_face_mass >= 0)
        assert rep.num_faces == P.num_faces


def test_square_mass_symmetry(fem):
    # the level-0 split along one diagonal makes the mesh symmetric under the
    # reflection across that diagonal, which swaps two pairs of faces
    P, mesh, pairs = fem("square", 5)
    tri0 = mesh_level0_diagonal(P)
    I = neumann_masses_fem(P, mesh, pairs[0]).per_face_mass
    if tri0 == (0, 2):
        # reflection across y = x swaps y=0 <-> x=0 and x=1 <-> y=1
        pairs_swapped = [(0, 3), (1, 2)]
    else:
        pairs_swapped = [(0, 1), (2, 3)]
    for i, j in pairs_swapped:
        assert I[i] == pytest.approx(I[j], rel=1e-10)


def mesh_level0_diagonal(P):
    from rellichpoly.meshing import triangulate

    M = triangulate(P)
    shared = set(M.triangles[0]) & set(M.triangles[1])
    return tuple(sorted(int(v) for v in shared))


def test_exact_rellich_integral_square():
    e = ExactEigenfunction.rectangle()
    P = e.polytope
    assert rellich_boundary_integral(P, e, (0, 0)) == pytest.approx(4 * PI2, rel=1e-12)
    assert rellich_boundary_integral(P, e, (17, -5)) == pytest.approx(4 * PI2, rel=1e-12)
    I = exact_neumann_masses(e).per_face_mass
    # p-invariance is equivalent to sum I_i nu_i = 0
    np.testing.assert_allclose(I @ P.normals, 0, atol=1e-12)


def test_fem_rellich_integral_square(fem):
    P, mesh, pairs = fem("square", 6)
    val = rellich_boundary_integral(P, FemSource(mesh, pairs[0]), (0, 0))
    assert val == pytest.approx(4 * PI2, rel=0.05)


@pytest.mark.parametrize("name", ["square", "mixed_quad", "lshape", "pentagon", "bisected_quad"])
@pytest.mark.parametrize("level", [2, 4])
def test_decomposition_identity_fem(name, level, fem, rng):
    P, mesh, pairs = fem(name, level, 2)
    for pair in pairs:
        src = FemSource(mesh, pair)
        I = neumann_masses(P, src).per_face_mass
        for p in rng.uniform(-10, 10, size=(10, 2)):
            raw = rellich_boundary_integral(P, src, p)
            split = signed_distances(P, p) @ I
            assert abs(raw - split) <= 1e-10 * abs(split) + 1e-12 * pair.eigenvalue


@pytest.mark.parametrize(
    "e",
    [ExactEigenfunction.rectangle(2, 1), ExactEigenfunction.box(1, 2, 0.5, 2, 1, 1), ExactEigenfunction.right_isosceles()],
    ids=["rect", "box", "tri"],
)
def test_decomposition_and_p_invariance_exact(e, rng):
    P = e.polytope
    I = exact_neumann_masses(e).per_face_mass
    vals = []
    for p in rng.uniform(-10, 10, size=(10, P.dim)):
        raw = rellich_boundary_integral(P, e, p)
        assert raw == pytest.approx(signed_distances(P, p) @ I, rel=1e-10)
        vals.append(raw)
    vals = np.array(vals)
    assert (vals.max() - vals.min()) / np.abs(vals).max() <= 1e-9


def test_fem_p_spread_square(fem, rng):
    P, mesh, pairs = fem("square", 5)
    src = FemSource(mesh, pairs[0])
    vals = [rellich_boundary_integral(P, src, p) for p in rng.uniform(-10, 10, size=(10, 2))]
    assert max(vals) - min(vals) <= 1e-6 * pairs[0].eigenvalue


def test_fem_masses_converge_on_square(fem):
    errs = []
    for level in (3, 4, 5, 6):
        P, mesh, pairs = fem("square", level)
        I = neumann_masses_fem(P, mesh, pairs[0]).per_face_mass
        errs.append(np.max(np.abs(I - 2 * PI2)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    # at least first order; the diagonal mesh is observed to converge much faster
    assert all(r >= 1.6 for r in ratios)


def test_mismatched_pair_rejected(fem):
    P, mesh, pairs = fem("square", 2)
    _, other, _ = fem("square", 3)
    with pytest.raises(InconsistentMesh):
        neumann_masses_fem(P, other, pairs[0])


def test_quadrature_path_for_foreign_polytope():
    e = ExactEigenfunction.rectangle()
    from rellichpoly.geometry import build_polytope

    # same square, traversed from another start vertex
    Q = build_polytope(2, [(1, 0), (1, 1), (0, 1), (0, 0)])
    rep = neumann_masses(Q, e)
    np.testing.assert_allclose(rep.per_face_mass, 2 * PI2, rtol=1e-12)
