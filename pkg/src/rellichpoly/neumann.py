"""Neumann data mass per face and the Rellich boundary integral.

Two kinds of source are accepted. :class:`FemSource` pairs a mesh with a
P1 eigenpair; its gradient is constant on each triangle, so the squared
normal derivative is constant along every boundary edge and the affine
weight ``(nu, q - p)`` is integrated exactly by the edge midpoint.
Any object with ``eigenvalue`` and a ``gradient(points)`` method (such as
:class:`rellichpoly.exact.ExactEigenfunction`) is integrated by
Gauss-Legendre quadrature over the faces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InconsistentMesh, MismatchedFaces
from .fem_eigen import EigenPair, p1_gradients
from .geometry import Polytope
from .meshing import Mesh
from .quadrature import adaptive_segment, triangle_integral

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class NeumannReport:
    per_face_mass: np.ndarray
    per_face_measure: np.ndarray
    source: str
    eigenvalue: float

    def __post_init__(self):
        if len(self.per_face_mass) != len(self.per_face_measure):
            raise MismatchedFaces("mass and measure lists differ in length")
        if np.any(np.asarray(self.per_face_mass) < 0):
            raise ValueError("Neumann masses must be non-negative")

    @property
    def num_faces(self) -> int:
        return len(self.per_face_mass)


@dataclass(frozen=True)
class FemSource:
    mesh: Mesh
    pair: EigenPair

    @property
    def eigenvalue(self) -> float:
        return self.pair.eigenvalue


def _boundary_fluxes(P: Polytope, mesh: Mesh, pair: EigenPair):
    """Normal derivative and length of every boundary edge."""
    if len(pair.coefficients) != mesh.num_nodes:
        raise InconsistentMesh("eigenpair does not belong to this mesh")
    faces = mesh.boundary_edges[:, 2]
    if faces.max() >= P.num_faces:
        raise MismatchedFaces("mesh tags faces the polytope does not have")
    tri = mesh.boundary_triangles()
    grads, _ = p1_gradients(mesh.nodes, mesh.triangles[tri])
    coef = pair.coefficients[mesh.triangles[tri]]
    g = np.einsum("ti,tij->tj", coef, grads)
    dn = np.einsum("tj,tj->t", g, P.normals[faces])
    a, b = mesh.nodes[mesh.boundary_edges[:, 0]], mesh.nodes[mesh.boundary_edges[:, 1]]
    length = np.linalg.norm(b - a, axis=1)
    return dn, length, 0.5 * (a + b), faces


def neumann_masses_fem(P: Polytope, mesh: Mesh, pair: EigenPair) -> NeumannReport:
    dn, length, _, faces = _boundary_fluxes(P, mesh, pair)
    masses = np.bincount(faces, weights=length * dn * dn, minlength=P.num_faces)
    return NeumannReport(
        per_face_mass=masses,
        per_face_measure=np.array(P.measures),
        source=f"fem(level={mesh.level})",
        eigenvalue=pair.eigenvalue,
    )


def _face_integral(P: Polytope, i: int, fn) -> float:
    pts = P.vertices[list(P.faces[i].vertex_indices)]
    if P.dim == 2:
        return adaptive_segment(fn, pts[0], pts[1], tol=QUAD_TOL)
    return sum(triangle_integral(fn, pts[0], pts[j], pts[j + 1], n=40) for j in range(1, len(pts) - 1))


def quadrature_neumann_masses(P: Polytope, source) -> np.ndarray:
    """Masses of an analytic source by quadrature over each face of ``P``."""
    out = np.empty(P.num_faces)
    for i in range(P.num_faces):
        nu = P.normals[i]
        out[i] = _face_integral(P, i, lambda q, nu=nu: (source.gradient(q) @ nu) ** 2)
    return out


def neumann_masses(P: Polytope, source) -> NeumannReport:
    if isinstance(source, FemSource):
        return neumann_masses_fem(P, source.mesh, source.pair)
    from .exact import ExactEigenfunction, exact_neumann_masses

    if isinstance(source, ExactEigenfunction) and P is source.polytope:
        return exact_neumann_masses(source)
    return NeumannReport(
        per_face_mass=quadrature_neumann_masses(P, source),
        per_face_measure=np.array(P.measures),
        source="exact",
        eigenvalue=source.eigenvalue,
    )


def rellich_boundary_integral(P: Polytope, source, p=None) -> float:
    """Boundary integral of ``(nu, q - p) |d_nu f|^2`` over the whole of ``P``."""
    p = np.zeros(P.dim) if p is None else np.asarray(p, float)
    if isinstance(source, FemSource):
        dn, length, mid, faces = _boundary_fluxes(P, source.mesh, source.pair)
        weight = np.einsum("ej,ej->e", P.normals[faces], mid - p)
        return float(np.sum(weight * length * dn * dn))
    total = 0.0
    for i in range(P.num_faces):
        nu = P.normals[i]

        def fn(q, nu=nu):
            return ((q - p) @ nu) * (source.gradient(q) @ nu) ** 2

        total += _face_integral(P, i, fn)
    return total
