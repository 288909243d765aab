"""P1 finite elements for the Dirichlet Laplacian on a triangle mesh.

The discrete problem is ``K c = lambda M c`` on interior nodes, with ``K``
the stiffness and ``M`` the consistent mass matrix. It is reduced to a
standard symmetric problem through the Cholesky factor of ``M`` and solved
with a dense LAPACK eigensolver, so the interior node count is capped.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DegenerateTriangle, MassNotSPD, TooFewInteriorNodes, TooManyInteriorNodes
from .meshing import Mesh

MAX_INTERIOR_NODES = 6000


@dataclass(frozen=True)
class EigenPair:
    eigenvalue: float
    coefficients: np.ndarray  # all mesh nodes, zero on the boundary
    mesh_level: int
    index: int                # 1-based position in the ascending spectrum


@dataclass(frozen=True)
class SpectrumRequest:
    mesh: Mesh
    num_eigs: int = 1

    def __post_init__(self):
        if self.num_eigs < 1:
            raise ValueError("num_eigs must be at least 1")


def p1_gradients(nodes: np.ndarray, triangles: np.ndarray):
    """Constant gradients of the three hat functions on every triangle.

    Returns ``(grads, areas)`` with ``grads`` of shape (T, 3, 2).
    """
    p = nodes[triangles]
    d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    if np.any(areas <= 0):
        bad = int(np.argmin(areas))
        raise DegenerateTriangle(f"triangle {bad} has area {areas[bad]:.3e}")
    # the gradient of hat i is the opposite edge rotated by -90 deg over 2*area
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1) / (2.0 * areas[:, None, None])
    return grads, areas


_MASS_REF = (np.ones((3, 3)) + np.eye(3)) / 12.0


def assemble(M: Mesh):
    """Global stiffness and mass matrices (CSR) over all mesh nodes."""
    grads, areas = p1_gradients(M.nodes, M.triangles)
    ke = areas[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
    me = areas[:, None, None] * _MASS_REF
    rows = np.repeat(M.triangles, 3, axis=1).ravel()
    cols = np.tile(M.triangles, (1, 3)).ravel()
    n = M.num_nodes
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    Mm = sp.coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, Mm


def solve_spectrum(req: SpectrumRequest) -> list[EigenPair]:
    mesh = req.mesh
    interior = mesh.interior_nodes()
    ni = len(interior)
    if ni < req.num_eigs:
        raise TooFewInteriorNodes(f"{ni} interior nodes, {req.num_eigs} eigenpairs requested")
    if ni > MAX_INTERIOR_NODES:
        raise TooManyInteriorNodes(
            f"{ni} interior nodes exceeds the dense-solver cap of {MAX_INTERIOR_NODES}; use a coarser level"
        )
    K, Mm = assemble(mesh)
    Ki = K[interior][:, interior].toarray()
    Mi = Mm[interior][:, interior].toarray()
    try:
        L = sla.cholesky(Mi, lower=True)
    except sla.LinAlgError as exc:
        raise MassNotSPD(f"mass matrix is not positive definite: {exc}") from exc

    # A = L^-1 K L^-T
    X = sla.solve_triangular(L, Ki, lower=True)
    A = sla.solve_triangular(L, X.T, lower=True)
    A = 0.5 * (A + A.T)
    w, y = sla.eigh(A, subset_by_index=[0, req.num_eigs - 1], driver="evr")
    c = sla.solve_triangular(L, y, lower=True, trans="T")

    pairs = []
    for j in range(req.num_eigs):
        cj = c[:, j]
        cj = cj / np.sqrt(cj @ (Mi @ cj))
        full = np.zeros(mesh.num_nodes)
        full[interior] = cj
        full.setflags(write=False)
        pairs.append(EigenPair(float(w[j]), full, mesh.level, j + 1))
    return pairs
