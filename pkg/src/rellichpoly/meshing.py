"""Triangulation of simple polygons and uniform red refinement.

Level 0 is an ear-clipping triangulation whose boundary edges are exactly
the polygon edges. Each refinement splits every triangle into four through
its edge midpoints. Midpoint nodes are keyed on the parent edge's index
pair, so shared edges get a single new node.

Mesh dump format (JSON)::

    {"level": 2, "h_max": 0.35,
     "nodes": [[x, y], ...],
     "triangles": [[i, j, k], ...],          # counterclockwise
     "boundary_edges": [[a, b, face], ...]}  # face = polygon edge index
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EarClippingFailed, GeometryError, InconsistentMesh
from .geometry import Polytope, shoelace_area


def _ro(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray           # (N, 2)
    triangles: np.ndarray       # (T, 3) counterclockwise
    boundary_edges: np.ndarray  # (B, 3) rows (node_a, node_b, parent_face)
    level: int
    h_max: float

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.boundary_edges[:, :2])

    def interior_nodes(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.num_nodes), self.boundary_nodes())

    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted index pairs."""
        return np.unique(np.sort(_triangle_edges(self.triangles), axis=1), axis=0)

    def boundary_triangles(self) -> np.ndarray:
        """Index of the unique triangle holding each boundary edge."""
        key_n = self.num_nodes
        te = np.sort(_triangle_edges(self.triangles), axis=1)
        tkeys = te[:, 0] * key_n + te[:, 1]
        order = np.argsort(tkeys)
        be = np.sort(self.boundary_edges[:, :2], axis=1)
        bkeys = be[:, 0] * key_n + be[:, 1]
        pos = np.searchsorted(tkeys[order], bkeys)
        pos = np.minimum(pos, len(order) - 1)
        if np.any(tkeys[order][pos] != bkeys):
            raise InconsistentMesh("boundary edge without an adjacent triangle")
        return order[pos] // 3

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "h_max": self.h_max,
            "nodes": self.nodes.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": self.boundary_edges.tolist(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def _triangle_edges(tris: np.ndarray) -> np.ndarray:
    # edge order per triangle: (0,1), (1,2), (2,0)
    return np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1).reshape(-1, 2)


def _h_max(nodes, tris) -> float:
    e = np.unique(np.sort(_triangle_edges(tris), axis=1), axis=0)
    return float(np.max(np.linalg.norm(nodes[e[:, 0]] - nodes[e[:, 1]], axis=1)))


def _min_angle(a, b, c) -> float:
    ang = []
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        u, v = q - p, r - p
        cosv = float(u @ v) / (np.linalg.norm(u) * np.linalg.norm(v))
        ang.append(np.arccos(np.clip(cosv, -1.0, 1.0)))
    return min(ang)


def _in_closed_triangle(q, a, b, c, tol) -> bool:
    def cr(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])

    return cr(a, b, q) >= -tol and cr(b, c, q) >= -tol and cr(c, a, q) >= -tol


def ear_clip(loop: np.ndarray) -> list[tuple[int, int, int]]:
    """Counterclockwise triangles covering a simple polygon.

    Among the valid ears the one with the largest minimum angle is clipped
    first, which keeps degenerate slivers out of the level-0 mesh.
    """
    loop = np.asarray(loop, float)
    k = len(loop)
    order = list(range(k))
    if shoelace_area(loop) < 0:
        order.reverse()
    scale = float(np.max(np.ptp(loop, axis=0)))
    tol = 1e-12 * scale * scale
    tris = []
    while len(order) > 3:
        m = len(order)
        best, best_q = None, -1.0
        for j in range(m):
            i0, i1, i2 = order[j - 1], order[j], order[(j + 1) % m]
            a, b, c = loop[i0], loop[i1], loop[i2]
            if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) <= tol:
                continue
            if any(
                _in_closed_triangle(loop[o], a, b, c, tol)
                for o in order
                if o not in (i0, i1, i2)
            ):
                continue
            q = _min_angle(a, b, c)
            if q > best_q:
                best, best_q = j, q
        if best is None:
            raise EarClippingFailed(f"no ear found with {m} vertices left")
        m = len(order)
        tris.append((order[best - 1], order[best], order[(best + 1) % m]))
        del order[best]
    a, b, c = (loop[i] for i in order)
    if (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) <= tol:
        raise EarClippingFailed("final triangle is degenerate")
    tris.append(tuple(order))
    return tris


def triangulate(P: Polytope) -> Mesh:
    if P.dim != 2:
        raise GeometryError("only polygons can be meshed")
    k = P.num_faces
    tris = np.array(ear_clip(P.vertices), dtype=np.int64)
    bd = np.array([(i, (i + 1) % k, i) for i in range(k)], dtype=np.int64)
    nodes = np.array(P.vertices, float)
    return Mesh(_ro(nodes, float), _ro(tris, np.int64), _ro(bd, np.int64), 0, _h_max(nodes, tris))


def refine(M: Mesh) -> Mesh:
    """One level of uniform red refinement."""
    n = M.num_nodes
    tris = M.triangles
    e = np.sort(_triangle_edges(tris), axis=1)
    uniq, inv = np.unique(e, axis=0, return_inverse=True)
    inv = inv.reshape(-1, 3)
    mids = 0.5 * (M.nodes[uniq[:, 0]] + M.nodes[uniq[:, 1]])
    nodes = np.vstack([M.nodes, mids])
    m01, m12, m20 = (n + inv[:, j] for j in range(3))
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    children = np.stack(
        [
            np.stack([a, m01, m20], axis=1),
            np.stack([m01, b, m12], axis=1),
            np.stack([m20, m12, c], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)

    keys = uniq[:, 0] * n + uniq[:, 1]
    bd = M.boundary_edges
    bs = np.sort(bd[:, :2], axis=1)
    pos = np.searchsorted(keys, bs[:, 0] * n + bs[:, 1])
    if np.any(pos >= len(keys)) or np.any(keys[np.minimum(pos, len(keys) - 1)] != bs[:, 0] * n + bs[:, 1]):
        raise InconsistentMesh("boundary edge missing from triangle edges")
    mb = n + pos
    new_bd = np.stack(
        [np.stack([bd[:, 0], mb, bd[:, 2]], axis=1), np.stack([mb, bd[:, 1], bd[:, 2]], axis=1)],
        axis=1,
    ).reshape(-1, 3)
    return Mesh(
        _ro(nodes, float),
        _ro(children, np.int64),
        _ro(new_bd, np.int64),
        M.level + 1,
        _h_max(nodes, children),
    )


def mesh_at_level(P: Polytope, level: int) -> Mesh:
    M = triangulate(P)
    for _ in range(level):
        M = refine(M)
    return M


def check_mesh(M: Mesh, P: Polytope) -> None:
    """Raise :class:`InconsistentMesh` unless every mesh invariant holds."""
    areas = M.areas()
    vol = P.volume
    if np.any(areas <= 1e-14 * vol):
        raise InconsistentMesh("triangle with non-positive area")
    if abs(areas.sum() - vol) > 1e-10 * vol:
        raise InconsistentMesh(f"areas sum to {areas.sum()}, polygon area {vol}")
    e = np.sort(_triangle_edges(M.triangles), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise InconsistentMesh("edge shared by more than two triangles")
    once = {tuple(r) for r in uniq[counts == 1]}
    bd = {tuple(sorted(r)) for r in M.boundary_edges[:, :2].tolist()}
    if once != bd:
        raise InconsistentMesh("boundary edges do not match edges used by one triangle")
    lengths = np.linalg.norm(M.nodes[M.boundary_edges[:, 0]] - M.nodes[M.boundary_edges[:, 1]], axis=1)
    per_face = np.bincount(M.boundary_edges[:, 2], weights=lengths, minlength=P.num_faces)
    if np.any(np.abs(per_face - P.measures) > 1e-10 * P.measures):
        raise InconsistentMesh("tagged boundary edges do not cover their faces")
    V, E, T = M.num_nodes, len(uniq), len(M.triangles)
    if V - E + T != 1:
        raise InconsistentMesh(f"Euler characteristic {V - E + T} != 1")
