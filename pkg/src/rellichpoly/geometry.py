"""Simple polytopes in 2D and 3D and the signed quantities built on them.

A polytope stores its vertices and oriented faces. Every face carries an
outward unit normal and its measure (edge length in 2D, area in 3D). The
signed distance from a point ``p`` to face ``i`` is ``(nu_i, q0_i - p)``
with ``q0_i`` the first vertex of the face, so it is positive when ``p`` lies
on the inner side of the face plane. The signed pyramid volume with base
``F_i`` and apex ``p`` is ``signed_distance * measure / n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    BadOrientation,
    DegenerateFace,
    GeometryError,
    NonPlanarFace,
    NotAQuadrilateral,
    SelfIntersecting,
    SingularSystem,
)

# relative tolerances, multiplied by the polytope diameter where noted
TOL_TANGENT = 1e-8      # * diameter
TOL_EQUALVOL = 1e-8     # * volume
TOL_GEO = 1e-9          # * diameter
TOL_PLANAR = 1e-9       # * diameter


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Face:
    vertex_indices: tuple[int, ...]
    normal: np.ndarray
    measure: float


@dataclass(frozen=True)
class Polytope:
    """A simple polytope of dimension 2 or 3.

    Use :func:`build_polytope` rather than constructing this directly; the
    builder computes normals and measures and validates the input.
    """

    dim: int
    vertices: np.ndarray
    faces: tuple[Face, ...]

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def normals(self) -> np.ndarray:
        return _frozen([f.normal for f in self.faces])

    @cached_property
    def measures(self) -> np.ndarray:
        return _frozen([f.measure for f in self.faces])

    @cached_property
    def base_points(self) -> np.ndarray:
        """First vertex of every face, the anchor of the signed distance."""
        return _frozen([self.vertices[f.vertex_indices[0]] for f in self.faces])

    @cached_property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=-1)))

    @cached_property
    def volume(self) -> float:
        return total_volume(self)

    @cached_property
    def boundary_measure(self) -> float:
        return float(np.sum(self.measures))

    @property
    def is_convex(self) -> bool:
        c = self.vertices.mean(axis=0)
        d = signed_distances(self, c)
        if np.any(d <= 0):
            return False
        # every vertex must lie on the inner side of every face plane
        tol = 1e-12 * self.diameter
        for i in range(self.num_faces):
            if np.any((self.base_points[i] - self.vertices) @ self.normals[i] < -tol):
                return False
        return True

    def translated(self, shift) -> "Polytope":
        return self.transformed(np.eye(self.dim), shift)

    def transformed(self, rotation, shift) -> "Polytope":
        """Apply ``x -> R x + shift`` to all vertices (``R`` orthogonal)."""
        rotation = np.asarray(rotation, float)
        v = self.vertices @ rotation.T + np.asarray(shift, float)
        faces = [list(f.vertex_indices) for f in self.faces]
        if self.dim == 2:
            return build_polytope(2, v)
        return build_polytope(3, v, faces)

    def scaled(self, s: float) -> "Polytope":
        return self.transformed(s * np.eye(self.dim), np.zeros(self.dim))


@dataclass(frozen=True)
class ApexPoint:
    coordinates: np.ndarray
    per_face_signed_distance: np.ndarray
    per_face_signed_volume: np.ndarray


@dataclass(frozen=True)
class InscribedBall:
    center: np.ndarray
    radius: float
    residual: float


@dataclass(frozen=True)
class NotTangential:
    """Least-squares fit did not produce a ball tangent to every face."""

    residual: float
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class NoSuchPoint:
    """No point makes all pyramid volumes equal; ``candidate`` is the LS fit."""

    residual: float
    candidate: np.ndarray


@dataclass(frozen=True)
class HypothesisFails:
    reason: str
    residual: float = field(default=float("nan"))


# ---------------------------------------------------------------------------
# construction


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(p1, p2, q1, q2, tol) -> bool:
    """Closed-segment intersection test with a tolerance on orientations."""
    d1 = _cross2(q2 - q1, p1 - q1)
    d2 = _cross2(q2 - q1, p2 - q1)
    d3 = _cross2(p2 - p1, q1 - p1)
    d4 = _cross2(p2 - p1, q2 - p1)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True

    def on_segment(a, b, c, d):
        # c collinear with ab and inside its bounding box
        return abs(d) <= tol and (
            min(a[0], b[0]) - tol <= c[0] <= max(a[0], b[0]) + tol
            and min(a[1], b[1]) - tol <= c[1] <= max(a[1], b[1]) + tol
        )

    return (
        on_segment(q1, q2, p1, d1)
        or on_segment(q1, q2, p2, d2)
        or on_segment(p1, p2, q1, d3)
        or on_segment(p1, p2, q2, d4)
    )


def point_in_polygon(loop: np.ndarray, q) -> bool:
    """Even-odd ray casting along +x."""
    x, y = float(q[0]), float(q[1])
    inside = False
    k = len(loop)
    for i in range(k):
        (x1, y1), (x2, y2) = loop[i], loop[(i + 1) % k]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def shoelace_area(loop: np.ndarray) -> float:
    """Signed area of a closed vertex loop (positive when counterclockwise)."""
    loop = np.asarray(loop, float)
    nxt = np.roll(loop, -1, axis=0)
    return 0.5 * float(np.sum(_cross2(loop, nxt)))


def _build_polygon(v: np.ndarray) -> Polytope:
    k = len(v)
    if k < 3:
        raise GeometryError(f"a polygon needs at least 3 vertices, got {k}")
    diam = float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    if np.any(lengths <= 1e-14 * max(diam, 1e-300)):
        raise DegenerateFace("polygon has a zero-length edge")

    tol = 1e-13 * diam * diam
    for i in range(k):
        for j in range(i + 1, k):
            if j == i + 1 or (i == 0 and j == k - 1):
                # adjacent edges may only share their common vertex
                a, b = (i, j) if j == i + 1 else (j, i)
                e1, e2 = edges[a], edges[b]
                if abs(_cross2(e1, e2)) <= tol and float(e1 @ e2) < 0:
                    raise SelfIntersecting(f"edges {a} and {b} fold back onto each other")
                continue
            if _segments_intersect(v[i], v[(i + 1) % k], v[j], v[(j + 1) % k], tol):
                raise SelfIntersecting(f"edges {i} and {j} intersect")

    area = shoelace_area(v)
    if abs(area) <= 1e-14 * diam * diam:
        raise DegenerateFace("polygon has zero area")
    sgn = 1.0 if area > 0 else -1.0
    normals = sgn * np.stack([edges[:, 1], -edges[:, 0]], axis=1) / lengths[:, None]

    # outwardness by ray parity from a point just off each edge midpoint
    offset = 1e-7 * diam
    for i in range(k):
        mid = v[i] + 0.5 * edges[i]
        out = point_in_polygon(v, mid + offset * normals[i])
        inn = point_in_polygon(v, mid - offset * normals[i])
        if out or not inn:
            raise BadOrientation(f"cannot establish an outward normal for edge {i}")

    faces = tuple(
        Face((i, (i + 1) % k), _frozen(normals[i]), float(lengths[i])) for i in range(k)
    )
    return Polytope(2, _frozen(v), faces)


def _newell(pts: np.ndarray) -> np.ndarray:
    """Area vector of a planar polygon loop, via fan triangles from pts[0]."""
    d = pts[1:] - pts[0]
    return 0.5 * np.sum(np.cross(d[:-1], d[1:]), axis=0)


def _build_polyhedron(v: np.ndarray, faces_spec) -> Polytope:
    if faces_spec is None or isinstance(faces_spec, str):
        raise GeometryError("dim=3 polytopes need an explicit face list")
    nv = len(v)
    if nv < 4:
        raise GeometryError("a polyhedron needs at least 4 vertices")
    diam = float(np.max(np.linalg.norm(v[:, None] - v[None], axis=-1)))
    loops = [tuple(int(i) for i in f) for f in faces_spec]
    for f in loops:
        if len(f) < 3 or len(set(f)) != len(f):
            raise GeometryError(f"face {f} needs at least 3 distinct vertices")
        if any(i < 0 or i >= nv for i in f):
            raise GeometryError(f"face {f} references a missing vertex")

    # closed, consistently oriented surface: each directed edge once
    directed: dict[tuple[int, int], int] = {}
    for f in loops:
        for a, b in zip(f, f[1:] + f[:1]):
            directed[(a, b)] = directed.get((a, b), 0) + 1
    for (a, b), cnt in directed.items():
        if cnt != 1 or directed.get((b, a), 0) != 1:
            raise BadOrientation(f"edge ({a},{b}) is not shared by exactly two oppositely oriented faces")

    vol = 0.0
    for f in loops:
        p = v[list(f)]
        for j in range(1, len(f) - 1):
            vol += float(np.linalg.det(np.stack([p[0], p[j], p[j + 1]]))) / 6.0
    if abs(vol) <= 1e-14 * diam**3:
        raise DegenerateFace("polyhedron has zero volume")
    if vol < 0:
        loops = [f[::-1] for f in loops]

    faces = []
    for f in loops:
        p = v[list(f)]
        av = _newell(p)
        area = float(np.linalg.norm(av))
        if area <= 1e-14 * diam * diam:
            raise DegenerateFace(f"face {f} has zero area")
        nrm = av / area
        if np.max(np.abs((p - p[0]) @ nrm)) > TOL_PLANAR * diam:
            raise NonPlanarFace(f"face {f} is not planar")
        faces.append(Face(f, _frozen(nrm), area))
    P = Polytope(3, _frozen(v), tuple(faces))
    return P


def build_polytope(dim: int, vertices: Sequence, faces_spec=None) -> Polytope:
    """Build and validate a polytope.

    Parameters
    ----------
    dim : int
        2 or 3.
    vertices : sequence of points
    faces_spec : None, "polygon-loop", or list of index lists
        For ``dim=2`` the vertex order defines the boundary loop and face
        ``i`` is the edge from vertex ``i`` to vertex ``i+1``. For ``dim=3``
        each entry is a vertex loop of one face.
    """
    if dim not in (2, 3):
        raise GeometryError(f"dim must be 2 or 3, got {dim}")
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != dim:
        raise GeometryError(f"vertices must have shape (k, {dim})")
    if len(v) < dim + 1:
        raise GeometryError(f"need at least {dim + 1} vertices")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vertex coordinates must be finite")
    if dim == 2:
        if faces_spec not in (None, "polygon-loop"):
            k = len(v)
            expected = [[i, (i + 1) % k] for i in range(k)]
            if [list(map(int, f)) for f in faces_spec] != expected:
                raise GeometryError("2D faces must be the consecutive edges of the vertex loop")
        return _build_polygon(v)
    return _build_polyhedron(v, faces_spec)


def polytope_from_dict(data: dict) -> Polytope:
    """Build from the JSON layout ``{"dim": 2, "vertices": [...], "faces": [...]}``."""
    try:
        dim = int(data["dim"])
        verts = data["vertices"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed geometry description: {exc}") from exc
    return build_polytope(dim, verts, data.get("faces"))


def regular_polygon(k: int, circumradius: float = 1.0, center=(0.0, 0.0), phase: float = np.pi / 2) -> Polytope:
    t = phase + 2 * np.pi * np.arange(k) / k
    v = np.stack([np.cos(t), np.sin(t)], axis=1) * circumradius + np.asarray(center, float)
    return build_polytope(2, v)


def box(a: float = 1.0, b: float = 1.0, c: float = 1.0) -> Polytope:
    """Axis-aligned box [0,a]x[0,b]x[0,c]; faces x=0, x=a, y=0, y=b, z=0, z=c."""
    v = [(x, y, z) for z in (0.0, c) for y in (0.0, b) for x in (0.0, a)]
    faces = [
        [0, 4, 6, 2],  # x = 0
        [1, 3, 7, 5],  # x = a
        [0, 1, 5, 4],  # y = 0
        [2, 6, 7, 3],  # y = b
        [0, 2, 3, 1],  # z = 0
        [4, 5, 7, 6],  # z = c
    ]
    return build_polytope(3, v, faces)


# ---------------------------------------------------------------------------
# signed quantities


def signed_distances(P: Polytope, p) -> np.ndarray:
    """Signed distances from ``p`` to every face plane.

    Values within rounding of zero (``p`` on a face plane) are reported as 0.
    """
    p = np.asarray(p, float)
    a = np.einsum("ij,ij->i", P.normals, P.base_points)
    b = P.normals @ p
    d = a - b
    d[np.abs(d) <= 4 * np.finfo(float).eps * (np.abs(a) + np.abs(b))] = 0.0
    return d


def signed_distance(P: Polytope, p, i: int) -> float:
    if not 0 <= i < P.num_faces:
        raise IndexError(f"face index {i} out of range")
    return float(signed_distances(P, p)[i])


def signed_pyramid_volumes(P: Polytope, p) -> np.ndarray:
    return signed_distances(P, p) * P.measures / P.dim


def signed_pyramid_volume(P: Polytope, p, i: int) -> float:
    if not 0 <= i < P.num_faces:
        raise IndexError(f"face index {i} out of range")
    return float(signed_pyramid_volumes(P, p)[i])


def apex_point(P: Polytope, p) -> ApexPoint:
    p = _frozen(p)
    d = signed_distances(P, p)
    vol = d * P.measures / P.dim
    return ApexPoint(p, _frozen(d), _frozen(vol))


def total_volume(P: Polytope) -> float:
    if P.dim == 2:
        return abs(shoelace_area(P.vertices))
    vol = 0.0
    for f in P.faces:
        p = P.vertices[list(f.vertex_indices)]
        for j in range(1, len(p) - 1):
            vol += float(np.linalg.det(np.stack([p[0], p[j], p[j + 1]])))
    return vol / 6.0


# ---------------------------------------------------------------------------
# special points


def inscribed_ball(P: Polytope) -> InscribedBall | NotTangential:
    """Least-squares center and radius of a ball touching all face planes.

    Solves ``(nu_i, q0_i - p) - h = 0`` for ``(p, h)`` over all faces.
    """
    A = np.hstack([P.normals, np.ones((P.num_faces, 1))])
    rhs = np.einsum("ij,ij->i", P.normals, P.base_points)
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < P.dim + 1:
        raise SingularSystem("face normals do not span the space")
    center, h = _frozen(sol[:-1]), float(sol[-1])
    residual = float(np.max(np.abs(signed_distances(P, center) - h)))
    if residual <= TOL_TANGENT * P.diameter and h > 0:
        return InscribedBall(center, h, residual)
    return NotTangential(residual, center, h)


def equal_volume_apex(P: Polytope) -> ApexPoint | NoSuchPoint:
    """Point where every signed pyramid volume equals ``Vol(P)/k``, if any."""
    k, n = P.num_faces, P.dim
    w = P.measures / n
    A = w[:, None] * P.normals
    rhs = w * np.einsum("ij,ij->i", P.normals, P.base_points) - P.volume / k
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    apex = apex_point(P, sol)
    residual = float(np.max(np.abs(apex.per_face_signed_volume - P.volume / k)))
    if residual <= TOL_EQUALVOL * P.volume:
        return apex
    return NoSuchPoint(residual, _frozen(sol))


def _line_intersection(a, b, c, d):
    """Intersection of lines ab and cd, or None when parallel."""
    r, s = b - a, d - c
    den = _cross2(r, s)
    if abs(den) <= 1e-15 * np.linalg.norm(r) * np.linalg.norm(s):
        return None
    t = _cross2(c - a, s) / den
    return a + t * r


def corollary2_apex(Q: Polytope) -> ApexPoint | HypothesisFails:
    """Apex for a quadrilateral in which one diagonal bisects the other.

    With vertices ``A, B, C, D`` the diagonals are ``AC`` and ``BD``. If the
    line through one diagonal meets the other diagonal at its midpoint, the
    midpoint of the first diagonal makes all four triangle areas equal.
    """
    if Q.dim != 2 or Q.num_faces != 4:
        raise NotAQuadrilateral(f"expected a 4-sided polygon, got dim={Q.dim}, k={Q.num_faces}")
    A, B, C, D = Q.vertices
    tol = TOL_GEO * Q.diameter
    best = float("inf")
    for d1, d2 in (((A, C), (B, D)), ((B, D), (A, C))):
        e = _line_intersection(*d1, *d2)
        if e is None:
            continue
        mid2 = 0.5 * (d2[0] + d2[1])
        gap = float(np.linalg.norm(e - mid2))
        best = min(best, gap)
        if gap <= tol:
            apex = apex_point(Q, 0.5 * (d1[0] + d1[1]))
            vols = apex.per_face_signed_volume
            spread = float(np.max(vols) - np.min(vols))
            if spread > 1e-8 * Q.volume:
                raise GeometryError(f"bisected-diagonal apex gave unequal areas (spread {spread:.3e})")
            return apex
    return HypothesisFails("no diagonal passes through the midpoint of the other", best)
