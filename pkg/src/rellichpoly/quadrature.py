"""Gauss-Legendre rules on segments and triangles."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _segment_rule(f, a, b, n):
    x, w = gauss_legendre(n)
    t = 0.5 * (x + 1.0)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return 0.5 * float(w @ f(pts))


def adaptive_segment(f, a, b, tol: float = 1e-12, order: int = 10, max_depth: int = 30) -> float:
    """Integrate ``f`` over the segment ``[a, b]`` with respect to arc length.

    ``f`` maps an (m, d) array of points to m values. Each piece is accepted
    when the ``order``- and ``2*order``-point rules agree to within its
    share of ``tol``.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    length = float(np.linalg.norm(b - a))
    if length == 0.0:
        return 0.0

    def rec(lo, hi, tol_here, depth):
        coarse = _segment_rule(f, lo, hi, order)
        fine = _segment_rule(f, lo, hi, 2 * order)
        piece = float(np.linalg.norm(hi - lo))
        if abs(fine - coarse) * piece <= tol_here or depth >= max_depth:
            return fine * piece
        mid = 0.5 * (lo + hi)
        return rec(lo, mid, 0.5 * tol_here, depth + 1) + rec(mid, hi, 0.5 * tol_here, depth + 1)

    return rec(a, b, tol, 0)


@lru_cache(maxsize=None)
def _collapsed_rule(n: int):
    # Duffy map of the unit square onto the reference triangle (0,0),(1,0),(0,1)
    x, w = gauss_legendre(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    s = U.ravel()
    t = (V * (1.0 - U)).ravel()
    wt = (WU * WV * (1.0 - U)).ravel()
    return s, t, wt


def triangle_integral(f, a, b, c, n: int = 30) -> float:
    """Integrate ``f`` over the (possibly embedded) triangle ``abc``."""
    a, b, c = (np.asarray(v, float) for v in (a, b, c))
    s, t, wt = _collapsed_rule(n)
    pts = a[None, :] + s[:, None] * (b - a)[None, :] + t[:, None] * (c - a)[None, :]
    e1, e2 = b - a, c - a
    if len(a) == 2:
        jac = abs(e1[0] * e2[1] - e1[1] * e2[0])
    else:
        jac = float(np.linalg.norm(np.cross(e1, e2)))
    return jac * float(wt @ f(pts))
