"""Closed-form Dirichlet eigenfunctions used as oracles.

Supported domains are the rectangle ``[0,a]x[0,b]``, the box
``[0,a]x[0,b]x[0,c]`` and the right isosceles triangle with legs of
length ``L`` along the axes. On the triangle ``x + y <= L`` the eigenfunction
for modes ``m != n`` is

    sin(m pi x/L) sin(n pi y/L) - (-1)**(m+n) sin(n pi x/L) sin(m pi y/L)

which vanishes on the hypotenuse.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import OutsideDomain
from .geometry import Polytope, box, build_polytope
from .neumann import NeumannReport, quadrature_neumann_masses
from .quadrature import triangle_integral

KINDS = ("rectangle", "box", "right_isosceles")


@dataclass(frozen=True)
class ExactEigenfunction:
    domain_kind: str
    sides: tuple[float, ...]
    mode_numbers: tuple[int, ...]

    def __post_init__(self):
        if self.domain_kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.domain_kind!r}")
        nsides = {"rectangle": 2, "box": 3, "right_isosceles": 1}[self.domain_kind]
        nmodes = 3 if self.domain_kind == "box" else 2
        if len(self.sides) != nsides or any(s <= 0 for s in self.sides):
            raise ValueError(f"{self.domain_kind} needs {nsides} positive side lengths")
        if len(self.mode_numbers) != nmodes or any(int(m) < 1 for m in self.mode_numbers):
            raise ValueError(f"{self.domain_kind} needs {nmodes} mode numbers >= 1")
        if self.domain_kind == "right_isosceles" and self.mode_numbers[0] == self.mode_numbers[1]:
            raise ValueError("triangle modes need m != n")

    @classmethod
    def rectangle(cls, a=1.0, b=1.0, m=1, n=1):
        return cls("rectangle", (float(a), float(b)), (int(m), int(n)))

    @classmethod
    def box(cls, a=1.0, b=1.0, c=1.0, m=1, n=1, l=1):
        return cls("box", (float(a), float(b), float(c)), (int(m), int(n), int(l)))

    @classmethod
    def right_isosceles(cls, leg=1.0, m=1, n=2):
        return cls("right_isosceles", (float(leg),), (int(m), int(n)))

    @property
    def dim(self) -> int:
        return 3 if self.domain_kind == "box" else 2

    @property
    def eigenvalue(self) -> float:
        if self.domain_kind == "right_isosceles":
            (L,) = self.sides
            m, n = self.mode_numbers
            return np.pi**2 * (m * m + n * n) / L**2
        return float(np.pi**2 * sum((k / s) ** 2 for k, s in zip(self.mode_numbers, self.sides)))

    @cached_property
    def normalization_constant(self) -> float:
        if self.domain_kind != "right_isosceles":
            return float(2.0 ** (self.dim / 2) / np.sqrt(np.prod(self.sides)))
        (L,) = self.sides
        sq = triangle_integral(lambda q: self._shape(q) ** 2, (0, 0), (L, 0), (0, L), n=60)
        return float(1.0 / np.sqrt(sq))

    @cached_property
    def polytope(self) -> Polytope:
        if self.domain_kind == "rectangle":
            a, b = self.sides
            return build_polytope(2, [(0, 0), (a, 0), (a, b), (0, b)])
        if self.domain_kind == "box":
            return box(*self.sides)
        (L,) = self.sides
        return build_polytope(2, [(0, 0), (L, 0), (0, L)])

    # -- pointwise ---------------------------------------------------------

    def _check_inside(self, q: np.ndarray) -> None:
        tol = 1e-12 * max(self.sides)
        if self.domain_kind == "right_isosceles":
            (L,) = self.sides
            ok = (q[:, 0] >= -tol) & (q[:, 1] >= -tol) & (q[:, 0] + q[:, 1] <= L + tol)
        else:
            ok = np.all((q >= -tol) & (q <= np.asarray(self.sides) + tol), axis=1)
        if not np.all(ok):
            raise OutsideDomain(f"point outside the {self.domain_kind}")

    def _shape(self, q):
        """Unnormalized eigenfunction; ``q`` has shape (m, dim)."""
        if self.domain_kind == "right_isosceles":
            (L,) = self.sides
            m, n = self.mode_numbers
            sgn = (-1) ** (m + n)
            x, y = np.pi * q[:, 0] / L, np.pi * q[:, 1] / L
            return np.sin(m * x) * np.sin(n * y) - sgn * np.sin(n * x) * np.sin(m * y)
        out = np.ones(len(q))
        for j, (k, s) in enumerate(zip(self.mode_numbers, self.sides)):
            out = out * np.sin(k * np.pi * q[:, j] / s)
        return out

    def _shape_grad(self, q):
        if self.domain_kind == "right_isosceles":
            (L,) = self.sides
            m, n = self.mode_numbers
            sgn = (-1) ** (m + n)
            w = np.pi / L
            x, y = w * q[:, 0], w * q[:, 1]
            gx = w * (m * np.cos(m * x) * np.sin(n * y) - sgn * n * np.cos(n * x) * np.sin(m * y))
            gy = w * (n * np.sin(m * x) * np.cos(n * y) - sgn * m * np.sin(n * x) * np.cos(m * y))
            return np.stack([gx, gy], axis=1)
        k = np.asarray(self.mode_numbers, float) * np.pi / np.asarray(self.sides)
        s = np.sin(k * q)
        c = np.cos(k * q)
        g = np.empty_like(q)
        for j in range(self.dim):
            others = np.prod(np.delete(s, j, axis=1), axis=1)
            g[:, j] = k[j] * c[:, j] * others
        return g

    def evaluate(self, q):
        q = np.asarray(q, float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        self._check_inside(q)
        v = self.normalization_constant * self._shape(q)
        return float(v[0]) if single else v

    def gradient(self, q):
        q = np.asarray(q, float)
        single = q.ndim == 1
        q = np.atleast_2d(q)
        self._check_inside(q)
        g = self.normalization_constant * self._shape_grad(q)
        return g[0] if single else g


def exact_neumann_masses(e: ExactEigenfunction) -> NeumannReport:
    """Per-face Neumann data masses in the face order of ``e.polytope``."""
    P = e.polytope
    if e.domain_kind == "rectangle":
        (a, b), (m, n) = e.sides, e.mode_numbers
        ix = 2 * m * m * np.pi**2 / a**3
        iy = 2 * n * n * np.pi**2 / b**3
        masses = np.array([iy, ix, iy, ix])
    elif e.domain_kind == "box":
        per_axis = [2 * k * k * np.pi**2 / s**3 for k, s in zip(e.mode_numbers, e.sides)]
        masses = np.repeat(per_axis, 2)
    else:
        masses = quadrature_neumann_masses(P, e)
    return NeumannReport(
        per_face_mass=masses,
        per_face_measure=np.array(P.measures),
        source="exact",
        eigenvalue=e.eigenvalue,
    )
