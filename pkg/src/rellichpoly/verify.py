"""Residual checks for the Rellich-type identities on polytopes.

Every check takes a polytope and a :class:`NeumannReport` and returns an
:class:`IdentityReport` (or a :class:`Skipped` when the geometric
hypothesis of the identity does not hold). Residuals are relative:
``|lhs - rhs| / max(|lhs|, |rhs|)``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import MismatchedFaces, NotAQuadrilateral, NotASimplex
from .exact import ExactEigenfunction
from .fem_eigen import SpectrumRequest, solve_spectrum
from .geometry import (
    ApexPoint,
    InscribedBall,
    Polytope,
    corollary2_apex,
    equal_volume_apex,
    inscribed_ball,
    signed_distances,
    signed_pyramid_volumes,
)
from .meshing import mesh_at_level, refine, triangulate
from .neumann import FemSource, NeumannReport, neumann_masses, rellich_boundary_integral

IDENTITY_IDS = (
    "thm1_distance",
    "thm1_volume",
    "eq_volume_form",
    "corollary1",
    "corollary2",
    "simplex_vertex",
    "rellich_raw",
)

EXACT_TOL = 1e-9
DECOMPOSITION_TOL = 1e-10


def relative_residual(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0 else abs(lhs - rhs) / scale


@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    lhs: float
    rhs: float
    relative_residual: float
    apex_used: np.ndarray | None = None
    notes: str = ""
    level: int | None = None
    eig_index: int | None = None
    h_max: float | None = None

    @classmethod
    def make(cls, identity_id, lhs, rhs, apex=None, notes=""):
        lhs, rhs = float(lhs), float(rhs)
        apex = None if apex is None else np.asarray(apex, float)
        return cls(identity_id, lhs, rhs, relative_residual(lhs, rhs), apex, notes)


@dataclass(frozen=True)
class Skipped:
    identity_id: str
    reason: str
    residual: float = float("nan")
    level: int | None = None
    eig_index: int | None = None
    h_max: float | None = None


def _check_faces(P: Polytope, report: NeumannReport) -> None:
    if report.num_faces != P.num_faces:
        raise MismatchedFaces(f"report has {report.num_faces} faces, polytope has {P.num_faces}")


def check_thm1(P: Polytope, report: NeumannReport, p) -> tuple[IdentityReport, IdentityReport]:
    """Distance-weighted and volume-weighted forms of the main identity at ``p``."""
    _check_faces(P, report)
    I = np.asarray(report.per_face_mass)
    lam = report.eigenvalue
    d = signed_distances(P, p)
    vol = signed_pyramid_volumes(P, p)
    dist_form = IdentityReport.make("thm1_distance", d @ I, 2 * lam, apex=p)
    vol_form = IdentityReport.make("thm1_volume", (vol / P.measures) @ I, 2 * lam / P.dim, apex=p)
    return dist_form, vol_form


def check_eq_volume_form(P: Polytope, report: NeumannReport) -> IdentityReport | Skipped:
    _check_faces(P, report)
    apex = equal_volume_apex(P)
    if not isinstance(apex, ApexPoint):
        return Skipped("eq_volume_form", f"NoSuchPoint (least-squares residual {apex.residual:.6e})", apex.residual)
    I = np.asarray(report.per_face_mass)
    k, n = P.num_faces, P.dim
    rhs = 2 * k * report.eigenvalue / (n * P.volume)
    return IdentityReport.make("eq_volume_form", np.sum(I / P.measures), rhs, apex=apex.coordinates)


def check_corollary1(P: Polytope, report: NeumannReport) -> IdentityReport | Skipped:
    _check_faces(P, report)
    ball = inscribed_ball(P)
    if not isinstance(ball, InscribedBall):
        return Skipped("corollary1", f"NotTangential (residual {ball.residual:.6e})", ball.residual)
    total = float(np.sum(report.per_face_mass))
    lam = report.eigenvalue
    rhs = P.boundary_measure / P.volume * 2 * lam / P.dim
    inner = relative_residual(total, 2 * lam / ball.radius)
    notes = f"inradius={ball.radius:.17g}; sum_I vs 2*lambda/h residual={inner:.6e}"
    return IdentityReport.make("corollary1", total, rhs, apex=ball.center, notes=notes)


def check_corollary2(Q: Polytope, report: NeumannReport) -> IdentityReport | Skipped:
    _check_faces(Q, report)
    apex = corollary2_apex(Q)
    if not isinstance(apex, ApexPoint):
        return Skipped("corollary2", f"HypothesisFails ({apex.reason})", apex.residual)
    I = np.asarray(report.per_face_mass)
    rhs = 4 * report.eigenvalue / Q.volume
    return IdentityReport.make("corollary2", np.sum(I / Q.measures), rhs, apex=apex.coordinates)


def is_simplex(P: Polytope) -> bool:
    return P.num_faces == P.dim + 1 and len(P.vertices) == P.dim + 1


def check_simplex_vertex(P: Polytope, report: NeumannReport) -> list[IdentityReport]:
    """Main identity with the apex at each vertex of a simplex.

    Only the face opposite the vertex has a nonzero signed distance, so each
    report isolates one face mass.
    """
    if not is_simplex(P):
        raise NotASimplex(f"{P.num_faces} faces and {len(P.vertices)} vertices in dimension {P.dim}")
    _check_faces(P, report)
    I = np.asarray(report.per_face_mass)
    out = []
    for j, v in enumerate(P.vertices):
        opposite = [i for i, f in enumerate(P.faces) if j not in f.vertex_indices]
        d = signed_distances(P, v)
        notes = f"vertex {j}; opposite face {opposite[0]}"
        out.append(IdentityReport.make("simplex_vertex", d @ I, 2 * report.eigenvalue, apex=v, notes=notes))
    return out


def check_rellich_raw(P: Polytope, source, report: NeumannReport, p) -> IdentityReport:
    lhs = rellich_boundary_integral(P, source, p)
    return IdentityReport.make("rellich_raw", lhs, 2 * report.eigenvalue, apex=p)


def decomposition_gap(P: Polytope, source, report: NeumannReport, p) -> float:
    """``|boundary integral - sum dist* I_i| / (2 lambda)``; algebraically zero."""
    raw = rellich_boundary_integral(P, source, p)
    split = float(signed_distances(P, p) @ np.asarray(report.per_face_mass))
    return abs(raw - split) / (2 * report.eigenvalue)


# ---------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class SuiteConfig:
    levels: tuple[int, ...] = (3, 4, 5)
    num_eigs: int = 1
    point: tuple[float, ...] | None = None
    seed: int = 42
    num_random_points: int = 10
    random_box: float = 10.0


@dataclass
class ConvergenceRow:
    level: int | None
    h_max: float | None
    eig_index: int
    eigenvalue: float
    residuals: dict[str, float]
    decomposition_gap: float
    random_p_spread: float


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow] = field(default_factory=list)

    def series(self, identity_id: str, eig_index: int = 1, min_level: int = 0) -> list[tuple[int, float]]:
        out = []
        for r in self.rows:
            if r.eig_index != eig_index or r.level is None or r.level < min_level:
                continue
            v = r.residuals.get(identity_id)
            if v is not None and np.isfinite(v):
                out.append((r.level, v))
        return sorted(out)

    def ratios(self, identity_id: str, eig_index: int = 1, min_level: int = 0) -> list[float]:
        s = [v for _, v in self.series(identity_id, eig_index, min_level)]
        return [a / b if b > 0 else float("inf") for a, b in zip(s, s[1:])]

    def is_monotone(self, identity_id: str, eig_index: int = 1, min_level: int = 3) -> bool:
        s = [v for _, v in self.series(identity_id, eig_index, min_level)]
        return all(b <= a for a, b in zip(s, s[1:]))

    def identities(self) -> list[str]:
        seen = []
        for r in self.rows:
            for k in r.residuals:
                if k not in seen:
                    seen.append(k)
        return [i for i in IDENTITY_IDS if i in seen]

    def eig_indices(self) -> list[int]:
        return sorted({r.eig_index for r in self.rows})


@dataclass
class SuiteResult:
    reports: list
    table: ConvergenceTable
    exact: bool

    def failures(self) -> list[str]:
        """Checks a CI run should treat as failed."""
        out = []
        rows = self.table.rows
        for r in rows:
            if r.decomposition_gap > DECOMPOSITION_TOL:
                out.append(f"decomposition gap {r.decomposition_gap:.3e} at level {r.level} eig {r.eig_index}")
        if self.exact:
            for rep in self.reports:
                if isinstance(rep, IdentityReport) and rep.relative_residual > EXACT_TOL:
                    out.append(f"{rep.identity_id} residual {rep.relative_residual:.3e} > {EXACT_TOL}")
            for r in rows:
                if r.random_p_spread > EXACT_TOL:
                    out.append(f"arbitrary-point spread {r.random_p_spread:.3e} > {EXACT_TOL}")
            return out
        for ident in self.table.identities():
            for j in self.table.eig_indices():
                if not self.table.is_monotone(ident, j, min_level=3):
                    out.append(f"{ident} residual not decreasing over levels >= 3 for eig {j}")
        return out


def default_point(P: Polytope) -> np.ndarray:
    return P.vertices.mean(axis=0)


def random_points(dim: int, seed: int, count: int, half_width: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-half_width, half_width, size=(count, dim))


def evaluate_all(P: Polytope, source, report: NeumannReport, p, rand_pts) -> tuple[list, dict, float, float]:
    """Every applicable check for one eigenfunction.

    Returns ``(reports, residuals_by_identity, decomposition_gap, spread)``.
    """
    reports: list = []
    dist_form, vol_form = check_thm1(P, report, p)
    reports += [dist_form, vol_form]
    lhs_random = []
    for j, q in enumerate(rand_pts):
        rd, _ = check_thm1(P, report, q)
        reports.append(dataclasses.replace(rd, notes=f"random point {j}"))
        lhs_random.append(rd.lhs)
    reports.append(check_eq_volume_form(P, report))
    reports.append(check_corollary1(P, report))
    if P.dim == 2 and P.num_faces == 4:
        reports.append(check_corollary2(P, report))
    simplex = []
    if is_simplex(P):
        simplex = check_simplex_vertex(P, report)
        reports += simplex
    reports.append(check_rellich_raw(P, source, report, p))

    residuals: dict[str, float] = {}
    for rep in reports:
        if not isinstance(rep, IdentityReport) or rep.notes.startswith("random point"):
            continue
        if rep.identity_id == "simplex_vertex":
            residuals[rep.identity_id] = max(residuals.get(rep.identity_id, 0.0), rep.relative_residual)
        else:
            residuals[rep.identity_id] = rep.relative_residual
    gap = decomposition_gap(P, source, report, p)
    spread = 0.0
    if lhs_random:
        lr = np.asarray(lhs_random)
        spread = float((lr.max() - lr.min()) / np.max(np.abs(lr)))
    return reports, residuals, gap, spread


def run_suite(target: Polytope | ExactEigenfunction, config: SuiteConfig = SuiteConfig()) -> SuiteResult:
    """Run all checks for an exact eigenfunction or for FEM eigenpairs per level."""
    table = ConvergenceTable()
    all_reports: list = []
    if isinstance(target, ExactEigenfunction):
        P = target.polytope
        p = default_point(P) if config.point is None else np.asarray(config.point, float)
        rand = random_points(P.dim, config.seed, config.num_random_points, config.random_box)
        report = neumann_masses(P, target)
        reps, res, gap, spread = evaluate_all(P, target, report, p, rand)
        reps = [dataclasses.replace(r, eig_index=1) for r in reps]
        all_reports += reps
        table.rows.append(ConvergenceRow(None, None, 1, report.eigenvalue, res, gap, spread))
        return SuiteResult(all_reports, table, exact=True)

    P = target
    p = default_point(P) if config.point is None else np.asarray(config.point, float)
    rand = random_points(P.dim, config.seed, config.num_random_points, config.random_box)
    levels = sorted(config.levels)
    mesh = triangulate(P)
    for lev in range(levels[-1] + 1):
        if lev > 0:
            mesh = refine(mesh)
        if lev not in levels:
            continue
        pairs = solve_spectrum(SpectrumRequest(mesh, config.num_eigs))
        for pair in pairs:
            src = FemSource(mesh, pair)
            report = neumann_masses(P, src)
            reps, res, gap, spread = evaluate_all(P, src, report, p, rand)
            ctx = dict(level=lev, eig_index=pair.index, h_max=mesh.h_max)
            all_reports += [dataclasses.replace(r, **ctx) for r in reps]
            table.rows.append(ConvergenceRow(lev, mesh.h_max, pair.index, pair.eigenvalue, res, gap, spread))
    return SuiteResult(all_reports, table, exact=False)


def fem_source(P: Polytope, level: int, num_eigs: int = 1) -> list[FemSource]:
    mesh = mesh_at_level(P, level)
    return [FemSource(mesh, pair) for pair in solve_spectrum(SpectrumRequest(mesh, num_eigs))]
