"""Command-line entry point.

Commands
--------
verify       run every applicable identity check, emit one CSV row per check
solve        eigenvalues and per-face Neumann masses per level
geometry     geometric quantities of a polytope (volumes, special points)
convergence  residual table per level with successive ratios

Exit codes: 0 success, 1 input or configuration error, 2 an identity check
failed (exact residual above 1e-9, FEM decomposition gap above 1e-10, or a
FEM residual that does not decrease over levels >= 3).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RellichError
from .exact import ExactEigenfunction, exact_neumann_masses
from .fem_eigen import MAX_INTERIOR_NODES, SpectrumRequest, solve_spectrum
from .geometry import (
    ApexPoint,
    InscribedBall,
    Polytope,
    corollary2_apex,
    equal_volume_apex,
    inscribed_ball,
    polytope_from_dict,
    signed_distances,
    signed_pyramid_volumes,
)
from .meshing import refine, triangulate
from .neumann import neumann_masses_fem
from .verify import IdentityReport, SuiteConfig, SuiteResult, run_suite

MAX_LEVEL = 8
VERIFY_COLUMNS = [
    "identity_id", "level", "h_max", "eig_index", "lambda", "lhs", "rhs",
    "relative_residual", "apex_x", "apex_y", "skipped_reason",
]


@dataclass(frozen=True)
class RunConfig:
    command: str
    geometry_path: str | None = None
    exact: ExactEigenfunction | None = None
    num_eigs: int = 3
    levels: tuple[int, ...] = (3, 4, 5)
    apex: tuple[float, ...] | None = None
    output_path: str | None = None
    seed: int = 42


class ConfigError(Exception):
    pass


def parse_levels(text: str) -> tuple[int, ...]:
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad --levels {text!r}; expected LO..HI") from None
    if lo > hi or lo < 0 or hi > MAX_LEVEL:
        raise ConfigError(f"levels must satisfy 0 <= LO <= HI <= {MAX_LEVEL}")
    return tuple(range(lo, hi + 1))


def parse_point(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"bad --point {text!r}; expected x,y[,z]") from None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if np.isnan(x) else repr(x)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rellichpoly", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, exact=True):
        p.add_argument("--geometry", metavar="PATH", help="polytope JSON file")
        if exact:
            p.add_argument("--exact", choices=["rectangle", "box", "right-isosceles"])
            for name in ("a", "b", "c"):
                p.add_argument(f"--{name}", type=float, default=1.0)
            p.add_argument("--m", type=int, default=1)
            p.add_argument("--n", type=int, default=None)
            p.add_argument("--l", type=int, default=1)
            p.add_argument("--levels", default="3..5", help="refinement levels LO..HI (default 3..5)")
            p.add_argument(
                "--num-eigs", type=int, default=3,
                help=f"eigenpairs per level (default 3; at most {MAX_INTERIOR_NODES} interior nodes per mesh)",
            )
            p.add_argument("--seed", type=int, default=42)
        p.add_argument("--point", help="apex point x,y[,z]")
        p.add_argument("--out", metavar="PATH", help="output file (default stdout)")

    for name in ("verify", "solve", "convergence"):
        p = sub.add_parser(name)
        common(p)
        if name == "solve":
            p.add_argument("--dump-mesh", metavar="PATH", help="write the finest mesh as JSON")
    g = sub.add_parser("geometry")
    common(g, exact=False)
    g.add_argument("--equal-volume-point", action="store_true")
    g.add_argument("--inscribed-ball", action="store_true")
    g.add_argument("--corollary2", action="store_true")
    return parser


def _exact_from_args(args) -> ExactEigenfunction:
    kind = args.exact
    try:
        if kind == "rectangle":
            return ExactEigenfunction.rectangle(args.a, args.b, args.m, 1 if args.n is None else args.n)
        if kind == "box":
            return ExactEigenfunction.box(args.a, args.b, args.c, args.m, 1 if args.n is None else args.n, args.l)
        return ExactEigenfunction.right_isosceles(args.a, args.m, 2 if args.n is None else args.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def make_config(args) -> RunConfig:
    exact = getattr(args, "exact", None)
    if (args.geometry is None) == (exact is None):
        raise ConfigError("give exactly one of --geometry or --exact")
    num_eigs = getattr(args, "num_eigs", 1)
    if num_eigs < 1:
        raise ConfigError("--num-eigs must be at least 1")
    return RunConfig(
        command=args.command,
        geometry_path=args.geometry,
        exact=_exact_from_args(args) if exact else None,
        num_eigs=num_eigs,
        levels=parse_levels(getattr(args, "levels", "3..5")),
        apex=parse_point(args.point) if args.point else None,
        output_path=args.out,
        seed=getattr(args, "seed", 42),
    )


def load_geometry(path: str) -> Polytope:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return polytope_from_dict(data)


def _target(cfg: RunConfig):
    return cfg.exact if cfg.exact is not None else load_geometry(cfg.geometry_path)


def _dim(target) -> int:
    return target.dim


def _check_point(cfg: RunConfig, dim: int) -> None:
    if cfg.apex is not None and len(cfg.apex) != dim:
        raise ConfigError(f"--point needs {dim} coordinates")


def write_verify_csv(result: SuiteResult, dim: int, seed: int, out) -> None:
    cols = list(VERIFY_COLUMNS)
    if dim == 3:
        cols.insert(cols.index("apex_y") + 1, "apex_z")
    out.write(f"# rellichpoly verify; seed={seed}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(cols)
    lam_of = {(r.level, r.eig_index): r.eigenvalue for r in result.table.rows}
    for rep in result.reports:
        lam = lam_of.get((rep.level, rep.eig_index))
        base = [rep.identity_id, _fmt(rep.level), _fmt(rep.h_max), _fmt(rep.eig_index), _fmt(lam)]
        if isinstance(rep, IdentityReport):
            apex = [""] * dim if rep.apex_used is None else [_fmt(x) for x in rep.apex_used]
            row = base + [_fmt(rep.lhs), _fmt(rep.rhs), _fmt(rep.relative_residual)] + apex + [""]
        else:
            row = base + ["", "", ""] + [""] * dim + [rep.reason]
        w.writerow(row)


def write_convergence_csv(result: SuiteResult, seed: int, out) -> None:
    table = result.table
    idents = table.identities()
    out.write(f"# rellichpoly convergence; seed={seed}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["level", "h_max", "eig_index", "lambda"] + idents + ["decomposition_gap", "random_p_spread"])
    for r in table.rows:
        w.writerow(
            [_fmt(r.level), _fmt(r.h_max), _fmt(r.eig_index), _fmt(r.eigenvalue)]
            + [_fmt(r.residuals.get(i)) for i in idents]
            + [_fmt(r.decomposition_gap), _fmt(r.random_p_spread)]
        )
    if result.exact:
        return
    for j in table.eig_indices():
        for ident in idents:
            ratios = " ".join(f"{x:.4f}" for x in table.ratios(ident, j))
            flag = "monotone" if table.is_monotone(ident, j) else "NOT-monotone"
            out.write(f"# eig {j} {ident}: ratios {ratios or '-'}; {flag}\n")


def cmd_verify(cfg: RunConfig, out) -> int:
    target = _target(cfg)
    _check_point(cfg, _dim(target))
    scfg = SuiteConfig(levels=cfg.levels, num_eigs=cfg.num_eigs, point=cfg.apex, seed=cfg.seed)
    result = run_suite(target, scfg)
    if cfg.command == "convergence":
        write_convergence_csv(result, cfg.seed, out)
    else:
        write_verify_csv(result, _dim(target), cfg.seed, out)
    fails = result.failures()
    for f in fails:
        print(f"fail: {f}", file=sys.stderr)
    return 2 if fails else 0


def cmd_solve(cfg: RunConfig, out, dump_mesh=None) -> int:
    target = _target(cfg)
    w = csv.writer(out, lineterminator="\n")
    if isinstance(target, ExactEigenfunction):
        rep = exact_neumann_masses(target)
        k = rep.num_faces
        w.writerow(["level", "h_max", "eig_index", "lambda"] + [f"mass_{i}" for i in range(k)])
        w.writerow(["", "", "1", _fmt(rep.eigenvalue)] + [_fmt(x) for x in rep.per_face_mass])
        return 0
    P = target
    w.writerow(["level", "h_max", "eig_index", "lambda"] + [f"mass_{i}" for i in range(P.num_faces)])
    mesh = triangulate(P)
    for lev in range(max(cfg.levels) + 1):
        if lev > 0:
            mesh = refine(mesh)
        if lev not in cfg.levels:
            continue
        for pair in solve_spectrum(SpectrumRequest(mesh, cfg.num_eigs)):
            rep = neumann_masses_fem(P, mesh, pair)
            w.writerow(
                [str(lev), _fmt(mesh.h_max), str(pair.index), _fmt(pair.eigenvalue)]
                + [_fmt(x) for x in rep.per_face_mass]
            )
    if dump_mesh:
        mesh.save(dump_mesh)
    return 0


def cmd_geometry(cfg: RunConfig, args, out) -> int:
    P = load_geometry(cfg.geometry_path)
    _check_point(cfg, P.dim)
    out.write(f"dim={P.dim}\nfaces={P.num_faces}\nvolume={P.volume!r}\n")
    out.write(f"boundary_measure={P.boundary_measure!r}\nconvex={P.is_convex}\n")
    for i, f in enumerate(P.faces):
        nrm = ",".join(repr(float(x)) for x in f.normal)
        out.write(f"face {i}: vertices={list(f.vertex_indices)} normal=({nrm}) measure={f.measure!r}\n")
    if cfg.apex is not None:
        d = signed_distances(P, cfg.apex)
        v = signed_pyramid_volumes(P, cfg.apex)
        for i in range(P.num_faces):
            out.write(f"point face {i}: signed_distance={float(d[i])!r} signed_volume={float(v[i])!r}\n")
        out.write(f"point volume_sum={float(v.sum())!r}\n")
    if args.inscribed_ball:
        ball = inscribed_ball(P)
        if isinstance(ball, InscribedBall):
            c = ",".join(repr(float(x)) for x in ball.center)
            out.write(f"InscribedBall center=({c}) radius={ball.radius!r} residual={ball.residual!r}\n")
        else:
            out.write(f"NotTangential residual={ball.residual!r}\n")
    if args.equal_volume_point:
        ap = equal_volume_apex(P)
        if isinstance(ap, ApexPoint):
            c = ",".join(repr(float(x)) for x in ap.coordinates)
            out.write(f"EqualVolumePoint point=({c})\n")
        else:
            out.write(f"NoSuchPoint residual={ap.residual!r}\n")
    if args.corollary2:
        ap = corollary2_apex(P)
        if isinstance(ap, ApexPoint):
            c = ",".join(repr(float(x)) for x in ap.coordinates)
            out.write(f"Corollary2Apex point=({c})\n")
        else:
            out.write(f"HypothesisFails {ap.reason}\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        buf = io.StringIO()
        if cfg.command in ("verify", "convergence"):
            code = cmd_verify(cfg, buf)
        elif cfg.command == "solve":
            code = cmd_solve(cfg, buf, args.dump_mesh)
        else:
            code = cmd_geometry(cfg, args, buf)
        text = buf.getvalue()
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            sys.stdout.write(text)
        return code
    except (ConfigError, RellichError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
