import csv
import io
import json

import numpy as np
import pytest

from rellichpoly import cli
from rellichpoly.verify import ConvergenceRow, ConvergenceTable, SuiteResult

from conftest import SHAPES


def write_geom(tmp_path, name, verts=None):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps({"dim": 2, "vertices": verts or SHAPES[name]}))
    return str(path)


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_verify_exact_rectangle(capsys):
    code = cli.main(["verify", "--exact", "rectangle", "--a", "1", "--b", "1", "--m", "1", "--n", "1"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("# rellichpoly verify; seed=42\n")
    rows = read_csv(out)
    assert rows[0].keys() == set(cli.VERIFY_COLUMNS)
    done = [r for r in rows if r["relative_residual"]]
    assert {r["identity_id"] for r in done} >= {"thm1_distance", "thm1_volume", "corollary1", "rellich_raw"}
    assert all(float(r["relative_residual"]) <= 1e-9 for r in done)


def test_verify_exact_box_has_z_column(capsys):
    assert cli.main(["verify", "--exact", "box"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert "apex_z" in rows[0]
    thm = [r for r in rows if r["identity_id"] == "thm1_volume"][0]
    assert float(thm["rhs"]) == pytest.approx(2 * np.pi**2)


def test_verify_geometry_square_levels(tmp_path, capsys):
    path = write_geom(tmp_path, "square")
    code = cli.main(["verify", "--geometry", path, "--levels", "3..6", "--num-eigs", "2"])
    rows = read_csv(capsys.readouterr().out)
    assert code == 0
    assert {r["level"] for r in rows} == {"3", "4", "5", "6"}
    assert {r["eig_index"] for r in rows} == {"1", "2"}


def test_geometry_trapezoid_no_point(tmp_path, capsys):
    path = write_geom(tmp_path, "trapezoid")
    assert cli.main(["geometry", "--geometry", path, "--equal-volume-point"]) == 0
    out = capsys.readouterr().out
    line = [ln for ln in out.splitlines() if ln.startswith("NoSuchPoint")][0]
    assert float(line.split("residual=")[1]) > 1e-6


def test_geometry_reports(tmp_path, capsys):
    path = write_geom(tmp_path, "bisected_quad")
    args = ["geometry", "--geometry", path, "--point", "2,0", "--inscribed-ball", "--corollary2", "--equal-volume-point"]
    assert cli.main(args) == 0
    out = capsys.readouterr().out
    assert "Corollary2Apex point=(2.0,0.0)" in out
    assert "NotTangential" in out
    total = [ln for ln in out.splitlines() if ln.startswith("point volume_sum=")][0]
    assert float(total.split("=")[1]) == pytest.approx(8.0, rel=1e-14)
    assert "signed_volume=2.0" in out


def test_solve_exact_and_fem(tmp_path, capsys):
    assert cli.main(["solve", "--exact", "right-isosceles"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert float(rows[0]["lambda"]) == pytest.approx(5 * np.pi**2)
    path = write_geom(tmp_path, "lshape")
    dump = tmp_path / "mesh.json"
    assert cli.main(["solve", "--geometry", path, "--levels", "1..2", "--num-eigs", "2", "--dump-mesh", str(dump)]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert len(rows) == 4 and "mass_5" in rows[0]
    assert json.loads(dump.read_text())["level"] == 2


def test_convergence_output(tmp_path, capsys):
    path = write_geom(tmp_path, "square")
    assert cli.main(["convergence", "--geometry", path, "--levels", "2..4", "--num-eigs", "1"]) == 0
    out = capsys.readouterr().out
    rows = read_csv(out)
    assert [r["level"] for r in rows] == ["2", "3", "4"]
    assert "# eig 1 thm1_distance: ratios" in out


def test_output_file_and_determinism(tmp_path):
    path = write_geom(tmp_path, "mixed_quad")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        cli.main(["verify", "--geometry", path, "--levels", "2..3", "--num-eigs", "2", "--seed", "7", "--out", str(out)])
    assert a.read_bytes() == b.read_bytes()
    assert "seed=7" in a.read_text().splitlines()[0]


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--geometry", "/nonexistent.json"],
        ["verify", "--exact", "rectangle", "--levels", "5..2"],
        ["verify", "--exact", "rectangle", "--levels", "0..9"],
        ["verify", "--exact", "rectangle", "--num-eigs", "0"],
        ["verify"],
        ["verify", "--exact", "right-isosceles", "--m", "2", "--n", "2"],
        ["verify", "--exact", "rectangle", "--point", "1,2,3"],
        ["verify", "--exact", "rectangle", "--point", "a,b"],
    ],
)
def test_config_errors_exit_1(args, capsys):
    assert cli.main(args) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_bad_geometry_exit_1(tmp_path, capsys):
    bow = write_geom(tmp_path, "bowtie", [(0, 0), (1, 1), (1, 0), (0, 1)])
    assert cli.main(["geometry", "--geometry", bow]) == 1
    assert "intersect" in capsys.readouterr().err
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert cli.main(["geometry", "--geometry", str(junk)]) == 1


def test_solver_cap_reported(tmp_path, capsys):
    path = write_geom(tmp_path, "square")
    assert cli.main(["solve", "--geometry", path, "--levels", "7..7", "--num-eigs", "1"]) == 1
    assert "6000" in capsys.readouterr().err


def test_failed_checks_exit_2(tmp_path, monkeypatch, capsys):
    table = ConvergenceTable(
        [
            ConvergenceRow(3, 0.1, 1, 5.0, {"thm1_distance": 1e-3}, 0.0, 0.0),
            ConvergenceRow(4, 0.05, 1, 4.9, {"thm1_distance": 5e-3}, 0.0, 0.0),
        ]
    )
    monkeypatch.setattr(cli, "run_suite", lambda target, cfg: SuiteResult([], table, exact=False))
    path = write_geom(tmp_path, "square")
    assert cli.main(["verify", "--geometry", path]) == 2
    assert "fail:" in capsys.readouterr().err
