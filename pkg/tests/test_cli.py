import json
import math

import pytest

from shapeopt import cli, verify
from shapeopt.geometry import disk_polygon
from shapeopt.io import read_profile, write_polygon
from shapeopt.verify import CheckResult


@pytest.fixture
def files(tmp_path):
    (tmp_path / "square.poly").write_text("0 0\n1 0\n1 1\n0 1\n")
    (tmp_path / "star.poly").write_text("0 0\n4 0.2\n0.3 3.7\n2 1\n3 3\n")
    (tmp_path / "sliver.poly").write_text("0 0\n1 0\n0 0.05\n")
    write_polygon(tmp_path / "disk.poly", disk_polygon(math.pi * 0.99990, 256))
    return tmp_path


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def payload(out):
    lines = out.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def test_geometry_bonnesen(capsys, files):
    code, out, err = run(capsys, "geometry", "bonnesen", files / "square.poly")
    assert code == 0
    assert payload(out) == {"area": 1.0, "perimeter": 4.0, "inradius": 0.5, "slack": 1.0}
    assert "config:" in err and "started" in err


def test_geometry_hausdorff_zero(capsys, files):
    code, out, _ = run(capsys, "geometry", "hausdorff", files / "square.poly", files / "square.poly")
    assert code == 0 and payload(out) == {"d": 0.0}


@pytest.mark.parametrize("op,key,value", [("area", "area", 1.0), ("perimeter", "perimeter", 4.0), ("inradius", "inradius", 0.5)])
def test_geometry_measures(capsys, files, op, key, value):
    code, out, _ = run(capsys, "geometry", op, files / "square.poly")
    assert code == 0 and payload(out)[key] == value


def test_geometry_project_star(capsys, files):
    code, out, _ = run(capsys, "geometry", "project", files / "star.poly", "--box", "0 0 4 4", "--m", 2)
    assert code == 0
    assert payload(out)["area"] == pytest.approx(2.0, abs=2e-9)


def test_geometry_dilate(capsys, files):
    code, out, _ = run(capsys, "geometry", "dilate", files / "square.poly", "--eps", 0.1, "--arc-segments", 32)
    exact = 1.4 + 0.01 * math.pi
    assert code == 0 and exact - 1e-4 <= payload(out)["area"] <= exact


@pytest.mark.parametrize("argv", [
    ["geometry", "area"],
    ["geometry", "hausdorff", "square.poly"],
    ["geometry", "dilate", "square.poly"],
    ["geometry", "area", "missing.poly"],
    ["geometry", "area", "star.poly"],
    ["geometry", "nonsense", "square.poly"],
    ["nonsense"],
    [],
])
def test_geometry_usage_errors(capsys, files, monkeypatch, argv):
    monkeypatch.chdir(files)
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err


def test_eigen_square(capsys, files):
    code, out, _ = run(capsys, "eigen", "--polygon", files / "square.poly", "--k", 1, "--h", 0.02)
    assert code == 0
    data = payload(out)
    assert data["eigenvalues"][0] == pytest.approx(2 * math.pi**2, rel=0.01)
    assert data["config"]["k"] == 1


def test_eigen_k_zero_is_usage_error(capsys, files):
    code, out, err = run(capsys, "eigen", "--polygon", files / "square.poly", "--k", 0)
    assert code == 2 and out == "" and "k must be" in err


def test_eigen_mesh_failure_is_numeric_error(capsys, files):
    code, out, _ = run(capsys, "eigen", "--polygon", files / "sliver.poly", "--h", 0.01)
    assert code == 3 and out == ""


def test_eigen_coefficient_flags(capsys, files):
    code, out, _ = run(capsys, "eigen", "--polygon", files / "square.poly", "--h", 0.05, "--c0", "1")
    shifted = payload(out)["eigenvalues"][0]
    run(capsys, "eigen", "--polygon", files / "square.poly", "--h", 0.05)
    code, out, _ = run(capsys, "eigen", "--polygon", files / "square.poly", "--h", 0.05)
    assert shifted == pytest.approx(payload(out)["eigenvalues"][0] + 1, rel=1e-6)
    code, _, err = run(capsys, "eigen", "--polygon", files / "square.poly", "--a12", "2")
    assert code == 2 and "eigenvalue" in err


def test_solve_disk_torsion(capsys, files):
    csv_path = files / "u.csv"
    code, out, _ = run(capsys, "solve", "--polygon", files / "disk.poly", "--f", "1", "--j", "u",
                       "--h", 0.02, "--out", csv_path)
    assert code == 0
    data = payload(out)
    assert data["value"] == pytest.approx(math.pi / 8, rel=0.01)
    assert data["csv"] == str(csv_path)
    assert csv_path.read_text().startswith("x,y,u\n")


def test_newton(capsys, files):
    prof = files / "n.profile"
    code, out, _ = run(capsys, "newton", "--M", 1, "--R", 1, "--nr", 200, "--budget", 20000, "--seed", 1, "--out", prof)
    assert code == 0
    data = payload(out)
    assert data["resistance"] < math.pi / 2
    assert read_profile(prof).n_r == 200


def test_runs_are_byte_identical(capsys, files):
    argv = ["newton", "--budget", 3000, "--seed", 4, "--out", files / "a.profile"]
    _, first, err1 = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert "started" not in first and "started" in err1


def test_config_file_and_flag_precedence(capsys, files):
    cfg = files / "run.cfg"
    cfg.write_text("# newton run\nbudget = 500\nseed = 9\nnr = 60\n")
    code, out, _ = run(capsys, "newton", "--config", cfg, "--nr", 80, "--out", files / "b.profile")
    data = payload(out)
    assert code == 0
    assert data["config"]["budget"] == 500 and data["config"]["seed"] == 9 and data["config"]["nr"] == 80


def test_unknown_config_key(capsys, files):
    cfg = files / "bad.cfg"
    cfg.write_text("budget = 5\ncolour = blue\n")
    code, _, err = run(capsys, "newton", "--config", cfg)
    assert code == 2 and "colour" in err


def test_seed_from_environment(capsys, files, monkeypatch):
    monkeypatch.setenv("SHAPEOPT_SEED", "17")
    _, out, _ = run(capsys, "newton", "--budget", 100, "--out", files / "c.profile")
    assert payload(out)["config"]["seed"] == 17
    monkeypatch.setenv("SHAPEOPT_SEED", "abc")
    code, _, _ = run(capsys, "newton", "--budget", 100, "--out", files / "c.profile")
    assert code == 2


def test_bad_numbers(capsys, files):
    code, _, _ = run(capsys, "newton", "--M", "nan")
    assert code == 2
    code, _, _ = run(capsys, "newton", "--budget", "many")
    assert code == 2


def test_optimize_small_lambda1(capsys, files):
    code, out, _ = run(capsys, "optimize", "--objective", "lambda1", "--box", "0 0 4 4", "--m", 3.14159,
                       "--budget", 4, "--seed", 1, "--h", 0.15, "--n-theta", 16,
                       "--out", files / "best.poly", "--trace", files / "trace.csv")
    assert code == 0
    data = payload(out)
    assert data["best_value"] <= data["trace"][0][1]
    assert data["evaluations"] == 4
    assert (files / "trace.csv").read_text().count("\n") == 5
    assert (files / "best.poly").exists()


def test_optimize_perimeter(capsys):
    code, out, _ = run(capsys, "optimize", "--objective", "perimeter", "--m", 2.0, "--box", "0 0 3 3",
                       "--budget", 200, "--n-theta", 32)
    assert code == 0
    assert payload(out)["best_value"] == pytest.approx(2 * math.sqrt(2 * math.pi), rel=0.02)


@pytest.mark.parametrize("extra", [["--objective", "volume"], ["--objective", "boundary"], ["--m", 100],
                                   ["--objective", "perimeter", "--f", "x1"]])
def test_optimize_usage_errors(capsys, extra):
    code, out, _ = run(capsys, "optimize", "--budget", 2, *extra)
    assert code == 2 and out == ""


def test_verify_geometry(capsys):
    code, out, err = run(capsys, "verify", "--suite", "geometry", "--seed", 7)
    assert code == 0
    data = payload(out)
    ids = [c["id"] for c in data["checks"]]
    assert ids == sorted(ids)
    for name in ("geometry.bonnesen", "geometry.perimeter_monotonicity", "geometry.measure_convergence"):
        assert name in ids
    assert "PASS  geometry.bonnesen" in err
    assert data["failed"] == 0


def test_verify_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(verify, "run_suite", lambda suite, seed, on_result=None: [CheckResult("x.fake", False, {}, 0.0)])
    code, out, err = run(capsys, "verify", "--suite", "expr")
    assert code == 1
    assert payload(out)["failed"] == 1
    assert "FAIL  x.fake" in err


def test_verify_unknown_suite(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "everything")
    assert code == 2
