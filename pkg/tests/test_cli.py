import csv
import json
import math

import pytest

from bowlforge.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_mean_csv_and_sidecar(tmp_path, capsys):
    out = tmp_path / "mean.csv"
    code, _, err = run(capsys, "solve", "--speed", "mean", "--dim", "2",
                       "--rmax", "100", "--out", str(out))
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert set(rows[0]) == {"r", "v", "vprime", "u", "kappa1", "kappa_rot",
                            "residual"}
    last = rows[-1]
    assert float(last["r"]) == pytest.approx(100.0)
    assert float(last["v"]) / 100.0 == pytest.approx(1.0, abs=1e-3)
    sidecar = json.loads((tmp_path / "mean.json").read_text())
    assert sidecar["schema"] == "bowlforge/1"
    assert sidecar["status"]["kind"] == "reached_horizon"
    assert sidecar["classification"]["verdict"] == "entire"
    assert sidecar["manifest"]["tool_version"]


def test_solve_harmonic_reports_blowup(tmp_path, capsys):
    out = tmp_path / "hm.csv"
    code, _, _ = run(capsys, "solve", "--speed", "harmonic-mean", "--dim", "2",
                     "--out", str(out))
    assert code == 0
    sidecar = json.loads((tmp_path / "hm.json").read_text())
    assert sidecar["status"]["kind"] == "blew_up"
    assert 0.785 <= sidecar["status"]["R_low"]
    assert sidecar["status"]["R_high"] <= 1.571


def test_solve_parse_error_exit_2(capsys):
    code, _, err = run(capsys, "solve", "--speed", "expr:S1+", "--dim", "2")
    assert code == 2
    assert "offset 3" in err


def test_solve_inadmissible_exit_3(capsys):
    # mixed homogeneity degrees fail the axioms before any integration
    code, _, err = run(capsys, "solve", "--speed", "expr:S1+S2", "--dim", "2")
    assert code == 3


def test_solve_numerical_failure_exit_4(capsys):
    # the boundary limit of this slowly-converging power mean does not
    # stabilize within the probe ladder; an honest failure, not a verdict
    code, _, err = run(capsys, "solve", "--speed", "power-mean:0.1:1",
                       "--dim", "2")
    assert code == 4


def test_solve_json_format_stdout(capsys):
    code, out, _ = run(capsys, "solve", "--speed", "gauss:2", "--dim", "2",
                       "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"]["kind"] == "blew_up"
    assert doc["status"]["R_low"] <= math.sqrt(2.0) <= doc["status"]["R_high"]


def test_classify_examples(capsys):
    code, out, _ = run(capsys, "classify", "--speed", "gauss:1", "--dim", "2")
    assert code == 0 and json.loads(out)["verdict"] == "entire"
    code, out, _ = run(capsys, "classify", "--speed", "gauss:2", "--dim", "2")
    assert code == 0 and json.loads(out)["verdict"] == "bounded"
    code, out, _ = run(capsys, "classify", "--speed", "mean", "--dim", "5")
    doc = json.loads(out)
    assert doc["verdict"] == "entire"
    assert doc["C"] == pytest.approx(0.125)


def test_classify_with_verification(capsys):
    code, out, _ = run(capsys, "classify", "--speed", "scalar", "--dim", "3",
                       "--verify", "--rmax", "200")
    assert code == 0
    doc = json.loads(out)
    assert doc["validation"]["consistent"] is True


def test_verify_passes_for_builtins(capsys):
    code, out, err = run(capsys, "verify", "--speed", "scalar", "--dim", "3",
                         "--rmax", "150")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_pass"] is True
    assert any("barrier" in c["name"] or "linear barriers" in c["name"]
               for c in doc["checks"])
    assert "[pass]" in err


def test_verify_starts_convergence(capsys):
    code, out, _ = run(capsys, "verify", "--speed", "mean", "--dim", "2",
                       "--rmax", "50", "--starts", "1e-3,1e-4,1e-5")
    assert code == 0
    doc = json.loads(out)
    names = [c["name"] for c in doc["checks"]]
    assert any("shrink" in n for n in names)


def test_verify_fails_for_bad_speed(capsys):
    # sqrt(x^2 - xy + y^2) is symmetric and positive but decreasing in x
    # wherever y > 2x, so ellipticity sampling must fail and verify exit 1
    code, out, _ = run(capsys, "verify", "--speed",
                       "expr:(S1*S1-3*S2)^0.5", "--dim", "2")
    assert code == 1
    doc = json.loads(out)
    assert doc["all_pass"] is False
    ell = next(c for c in doc["checks"] if "ellipticity" in c["name"])
    assert ell["passed"] is False


def test_determinism_byte_identical_csv(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        code, _, _ = run(capsys, "solve", "--speed", "scalar", "--dim", "3",
                         "--rmax", "50", "--out", str(out))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    d1, d2 = tmp_path / "serial", tmp_path / "parallel"
    for jobs, dest in ((1, d1), (2, d2)):
        code, out, _ = run(capsys, "sweep", "--speeds", "mean,gauss:2",
                           "--dims", "2,3", "--out", str(dest),
                           "--jobs", str(jobs))
        assert code == 0
    files = sorted(p.name for p in d1.iterdir())
    assert files == sorted(p.name for p in d2.iterdir())
    assert len(files) == 4
    for name in files:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
