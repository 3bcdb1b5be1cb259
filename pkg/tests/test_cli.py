import csv
import json

import pytest

from trapmodes import config as cfgmod
from trapmodes.cli import MODE_COLUMNS, SUMMARY_COLUMNS, main

COARSE = "0.125,0.125,6"


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def trapping_config(tmp_path):
    return write(tmp_path, "t1.json", {"variant": "CenteredObstacles", "wall_bc": "Neumann", "n": 2, "a": 1, "profile": {"kind": "zero"}})


def test_certify_writes_certificates(tmp_path, trapping_config):
    out = tmp_path / "out"
    assert main(["certify", "--config", trapping_config, "--out", str(out)]) == 0
    doc = json.loads((out / "certificates.json").read_text())
    assert [c["m"] for c in doc["certificates"]] == [1, 2]
    assert all(c["valid"] for c in doc["certificates"])
    cfgmod.validate(doc["config"])
    rows = read_csv(out / "summary.csv")
    assert list(rows[0]) == SUMMARY_COLUMNS
    assert len(rows) == 2


def test_certify_nothing_admissible(tmp_path, capsys):
    cfg = write(tmp_path, "d.json", {"wall_bc": "Dirichlet", "n": 1, "a": 1})
    assert main(["certify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert "notice" in capsys.readouterr().err
    assert json.loads((tmp_path / "o" / "certificates.json").read_text())["certificates"] == []


def test_certify_failure_exit_code(tmp_path):
    cfg = write(tmp_path, "f.json", {"n": 3, "a": 0.05, "budget": 1})
    assert main(["certify", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


@pytest.mark.parametrize(
    "raw",
    [
        {"n": 2, "a": 1, "profile": {"kind": "parabolic", "amplitude": 1.2}},
        {"n": 2},
        {"n": 2, "a": 1, "colour": "red"},
        {"n": 2, "a": 1, "profile": {"kind": "cosine"}},
        {"n": 2, "a": 1, "variant": "MidlineSegments", "wall_bc": "Dirichlet"},
    ],
)
def test_config_errors(tmp_path, raw, capsys):
    cfg = write(tmp_path, "bad.json", raw)
    assert main(["certify", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "error" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    (tmp_path / "x.json").write_text("{not json")
    assert main(["verify", "--config", str(tmp_path / "x.json"), "--out", str(tmp_path / "o")]) == 1


def test_solve_and_report(tmp_path, trapping_config):
    out = str(tmp_path / "out")
    assert main(["certify", "--config", trapping_config, "--out", out]) == 0
    assert main(["solve", "--config", trapping_config, "--out", out, "--grid", COARSE]) == 0
    rows = read_csv(tmp_path / "out" / "modes.csv")
    assert list(rows[0]) == MODE_COLUMNS
    assert sorted(int(r["m"]) for r in rows) == [1, 2]
    for r in rows:
        assert float(r["mu"]) < float(r["threshold"])
        assert float(r["hx"]) == 0.125 and float(r["L"]) == 6.0
    assert (tmp_path / "out" / "field_m1_0.csv").exists()
    assert len(read_csv(tmp_path / "out" / "convergence.csv")) == 2
    assert main(["report", "--out", out]) == 0
    report = (tmp_path / "out" / "report.md").read_text()
    assert report.count("| yes |") >= 2
    slices = read_csv(tmp_path / "out" / "quotient_slices.csv")
    assert {r["slice"] for r in slices} == {"lambda", "alpha"}


def test_report_without_solve(tmp_path, trapping_config, capsys):
    out = str(tmp_path / "out")
    main(["certify", "--config", trapping_config, "--out", out])
    capsys.readouterr()
    assert main(["report", "--out", out]) == 0
    assert "warning" in capsys.readouterr().err


def test_report_empty_dir(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["report", "--out", str(tmp_path / "empty")]) == 1
    assert main(["report", "--out", str(tmp_path / "missing")]) == 1


def test_solve_unobstructed(tmp_path):
    cfg = write(tmp_path, "u.json", {"variant": "Unobstructed", "n": 2, "a": 1})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o"), "--grid", COARSE]) == 0
    assert read_csv(tmp_path / "o" / "modes.csv") == []


def test_solve_misaligned_grid(tmp_path, trapping_config):
    assert main(["solve", "--config", trapping_config, "--out", str(tmp_path / "o"), "--grid", "0.0625,0.3,8"]) == 1
    assert main(["solve", "--config", trapping_config, "--out", str(tmp_path / "o"), "--grid", "0.3,0.0625,8"]) == 1


def test_verify_default_and_coarse(tmp_path):
    cfg = write(tmp_path, "p.json", {"n": 2, "a": 1, "profile": {"kind": "parabolic", "amplitude": 0.5}})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    rows = read_csv(tmp_path / "a" / "residuals.csv")
    assert all(r["status"] in ("pass", "info") for r in rows)
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "b"), "--coarse-quadrature"]) == 0
    coarse = read_csv(tmp_path / "b" / "residuals.csv")
    assert any(r["status"] == "fail" for r in coarse)


def test_verify_single_period(tmp_path):
    cfg = write(tmp_path, "n1.json", {"n": 1, "a": 1})
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "residuals.csv")
    roots = [r for r in rows if r["check"] == "roots_of_unity"]
    assert roots and float(roots[0]["residual"]) == 0.0


def test_outputs_reparse(tmp_path, trapping_config):
    out = tmp_path / "out"
    main(["certify", "--config", trapping_config, "--out", str(out), "--budget", "200"])
    main(["solve", "--config", trapping_config, "--out", str(out), "--grid", COARSE, "--budget", "200"])
    for name, hx in (("certificates.json", 0.0625), ("modes.json", 0.125)):
        doc = json.loads((out / name).read_text())
        cfgmod.validate(doc["config"])
        again = cfgmod.from_dict(doc["config"])
        assert again.budget == 200 and again.grid.hx == hx


def test_repeated_runs_are_byte_identical(tmp_path, trapping_config):
    outs = []
    for run in ("r1", "r2"):
        out = tmp_path / run
        main(["certify", "--config", trapping_config, "--out", str(out), "--budget", "300"])
        main(["solve", "--config", trapping_config, "--out", str(out), "--grid", COARSE, "--budget", "300"])
        main(["report", "--out", str(out)])
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
