import json
import subprocess
import sys

import pytest

from toric_sfk.catalog import hwang_singer_profile
from toric_sfk.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize(
    "name, code",
    [("hwang_singer.json", 0), ("five_edge.json", 0), ("bad_adjacent_cusps.json", 1), ("bad_nut.json", 1), ("malformed.json", 2)],
)
def test_validate_exit_codes(capsys, data_dir, name, code):
    assert run(capsys, "validate", data_dir / name)[0] == code


def test_missing_file_is_parse_error(capsys, tmp_path):
    assert run(capsys, "validate", tmp_path / "nope.json")[0] == 2


def test_validate_prints_constants(capsys, data_dir):
    code, out, _ = run(capsys, "validate", data_dir / "hwang_singer.json")
    assert code == 0
    assert "a'     = (-1, 0)" in out
    assert "Lambda_2 = 1" in out


def test_constants_json(capsys, data_dir):
    code, out, _ = run(capsys, "constants", data_dir / "five_edge.json")
    table = json.loads(out)
    assert table["a"] == ["0", "0", "1", "1"]
    assert table["Lambda"] == {"2": "1", "4": "1"}


def _body(path):
    return json.loads(path.read_text())["body"]


@pytest.mark.parametrize("name", ["hwang_singer.json", "c2.json", "strip.json", "hwang_singer_conical.json"])
def test_verify_passes(capsys, data_dir, tmp_path, name):
    code, out, err = run(capsys, "verify", data_dir / name, "--grid", 64, "--mesh", 20, "--out", tmp_path)
    assert code == 0, out + err
    body = _body(tmp_path / "report.json")
    assert body["passed"]
    assert "FAIL" not in out


def test_verify_is_deterministic(capsys, data_dir, tmp_path, monkeypatch):
    args = ["verify", data_dir / "hwang_singer.json", "--grid", 32, "--mesh", 16]
    run(capsys, *args, "--out", tmp_path / "a")
    monkeypatch.setenv("TORIC_SFK_THREADS", "4")
    run(capsys, *args, "--out", tmp_path / "b")
    assert _body(tmp_path / "a" / "report.json") == _body(tmp_path / "b" / "report.json")


def test_verify_reports_first_failure(capsys, data_dir, tmp_path):
    # an absurd tolerance forces the r consistency suite to fail
    code, _, err = run(
        capsys, "verify", data_dir / "hwang_singer.json", "--grid", 32, "--mesh", 16, "--out", tmp_path,
        "--tol-r-consistency", 1e-30,
    )
    assert code == 1
    assert "r_consistency" in err


def test_small_grid_rejected(capsys, data_dir, tmp_path):
    assert run(capsys, "verify", data_dir / "c2.json", "--grid", 8, "--out", tmp_path)[0] == 1


def test_export_files(capsys, data_dir, tmp_path):
    code, _, _ = run(capsys, "export", data_dir / "hwang_singer.json", "--grid", 64, "--mesh", 16, "--out", tmp_path)
    assert code == 0
    lines = (tmp_path / "grid.csv").read_text().splitlines()
    assert len(lines) == 64 * 64 + 1
    rec = json.loads((tmp_path / "metric.jsonl").read_text().splitlines()[0])
    assert {"x", "H", "r"} <= set(rec)
    for name in ("boundary.json", "asymptotics.json"):
        assert "body" in json.loads((tmp_path / name).read_text())


def test_profile_matches_closed_form(capsys, data_dir):
    code, out, _ = run(capsys, "profile", data_dir / "hwang_singer.json", "--tau", "0.5", "2", "8")
    assert code == 0
    for line in out.splitlines():
        t, v = map(float, line.split())
        assert v == pytest.approx(hwang_singer_profile(t), rel=1e-9)


def test_conical_command(capsys, data_dir):
    code, out, _ = run(capsys, "conical", data_dir / "hwang_singer_smooth.json", "--theta", "2=1/4")
    assert code == 0
    body = json.loads(out)["body"]
    ident = body["cone_angle_identity"]["2"]
    assert ident["exact"] and ident["residual"] == 0


def test_conical_bad_theta(capsys, data_dir):
    assert run(capsys, "conical", data_dir / "hwang_singer_smooth.json", "--theta", "2")[0] == 2
    assert run(capsys, "conical", data_dir / "hwang_singer_smooth.json", "--theta", "2=3/2")[0] == 1


def test_asymptotics_command(capsys, data_dir):
    code, out, _ = run(capsys, "asymptotics", data_dir / "hwang_singer_smooth.json")
    assert code == 0
    assert json.loads(out)["body"]["kind"] == "generalized-TN"


def test_module_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "toric_sfk", "validate", str(data_dir / "c2.json")], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.startswith("valid")
