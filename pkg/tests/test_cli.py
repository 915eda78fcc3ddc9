import json
import shutil
from importlib import resources

import pytest

from tss3dkp.cli import main


@pytest.fixture
def sample(tmp_path):
    def copy(name):
        dst = tmp_path / f"{name}.json"
        src = resources.files("tss3dkp").joinpath("data", f"{name}.json")
        with resources.as_file(src) as p:
            shutil.copy(p, dst)
        return dst
    return copy


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_bound(capsys, sample):
    code, out, _ = run(capsys, "bound", "--instance", sample("example_bound"))
    assert code == 0
    assert out.splitlines() == ["U=3 Z=2", "per_scenario=2,3 cap_weight=2 cap_volume=4"]


def test_solve(capsys, sample, tmp_path):
    sol = tmp_path / "sol.json"
    mps = tmp_path / "m.mps"
    code, out, _ = run(capsys, "solve", "--instance", sample("example_packing"), "--gap", "0",
                       "--out-solution", sol, "--export-mps", mps)
    assert code == 0
    assert "objective 26/25 (1.04)" in out
    assert "first_stage a=0,0 a_p=1 a_b=2" in out
    assert json.loads(sol.read_text())["objective"]["exact"] == "26/25"
    assert "OBJSENSE" in mps.read_text()


def test_solve_without_printers(capsys, sample):
    code, out, _ = run(capsys, "solve", "--instance", sample("example_packing"), "--no-printers")
    assert code == 0 and "objective 7/10 (0.7)" in out


def test_solve_limit_exit_code(capsys, tmp_path):
    inst = tmp_path / "g.json"
    assert run(capsys, "gen", "--items", 4, "--demand-limit", 3, "--scenarios", 3, "--seed", 0, "--out", inst)[0] == 0
    code, _, err = run(capsys, "solve", "--instance", inst, "--gap", "0", "--node-limit", 1)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["kind"] == "limit"


def test_eval(capsys, sample):
    code, out, _ = run(capsys, "eval", "--instance", sample("example_packing"), "--first-stage", "0,1,0,0")
    assert code == 0 and out.strip() == "expected_reward 3/5 (0.6)"
    code, _, err = run(capsys, "eval", "--instance", sample("example_packing"), "--first-stage", "1,1,0,0")
    assert code == 1 and json.loads(err)["kind"] == "validation"


def test_gen_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(capsys, "gen", "--items", 5, "--demand-limit", 4, "--scenarios", 3, "--seed", 9, "--out", p)
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.json.meta.json").read_text())
    assert meta["seed"] == 9


def test_sweep(capsys, tmp_path):
    out_csv = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--aspect", "printer_size_k", "--grid", "2,inf", "--per-value", 2,
                     "--seed", 1, "--items", 4, "--demand-limit", 3, "--scenarios", 2, "--gap", "0",
                     "--out-csv", out_csv)
    assert code == 0
    rows = out_csv.read_text().splitlines()
    assert rows[0].startswith("value,n,fails") and rows[2].startswith("inf,2,")
    assert json.loads((tmp_path / "s.csv.meta.json").read_text())["seed"] == 1


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", "--count", 5, "--seed", 3)
    assert code == 0 and out.strip() == "5/5 match"


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "--instance", "x.json", "--bogus"],
    ["sweep", "--aspect", "alpha", "--grid", "0.5"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert json.loads(err)["kind"] == "usage"


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "bound", "--instance", tmp_path / "none.json")
    assert code == 1 and json.loads(err)["level"] == "error"


def test_bad_instance_file(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n  oops\n}")
    code, _, err = run(capsys, "bound", "--instance", p)
    diag = json.loads(err)
    assert code == 1 and diag["kind"] == "format" and diag["line"] == 2


def test_time_limit_env(capsys, sample, monkeypatch):
    monkeypatch.setenv("TSS3DKP_TIME_LIMIT", "nope")
    code, _, err = run(capsys, "solve", "--instance", sample("example_packing"))
    assert code == 1 and "TSS3DKP_TIME_LIMIT" in err
