import json
import os
from pathlib import Path

import pytest

from icb.cli import main

FIXTURE = str(Path(__file__).parent / "data" / "paper_fixture.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_demo(capsys):
    code, out, _ = run(capsys, "demo")
    assert code == 0
    assert "t = [-9.33, 11.33, 7.33, -9.33]" in out
    assert "R = {2, 3}" in out
    assert run(capsys, "demo")[1] == out


def test_demo_json(capsys):
    code, out, _ = run(capsys, "demo", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["mechanism"] == "BIC-B" and doc["k"] == [0, 1, 1, 0]
    assert doc["t"][1] == pytest.approx(34 / 3)


def test_run_bicb(capsys):
    code, out, _ = run(capsys, "run", "--graph", FIXTURE, "--announce", "10,15,13,8", "--mechanism", "bicb")
    assert code == 0 and "t = [-9.33, 11.33, 7.33, -9.33]" in out


def test_run_dsicb_not_biconnected(capsys):
    code, _, err = run(capsys, "run", "--graph", FIXTURE, "--announce", "10,15,13,8", "--mechanism", "dsicb")
    assert code == 2 and "bi-connected" in err


def test_run_length_mismatch(capsys):
    code, _, err = run(capsys, "run", "--graph", FIXTURE, "--announce", "10,15,13")
    assert code == 2 and "3 entries" in err


def test_run_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "run", "--graph", str(tmp_path / "nope.json"), "--announce", "1,2")
    assert code == 2


def test_run_bad_schema(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2}')
    assert run(capsys, "run", "--graph", str(bad), "--announce", "1,2")[0] == 2


def test_verify_fixture(capsys):
    code, out, _ = run(capsys, "verify", "--graph", FIXTURE, "--checks", "bb,nonrouter,ir")
    assert code == 0 and out.count("PASS") == 3


def test_verify_random_bic(capsys):
    code, out, _ = run(capsys, "verify", "--random", "5", "--checks", "bic", "--seed", "3")
    assert code == 0 and "PASS bayesian_ic[optimal]" in out


def test_verify_reports_failure_with_witness(capsys):
    code, out, _ = run(capsys, "verify", "--random", "5", "--types", "3", "--checks", "bic", "--seed", "17", "--json")
    doc = json.loads(out)
    assert code == 1 and not doc[0]["passed"] and doc[0]["witness"]["node"] == 4


def test_verify_unknown_check(capsys):
    assert run(capsys, "verify", "--graph", FIXTURE, "--checks", "xyz")[0] == 2


def test_verify_dsic_on_path_is_usage_error(capsys):
    assert run(capsys, "verify", "--graph", FIXTURE, "--checks", "dsic")[0] == 2


def test_experiment_smoke(capsys, tmp_path):
    code, out, _ = run(capsys, "experiment", "--instances", "2", "--n-list", "5", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "records.csv").read_text().splitlines()
    assert lines[0] == "n,instance,seed,mechanism,apr,wor,budget_sum,router_count,skipped_reason"
    assert len(lines) == 1 + 2 * 2
    assert "n=5:" in out
    assert json.loads((tmp_path / "summary.json").read_text())[0]["n"] == 5


def test_experiment_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_values": [6], "instances": 2, "base_seed": 5}))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "experiment", "--config", str(cfg), "--out", str(out1))[0] == 0
    assert run(capsys, "experiment", "--config", str(cfg), "--out", str(out2))[0] == 0
    assert (out1 / "records.csv").read_bytes() == (out2 / "records.csv").read_bytes()


def test_experiment_seed_from_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ICB_SEED", "11")
    run(capsys, "experiment", "--instances", "1", "--n-list", "6", "--out", str(tmp_path / "env"))
    run(capsys, "experiment", "--instances", "1", "--n-list", "6", "--seed", "11", "--out", str(tmp_path / "flag"))
    assert (tmp_path / "env" / "records.csv").read_text() == (tmp_path / "flag" / "records.csv").read_text()


@pytest.mark.skipif(os.geteuid() == 0, reason="root can write anywhere")
def test_experiment_unwritable(capsys, tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    assert run(capsys, "experiment", "--instances", "1", "--n-list", "5", "--out", str(locked / "x"))[0] == 2


def test_experiment_unwritable_file_path(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(capsys, "experiment", "--instances", "1", "--n-list", "5", "--out", str(blocker / "x"))
    assert code == 2 and "cannot write" in err


def test_bad_config_exit_code(capsys):
    assert run(capsys, "experiment", "--instances", "0", "--out", "/tmp/unused-icb")[0] == 2


def test_no_subcommand(capsys):
    assert run(capsys)[0] == 2
