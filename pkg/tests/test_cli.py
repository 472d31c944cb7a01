import json
import subprocess
import sys

import numpy as np
import pytest

from mvntest.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_REJECT, main

FAST = "b1;b2;hz;energy"


@pytest.fixture
def normal_csv(tmp_path):
    x = np.random.default_rng(0).standard_normal((20, 2))
    path = tmp_path / "normal.csv"
    np.savetxt(path, x, delimiter=",")
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_test_command_records(normal_csv, capsys):
    code, out, _ = run(["test", "--data", normal_csv, "--tests", FAST, "--reps", 200,
                        "--seed", 1, "--format", "records"], capsys)
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["test"] for r in rows] == ["b1", "b2", "hz", "energy"]
    for r in rows:
        assert 0 < r["p_value"] <= 1
        assert r["reject"] == (r["p_value"] < 0.05) or r["test"] == "b2"
        assert (r["d"], r["n"], r["reps"]) == (2, 20, 200)
    assert rows[1]["lower_critical_value"] is not None


def test_default_battery_table(normal_csv, capsys):
    code, out, _ = run(["test", "--data", normal_csv, "--reps", 100, "--seed", 0], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].split()[0] == "test" and len(lines) == 19
    assert sum(line.split()[-1] == "yes" for line in lines[1:]) <= 3


def test_rerun_is_byte_identical(normal_csv, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.txt"
        assert main(["test", "--data", str(normal_csv), "--tests", FAST, "--reps", "150",
                     "--seed", "3", "--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_fail_on_reject(tmp_path, capsys):
    x = np.random.default_rng(1).exponential(size=(60, 2))
    path = tmp_path / "exp.txt"
    np.savetxt(path, x)
    argv = ["test", "--data", path, "--tests", "hz", "--reps", 200, "--seed", 0]
    assert run(argv, capsys)[0] == EXIT_OK
    assert run(argv + ["--fail-on-reject"], capsys)[0] == EXIT_REJECT


def test_non_numeric_cell(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,4\n5,x\n7,9\n")
    code, _, err = run(["test", "--data", path, "--seed", 0], capsys)
    assert code == EXIT_INPUT
    assert "line 3" in err and "column 2" in err


def test_singular_data(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    path.write_text("".join(f"{i},{2 * i}\n" for i in range(10)))
    code, _, err = run(["test", "--data", path, "--seed", 0, "--tests", "hz"], capsys)
    assert code == EXIT_INPUT and "collinear" in err


def test_missing_file(tmp_path, capsys):
    assert run(["test", "--data", tmp_path / "nope.csv"], capsys)[0] == EXIT_INPUT


@pytest.mark.parametrize("argv", [
    ["critval", "--d", 2, "--n", 20, "--strict"],
    ["critval", "--d", 2, "--n", 20, "--tests", "nosuch", "--seed", 0],
    ["critval", "--d", 2, "--n", 20, "--tests", "hv:gamma=1", "--seed", 0],
    ["critval", "--d", 2, "--n", 20, "--reps", 10, "--seed", 0],
    ["critval", "--d", 3, "--n", 3, "--seed", 0],
    ["critval", "--d", 2, "--n", 300, "--tests", "hjm", "--seed", 0],
    ["power", "--d", 2, "--n", 20, "--alt", "t:nu=-1", "--seed", 0],
    ["power", "--d", 3, "--n", 20, "--alt", "nm:theta=0.9", "--seed", 0],
    ["critval", "--d", 2],
    ["frobnicate"],
])
def test_config_errors(argv, capsys):
    assert run(argv, capsys)[0] == EXIT_CONFIG


def test_critval_cache_and_manifest(tmp_path, capsys):
    cache = tmp_path / "cache"
    argv = ["critval", "--d", 2, "--n", 20, "--tests", "bhep;hz", "--reps", 300, "--seed", 5,
            "--cache", cache, "--format", "records"]
    first = run(argv + ["--manifest", tmp_path / "m1.json"], capsys)[1]
    second = run(argv + ["--manifest", tmp_path / "m2.json"], capsys)[1]
    assert first == second
    m1 = json.loads((tmp_path / "m1.json").read_text())
    m2 = json.loads((tmp_path / "m2.json").read_text())
    assert m1["cache_hits"] == [] and m2["cache_hits"] == ["bhep:beta=1", "hz"]
    assert m1["output_sha256"] == m2["output_sha256"]
    assert m2["seed"] == 5 and m2["command"] == "critval" and m2["exit_code"] == 0
    assert len(list(cache.glob("*.json"))) == 2


def test_power_command(capsys):
    code, out, _ = run(["power", "--d", 2, "--n", 30, "--alt", "iid:dist=exp(1)",
                        "--tests", "hz;energy", "--reps", 200, "--seed", 0,
                        "--format", "records"], capsys)
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.splitlines()]
    assert all(r["rejection_percent"] > 50 for r in rows)
    assert rows[0]["alternative"] == "iid:dist=exp(1)"


def test_hjm_power_budget(capsys):
    code, out, _ = run(["power", "--d", 2, "--n", 10, "--alt", "normal", "--tests", "hjm;hz",
                        "--reps", 1000, "--seed", 0, "--format", "records"], capsys)
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["reps"] for r in rows] == [100, 1000]


@pytest.mark.parametrize("threads", [4])
def test_threads_do_not_change_output(normal_csv, tmp_path, threads):
    base = ["critval", "--d", "2", "--n", "15", "--tests", FAST, "--reps", "200", "--seed", "9"]
    outs = []
    for t in (1, threads):
        path = tmp_path / f"t{t}.txt"
        assert main(base + ["--threads", str(t), "--out", str(path)]) == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mvntest", "--version"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and res.stdout.startswith("mvntest ")
