import json

import numpy as np
import pytest

from todapolymer.cli import main
from todapolymer.whittaker import whittaker_psi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_json(capsys):
    code, out, _ = run(capsys, "verify", "grsk-identities", "--seed", "1", "--json")
    assert code == 0
    d = json.loads(out)
    assert d["suite"] == "grsk-identities" and d["passed"] and d["seed"] == 1


def test_verify_failed_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "hartman-watson")
    assert code == 1
    assert "FAIL" in out


def test_verify_unknown_suite(capsys):
    code, _, err = run(capsys, "verify", "nope")
    assert code == 2 and "unknown suite" in err


def test_verify_unknown_option(capsys):
    code, _, _ = run(capsys, "verify", "critical-point", "--set", "bogus=1")
    assert code == 2


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "rmt", "sample", "--frobnicate")
    assert code == 2 and "usage" in err


def test_whittaker_eval_methods_agree(capsys):
    args = ["whittaker", "eval", "--n", "2", "--x", "1,0", "--lambda-re", "0.2,-0.1",
            "--lambda-im", "0,0", "--json"]
    code, out, _ = run(capsys, *args, "--method", "closed-form")
    a = json.loads(out)
    code2, out2, _ = run(capsys, *args, "--method", "givental")
    b = json.loads(out2)
    assert code == code2 == 0
    assert set(a) >= {"value_re", "value_im", "method", "est_error"}
    assert abs(a["value_re"] - b["value_re"]) < 1e-8 * abs(a["value_re"])
    assert abs(a["value_re"] - whittaker_psi([1, 0], [0.2, -0.1]).real) < 1e-14


def test_whittaker_length_mismatch(capsys):
    code, _, _ = run(capsys, "whittaker", "eval", "--n", "3", "--x", "1,0")
    assert code == 2


def test_rmt_csv(capsys, tmp_path):
    out = tmp_path / "ev.csv"
    code, _, _ = run(capsys, "rmt", "sample", "--n", "3", "--reps", "4", "--seed", "2", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda_1,lambda_2,lambda_3"
    vals = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert vals.shape == (4, 3) and np.all(np.diff(vals, axis=1) <= 0)


def test_threads_do_not_change_output(capsys):
    _, a, _ = run(capsys, "rmt", "sample", "--n", "3", "--reps", "3", "--threads", "1")
    _, b, _ = run(capsys, "rmt", "sample", "--n", "3", "--reps", "3", "--threads", "4")
    assert a == b


def test_transform_roundtrip(capsys, tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("t,x1,x2\n0,0,0\n0.5,0.3,-0.1\n1,0.2,0.4\n")
    code, out, _ = run(capsys, "transform", "t", "--input", str(path), "--pattern")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,T_1_1,T_2_1,T_2_2" and len(lines) == 4


def test_transform_log_partition_header(capsys):
    code, out, _ = run(capsys, "transform", "log-partition", "--n", "3", "--dt", "0.25")
    assert code == 0 and out.splitlines()[0] == "t,logZ_1,logZ_2,logZ_3"


@pytest.mark.parametrize("kind", ["toda-z", "toda-s"])
def test_simulate_triangular(capsys, kind):
    code, out, _ = run(capsys, "simulate", kind, "--nu", "0.1,0", "--dt", "0.01", "--t", "0.1")
    assert code == 0
    assert out.splitlines()[0] == "t,T_1_1,T_2_1,T_2_2"
    assert len(out.splitlines()) == 12


def test_simulate_whittaker_reps(capsys):
    code, out, _ = run(capsys, "simulate", "whittaker-n2", "--nu", "0.2,0", "--x0", "0.3,-0.2",
                       "--reps", "3", "--dt", "0.01")
    assert code == 0 and out.splitlines()[0] == "x1,x2" and len(out.splitlines()) == 4


def test_simulate_requires_nu(capsys):
    code, _, _ = run(capsys, "simulate", "toda-z")
    assert code == 2


def test_numeric_error_exit(capsys):
    # toda-z started far from equilibrium with a coarse step overflows the guard
    code, _, err = run(capsys, "simulate", "toda-z", "--nu", "0,0,0", "--m-entrance", "60", "--dt", "0.5",
                       "--t", "1")
    assert code == 3 and "numeric" in err


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--s", "1", "--t", "1", "--n", "1", "--json")
    assert code == 0
    assert abs(json.loads(out)[0]["value"] - 0.38175646475548958) < 1e-12


def test_config_file_under_explicit_flags(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nseed = 7\nreps = 2\n")
    code, out, _ = run(capsys, "--config", str(cfg), "--print-config", "rmt", "sample", "--reps", "5")
    assert code == 0
    assert "seed=7" in out.splitlines() and "reps=5" in out.splitlines()
    _, a, _ = run(capsys, "rmt", "sample", "--config", str(cfg))
    _, b, _ = run(capsys, "rmt", "sample", "--seed", "7", "--reps", "2")
    assert a == b


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    code, _, _ = run(capsys, "rmt", "sample", "--config", str(cfg))
    assert code == 2
