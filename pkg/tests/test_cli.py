import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rmlist.cli import check_config, list_recipes, load_config, main, recipe_path
from rmlist.code import code_params, encode
from rmlist.soft import ChannelModel, posteriors, transmit


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(out):
    return dict(line.split("=", 1) for line in out.splitlines() if "=" in line)


def write_vector(path, y):
    path.write_text(" ".join(format(v, ".17g") for v in y) + "\n")
    return str(path)


# --- info / encode ----------------------------------------------------------

def test_info(capsys):
    code, out, _ = run(capsys, "info", "--m", "8", "--r", "3")
    assert code == 0 and "n=256 k=93 d=32" in out
    assert len(out.splitlines()) == 2 + 56
    code, out, _ = run(capsys, "info", "--m", "9", "--r", "3", "--prune", "29")
    assert code == 0 and "k_sub=101" in out


@pytest.mark.parametrize("argv", [["info", "--m", "3", "--r", "5"], ["info", "--m", "0", "--r", "0"],
                                  ["info", "--m", "4", "--r", "2", "--prune", "11"], ["info", "--m", "3"],
                                  ["bogus"]])
def test_info_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err.splitlines()[-1])["error"] == "usage"


def test_encode_and_errors(capsys):
    code, out, _ = run(capsys, "encode", "--m", "2", "--r", "1", "--info", "011")
    assert code == 0
    spec = code_params(2, 1)
    assert [int(v) for v in out.split()] == list(encode(spec, None, np.array([0, 1, 1], np.uint8)))
    assert run(capsys, "encode", "--m", "2", "--r", "1", "--info", "01")[0] == 2
    assert run(capsys, "encode", "--m", "2", "--r", "1", "--info", "0a1")[0] == 2


# --- decode -----------------------------------------------------------------

def test_codeword_round_trip(capsys, tmp_path):
    spec = code_params(4, 2)
    a = np.random.default_rng(3).integers(0, 2, spec.k, dtype=np.uint8)
    bits = "".join(map(str, a))
    _, out, _ = run(capsys, "encode", "--m", "4", "--r", "2", "--info", bits)
    path = tmp_path / "c.txt"
    path.write_text(out)
    for dec in ("basic", "list", "perm"):
        code, out, _ = run(capsys, "decode", "--m", "4", "--r", "2", "--decoder", dec, str(path))
        f = fields(out)
        assert code == 0 and f["info_bits"] == bits
        assert int(f["info_hex"], 16) == int(bits, 2)
        assert abs(float(f["log_cost"])) < 1e-9 and int(f["flops"]) > 0


def test_list_of_one_is_basic(capsys, tmp_path):
    spec = code_params(6, 3)
    rng = np.random.default_rng(4)
    for i in range(5):
        path = write_vector(tmp_path / f"y{i}.txt", rng.uniform(-1, 1, spec.n))
        _, a, _ = run(capsys, "decode", "--m", "6", "--r", "3", "--decoder", "basic", path)
        _, b, _ = run(capsys, "decode", "--m", "6", "--r", "3", "--decoder", "list", "--L", "1", path)
        # same decision; flop totals differ because list bookkeeping is counted
        fa, fb = fields(a), fields(b)
        assert fa["info_hex"] == fb["info_hex"]
        assert float(fa["log_cost"]) == pytest.approx(float(fb["log_cost"]), abs=1e-12)


def test_exhaustive_list_equals_bruteforce(capsys, tmp_path):
    spec = code_params(4, 2)
    rng = np.random.default_rng(5)
    ch = ChannelModel.awgn(1.0)
    for i in range(10):
        y = posteriors(transmit(encode(spec, None, rng.integers(0, 2, spec.k)), ch, rng), ch)
        path = write_vector(tmp_path / f"y{i}.txt", y)
        _, a, _ = run(capsys, "decode", "--m", "4", "--r", "2", "--L", "2048", "--branch", "0", path)
        _, b, _ = run(capsys, "ml-bruteforce", "--m", "4", "--r", "2", path)
        fa, fb = fields(a), fields(b)
        assert fa["info_bits"] == fb["info_bits"]
        assert float(fa["log_cost"]) == pytest.approx(float(fb["log_cost"]), abs=1e-9)


def test_decode_accepts_commas_and_stdin(capsys, tmp_path, monkeypatch):
    y = np.linspace(-0.9, 0.9, 8)
    p = tmp_path / "y.csv"
    p.write_text(",".join(map(str, y)))
    _, a, _ = run(capsys, "decode", "--m", "3", "--r", "1", str(p))
    monkeypatch.setattr(sys, "stdin", io.StringIO(" ".join(map(str, y))))
    _, b, _ = run(capsys, "decode", "--m", "3", "--r", "1", "-")
    assert a == b and "info_hex" in a


@pytest.mark.parametrize("content", ["0.1 0.2 abc 0.4 0.1 0.1 0.1 0.1", "0.1 0.2", "1.5 0 0 0 0 0 0 0",
                                     "nan 0 0 0 0 0 0 0"])
def test_decode_rejects_bad_input(capsys, tmp_path, content):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    code, _, err = run(capsys, "decode", "--m", "3", "--r", "1", str(p))
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_decode_missing_file_is_runtime_error(capsys, tmp_path):
    code, _, err = run(capsys, "decode", "--m", "3", "--r", "1", str(tmp_path / "none.txt"))
    assert code == 1 and json.loads(err)["error"] == "runtime"


def test_perm_decode_rejects_subcode(capsys, tmp_path):
    path = write_vector(tmp_path / "y.txt", np.zeros(16))
    code, _, _ = run(capsys, "decode", "--m", "4", "--r", "2", "--prune", "2", "--decoder", "perm", path)
    assert code == 2


# --- simulate ---------------------------------------------------------------

SIM = ["simulate", "--m", "5", "--r", "2", "--L", "4", "--snr", "1", "2", "--min-errors", "20",
       "--max-trials", "2000", "--batch-size", "128"]


def test_simulate_same_seed_identical_csv(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *SIM, "--seed", "7", "--out", str(a))[0] == 0
    assert run(capsys, *SIM, "--seed", "7", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    run(capsys, *SIM, "--seed", "8", "--out", str(b))
    assert a.read_bytes() != b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "snr_db,trials,errors,wer,ci_low,ci_high,ml_lb_wer,mean_flops" and len(lines) == 3


def test_simulate_manifest(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, *SIM, "--seed", "3", "--format", "json", "--out", str(out))
    assert code == 0 and str(out) in stdout
    man = json.loads((tmp_path / "r.json.manifest.json").read_text())
    assert man["seed"] == 3 and man["outputs"] == [str(out)] and man["version"]
    assert man["config"]["decoder"]["L"] == 4 and man["started"] <= man["finished"]
    data = json.loads(out.read_text())
    assert data["config"] == man["config"] and len(data["points"]) == 2


def test_simulate_to_stdout(capsys):
    code, out, _ = run(capsys, "simulate", "--m", "3", "--r", "1", "--snr-range", "1:2:0.5", "--max-trials", "100")
    assert code == 0
    assert [l.split(",")[0] for l in out.splitlines()[1:]] == ["1", "1.5", "2"]


def test_simulate_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[code]\nm = 4\nr = 2\n[decoder]\nkind = "list"\nL = [1, 2]\n'
                   '[channel]\nsnr_range = [1.0, 2.0, 1.0]\n[run]\nseed = 2\nmax_trials = 300\n'
                   '[output]\nout = "%s"\n' % (tmp_path / "s.csv"))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    assert (tmp_path / "s_L1.csv").exists() and (tmp_path / "s_L2.csv").exists()
    assert (tmp_path / "s_L2.csv.manifest.json").exists()
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--L", "3", "--out", str(tmp_path / "t.csv"))
    assert code == 0 and (tmp_path / "t.csv").exists()


def test_simulate_unknown_key_named(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[code]\nm = 4\nr = 2\n[run]\nsed = 3\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--snr", "1")
    assert code == 2 and "run.sed" in json.loads(err)["message"]
    cfg.write_text("[codes]\nm = 4\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--snr", "1")
    assert code == 2 and "'codes'" in err


@pytest.mark.parametrize("extra", [[], ["--snr", "1", "--snr-range", "1:2:1"], ["--snr-range", "2:1:1"],
                                   ["--snr-range", "1-2"], ["--snr", "1", "--decoder", "perm", "--prune", "2"],
                                   ["--snr", "1", "--format", "xml"], ["--snr", "1", "--L", "0"]])
def test_simulate_usage_errors(capsys, extra):
    code, _, _ = run(capsys, "simulate", "--m", "4", "--r", "2", *extra)
    assert code == 2


def test_simulate_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--m", "3", "--r", "1", "--snr", "1", "--max-trials", "10",
                       "--out", str(tmp_path / "no" / "x.csv"))
    assert code == 1 and "x.csv" in err


# --- recipes ----------------------------------------------------------------

def test_recipes_are_valid(capsys):
    names = list_recipes()
    assert {"table1_rm72", "fig2_rm83", "table2_rm93_sub101"} <= set(names)
    for name in names:
        cfg = load_config(recipe_path(name))
        assert check_config(cfg) is cfg
        assert "m" in cfg["code"] and "r" in cfg["code"]
    assert load_config(recipe_path("fig2_rm83"))["decoder"]["L"] == [1, 4, 16, 64, 256, 1024]
    code, out, _ = run(capsys, "recipes")
    assert code == 0 and out.split() == names
    assert run(capsys, "simulate", "--recipe", "nope")[0] == 2


def test_recipe_with_overrides(capsys):
    code, out, _ = run(capsys, "simulate", "--recipe", "table1_rm72", "--snr", "6", "--max-trials", "256")
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert row[0] == "6" and row[1] == "256"


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "rmlist.cli", "info", "--m", "7", "--r", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "n=128 k=29 d=32" in res.stdout
    res = subprocess.run([sys.executable, "-m", "rmlist.cli", "info", "--m", "3", "--r", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and json.loads(res.stderr)["error"] == "usage"
