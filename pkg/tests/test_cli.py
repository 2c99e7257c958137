import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from rfcw.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main


def run(capsys, tmp_path, command, config=None, *extra):
    argv = [command]
    if config is not None:
        path = tmp_path / "job.json"
        path.write_text(config if isinstance(config, str) else json.dumps(config, indent=1))
        argv += ["--config", str(path)]
    code = main(argv + list(extra))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_rate_curve_paramagnetic(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "rate-curve",
                       {"model": {"variant": "constant", "h": 0.0}, "beta": 0.5})
    assert code == EXIT_OK
    data = rows(out)
    assert list(data[0]) == ["x", "I", "G", "f_star"]
    assert len(data) == 211
    zeros = [float(r["x"]) for r in data if float(r["I"]) <= 1e-12]
    assert zeros == [0.0]
    assert data[0]["I"] == "inf" and data[-1]["f_star"] == "inf"


def test_rate_curve_two_symmetric_zeros(capsys, tmp_path):
    # grid x_k = -1.05 + 0.01 k contains the minimizers only approximately;
    # check the two smallest values sit symmetrically and well below the rest
    code, out, _ = run(capsys, tmp_path, "rate-curve",
                       {"model": {"variant": "dichotomous", "h": 0.3}, "beta": 3.0})
    assert code == EXIT_OK
    xs = np.array([float(r["x"]) for r in rows(out)])
    vals = np.array([float(r["I"]) for r in rows(out)])
    order = np.argsort(vals)
    a, b = xs[order[0]], xs[order[1]]
    assert a == pytest.approx(-b, abs=1e-12) and abs(a) > 0.5
    assert vals[order[0]] < 1e-3 and vals[np.argmin(np.abs(xs))] > 0.1


def test_rate_curve_strong_field_single_zero(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "rate-curve",
                       {"model": {"variant": "dichotomous", "h": 1.0}, "beta": 3.0})
    data = rows(out)
    xs = np.array([float(r["x"]) for r in data])
    vals = np.array([float(r["I"]) for r in data])
    assert xs[np.argmin(vals)] == pytest.approx(0.0, abs=1e-12)
    assert np.sum(vals < 1e-3) == 1


def test_rate_curve_deterministic(capsys, tmp_path):
    cfg = {"model": {"variant": "uniform", "h": 0.7}, "beta": 1.3, "x_points": 31}
    _, a, _ = run(capsys, tmp_path, "rate-curve", cfg)
    _, b, _ = run(capsys, tmp_path, "rate-curve", cfg)
    assert a == b


def test_rate_curve_overrides(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "rate-curve",
                       {"model": {"variant": "dichotomous", "h": 1.0}, "beta": 3.0, "x_points": 3},
                       "--beta", "0.5", "--h", "0.0")
    assert code == EXIT_OK
    assert float(rows(out)[1]["I"]) == 0.0


def test_phase_scan_strong_field(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "phase-scan",
                       {"family": "dichotomous", "beta_range": [0.5, 8.0], "beta_points": 6,
                        "h_range": [0.5, 1.5], "h_points": 3})
    assert code == EXIT_OK
    data = rows(out)
    assert out.splitlines()[0] == "beta,h,phase,n_minima,m_values,k_values,lambda_values"
    assert len(data) == 18
    assert {r["phase"] for r in data} == {"Paramagnetic"}


def test_phase_scan_uniform_json(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "phase-scan",
                       {"family": "uniform", "beta_range": [0.5, 4.0], "beta_points": 5,
                        "h_range": [0.2, 0.8], "h_points": 3, "format": "json"})
    assert code == EXIT_OK
    data = json.loads(out)
    crit = [d for d in data if d["critical"]]
    assert len(crit) == 3
    assert all(d["phase"] != "FirstOrder" for d in data)


def test_phase_scan_empty_range(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, "phase-scan",
                       '{\n "family": "dichotomous",\n "beta_range": [2.0, 1.0],\n "h_range": [0, 1]\n}')
    assert code == EXIT_CONFIG
    assert "job.json:3: beta_range" in err


@pytest.mark.parametrize("text, line, key", [
    ('{\n "beta": -1\n}', 2, "beta"),
    ('{\n "model": {"variant": "uniform", "h": 0.5},\n "beta": 1,\n "colour": 3\n}', 4, "colour"),
    ('{\n "model": {"variant": "table", "values": [1], "probs": [0.5]}\n}', 2, "model"),
    ('{\n "beta": 1,,\n}', 2, None),
])
def test_config_errors_name_the_line(capsys, tmp_path, text, line, key):
    code, _, err = run(capsys, tmp_path, "rate-curve", text)
    assert code == EXIT_CONFIG
    assert f"job.json:{line}:" in err
    if key:
        assert key in err


def test_missing_required_key(capsys, tmp_path):
    code, _, err = run(capsys, tmp_path, "rate-curve", {"beta": 1.0})
    assert code == EXIT_CONFIG and "model" in err


def test_verify_default_passes(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "verify")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "n,seed,set_lo,set_hi,empirical_rate,theory_rate,deviation"
    assert len(out.splitlines()) == 31


def test_verify_wrong_theory_is_rejected(capsys, tmp_path, caplog):
    code, _, _ = run(capsys, tmp_path, "verify",
                       {"model": {"variant": "constant", "h": 0.0}, "beta": 0.5, "theory_beta": 0.9})
    assert code == EXIT_VIOLATION
    assert "exceeds budget" in caplog.text


def test_verify_single_size_warns(capsys, tmp_path, caplog):
    code, _, _ = run(capsys, tmp_path, "verify",
                       {"model": {"variant": "dichotomous", "h": 1.0}, "beta": 0.6, "n_list": [100]})
    assert "fewer than three" in caplog.text
    assert code in (EXIT_OK, EXIT_VIOLATION)


def test_fields_markov_matches_table(capsys, tmp_path):
    base = {"beta": 0.9, "n_list": [50], "seeds": [0, 1], "x_values": [-1.0, 0.0, 0.5, 2.0]}
    markov = {"variant": "markov", "states": [-1.0, 1.0], "transition": [[0.9, 0.1], [0.3, 0.7]]}
    table = {"variant": "table", "values": [-1.0, 1.0], "probs": [0.75, 0.25]}
    _, a, _ = run(capsys, tmp_path, "fields", {**base, "model": markov})
    _, b, _ = run(capsys, tmp_path, "fields", {**base, "model": table})
    la = [float(r["f_limit"]) for r in rows(a)]
    lb = [float(r["f_limit"]) for r in rows(b)]
    assert len(la) == 8 and np.max(np.abs(np.array(la) - lb)) <= 1e-12
    assert list(rows(a)[0]) == ["n", "seed", "x", "f_n", "f_limit", "abs_deviation"]


def test_fields_rotation_matches_uniform(capsys, tmp_path):
    base = {"beta": 1.4, "n_list": [30], "seeds": [5], "x_values": [-0.5, 0.0, 0.3, 1.5]}
    _, a, _ = run(capsys, tmp_path, "fields", {**base, "model": {"variant": "rotation", "h": 0.8}})
    _, b, _ = run(capsys, tmp_path, "fields", {**base, "model": {"variant": "uniform", "h": 0.8}})
    la = np.array([float(r["f_limit"]) for r in rows(a)])
    lb = np.array([float(r["f_limit"]) for r in rows(b)])
    assert np.max(np.abs(la - lb)) <= 1e-10


def test_out_option_and_single_seed(capsys, tmp_path):
    dest = tmp_path / "f.csv"
    code, out, _ = run(capsys, tmp_path, "fields",
                       {"model": {"variant": "uniform", "h": 0.5}, "beta": 1.0, "n_list": [10, 20]},
                       "--seed", "4", "--out", str(dest))
    assert code == EXIT_OK and out == ""
    data = rows(dest.read_text())
    assert {r["seed"] for r in data} == {"4"} and len(data) == 14


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"variant": "constant", "h": 0.2}, "beta": 1.0,
                               "x_points": 5}))
    proc = subprocess.run([sys.executable, "-m", "rfcw.cli", "rate-curve", "--config", str(cfg)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "x,I,G,f_star"
