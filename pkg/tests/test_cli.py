import json

import numpy as np
import pytest

from steklovlab.cli import main


def run_cli(args):
    return main(args)


def read_rows(path, n_cols):
    """Data rows (comment lines stripped) as lists of strings."""
    rows = []
    for ln in path.read_text().splitlines():
        if ln.startswith("#") or not ln:
            continue
        cells = ln.split(",")
        if len(cells) == n_cols and not any(c.strip('"').isalpha() for c in cells[:1]):
            rows.append(cells)
    return rows


def test_forward_flat_ball(tmp_path):
    out = tmp_path / "forward.csv"
    code = run_cli(["forward", "--d", "3", "--delta", "0", "--K", "3",
                    "--base", "zero", "--x-max", "12", "--output", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# command = forward")
    rows = [r for r in read_rows(out, 3) if r[0] != "k"]
    sig = np.array([float(r[2]) for r in rows])
    assert np.allclose(sig, [0.0, 1.0, 2.0, 3.0], atol=1e-8)


def test_perturb_reports_resonance(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "command": "perturb", "d": 3, "delta": 0.5, "K": 8,
        "base": {"kind": "zero"}, "coeffs": {"values": [-1.5]},
    }))
    out = tmp_path / "perturb.csv"
    assert run_cli(["--config", str(cfg), "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    i = lines.index("# resonances: index,location")
    assert lines[i + 1] == "0,-0.5"


def test_reconstruct_single_resonance_well(tmp_path):
    out = tmp_path / "rec.csv"
    code = run_cli(["reconstruct", "--d", "3", "--delta", "0.5", "--T", "2",
                    "--M", "64", "--base", "bargmann1", "--beta", "1",
                    "--gamma", "0.5", "--output", str(out)])
    assert code == 0
    rows = [r for r in read_rows(out, 2) if r[0] != "x"]
    q0 = float(rows[0][1])
    assert q0 == pytest.approx(-1.5, abs=1e-4)


def test_muntz_table_and_residual(tmp_path):
    out = tmp_path / "muntz.csv"
    assert run_cli(["muntz", "--d", "3", "--delta", "0", "--n", "6",
                    "--output", str(out)]) == 0
    resid = [ln for ln in out.read_text().splitlines()
             if ln.startswith("# gram_residual")]
    assert len(resid) == 1
    assert float(resid[0].split("=")[1]) <= 1e-8


def test_sweep_verdict(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run_cli(["sweep", "--d", "3", "--delta", "0.5", "--T", "2",
                    "--K", "64", "--M", "64", "--base", "zero",
                    "--tail-a", "1.0", "--tail-rho", str(1.0 / 9.0),
                    "--scales", "1e-1,1e-2,1e-3,1e-4", "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert any(ln.startswith("# verdict = PASS") for ln in lines)
    data = [ln for ln in lines if not ln.startswith("#")][1:]
    assert len(data) == 4


def test_ks_check_report(tmp_path):
    out = tmp_path / "ks.csv"
    assert run_cli(["ks-check", "--d", "3", "--delta", "1", "--K", "8",
                    "--base", "zero", "--coeffs", "-1.0",
                    "--output", str(out)]) == 0
    vals = {}
    for ln in out.read_text().splitlines():
        if ln.startswith("#") or "," not in ln:
            continue
        cells = ln.split(",")
        if len(cells) == 3 and cells[0] != "check":
            vals[(cells[0], cells[1])] = cells[2]
    assert float(vals[("positivity", "min_density")]) >= 0.0
    assert vals[("positivity", "passed")] == "1"
    assert abs(float(vals[("quasi_szego", "decay_exponent")]) + 2.0) <= 0.1
    assert abs(float(vals[("normalization", "maximal_exponent")]) + 1.0) <= 0.15


def test_byte_identical_reruns(tmp_path):
    out = tmp_path / "a.csv"
    args = ["perturb", "--d", "3", "--delta", "1", "--K", "8", "--base", "zero",
            "--coeffs=-0.5,-0.1", "--seed", "7", "--output", str(out)]
    assert run_cli(args) == 0
    first = out.read_bytes()
    assert run_cli(args) == 0
    assert out.read_bytes() == first


def test_config_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "muntz", "d": 3, "delta": 0.0, "n": 3}))
    out = tmp_path / "m.csv"
    assert run_cli(["--config", str(cfg), "--n", "2", "--output", str(out)]) == 0
    assert "# n = 2" in out.read_text()


def test_validation_failures_exit_2(tmp_path, capsys):
    assert run_cli(["forward", "--d", "3", "--delta", "-1"]) == 2
    assert "radial_model" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:  # argparse rejects unknown commands
        run_cli(["frobnicate"])
    assert exc.value.code == 2
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"command": "muntz", "frobnicate": 1}))
    assert run_cli(["--config", str(cfg)]) == 2
    assert run_cli(["perturb", "--base", "zero", "--coeffs", "0.5"]) == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    # every scale of a positive-coefficient family is rejected: < 3 records
    with pytest.warns(UserWarning):
        code = run_cli(["sweep", "--d", "3", "--delta", "0.5", "--K", "16",
                        "--M", "32", "--base", "zero", "--coeffs", "1.0",
                        "--scales", "1e-1,1e-2,1e-3,1e-4",
                        "--output", str(tmp_path / "x.csv")])
    assert code == 3
    assert "stability_harness" in capsys.readouterr().err


def test_unwritable_output_exits_2(tmp_path):
    assert run_cli(["muntz", "--n", "2", "--output",
                    str(tmp_path / "no" / "such" / "dir.csv")]) == 2
