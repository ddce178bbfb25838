"""Command-line surface: exit codes, file layout, and output contents.

Every scenario file shipped under configs/ gets exercised here at least
once, so a stale config breaks the build rather than the first user.
"""

import json
import subprocess
import sys

import pytest


def _read_csv(path):
    lines = path.read_text(encoding="ascii").splitlines()
    header = lines[0].split(",")
    rows = [ln for ln in lines[1:] if not ln.startswith("#")]
    markers = [ln for ln in lines[1:] if ln.startswith("#")]
    table = [dict(zip(header, (float(v) for v in ln.split(","))))
             for ln in rows]
    return header, table, markers


# ---------------------------------------------------------------------------
# simulate


def test_simulate_piston_outputs(run_cli, configs_dir, tmp_path):
    code, out, err = run_cli("simulate",
                             "--config", str(configs_dir / "piston.toml"),
                             "--out", str(tmp_path))
    assert code == 0
    assert err == ""

    csv_path = tmp_path / "piston.csv"
    summary_path = tmp_path / "piston_summary.json"
    assert csv_path.exists() and summary_path.exists()

    header, table, markers = _read_csv(csv_path)
    assert markers == []
    assert header[0] == "t"
    for col in ("H", "S_total", "dSdt", "T"):
        assert col in header

    # initial row carries the hand-checked reference point: unit mass,
    # p = 3, internal energy 2 at unit volume
    first = table[0]
    assert first["t"] == 0.0
    assert first["H"] == 6.5
    assert first["dSdt"] == 4.5
    assert first["T"] == 2.0

    summary = json.loads(summary_path.read_text())
    assert summary["status"] == "ok"
    assert summary["system"] == "piston"
    assert summary["csv"] == "piston.csv"
    assert summary["steps"] == len(table) - 1
    assert summary["final"]["t"] == pytest.approx(summary["t_final"])
    # friction only ever feeds the reservoir
    assert table[-1]["S_total"] > table[0]["S_total"]
    assert abs(table[-1]["H"] - 6.5) < 1e-8 * 6.5


def test_simulate_is_deterministic(run_cli, configs_dir, tmp_path):
    for sub in ("a", "b"):
        code, _, _ = run_cli("simulate",
                             "--config", str(configs_dir / "piston.toml"),
                             "--out", str(tmp_path / sub))
        assert code == 0
    assert ((tmp_path / "a" / "piston.csv").read_bytes()
            == (tmp_path / "b" / "piston.csv").read_bytes())
    assert ((tmp_path / "a" / "piston_summary.json").read_bytes()
            == (tmp_path / "b" / "piston_summary.json").read_bytes())


def test_simulate_rigid_body_and_fluid_smoke(run_cli, configs_dir, tmp_path):
    for name, prefix in (("rigid_body.toml", "rigid_body"),
                         ("fluid1d.toml", "fluid1d")):
        code, _, err = run_cli("simulate",
                               "--config", str(configs_dir / name),
                               "--out", str(tmp_path))
        assert code == 0, err
        summary = json.loads(
            (tmp_path / (prefix + "_summary.json")).read_text())
        assert summary["status"] == "ok"
        _, table, _ = _read_csv(tmp_path / (prefix + ".csv"))
        assert table[-1]["S_total"] >= table[0]["S_total"]


def test_simulate_truncates_on_domain_violation(run_cli, tmp_path):
    # a step this coarse jumps the piston straight through the wall;
    # the run must stop, keep the prefix of the trajectory, and say why
    cfg = tmp_path / "crash.toml"
    cfg.write_text(
        "[system]\n"
        'kind = "piston"\n'
        "mass = 1.0\n"
        "lambda = 1.0\n"
        "[state]\n"
        "q = [0.2]\n"
        "p = [-3.0]\n"
        "S = 0.0\n"
        "[integrator]\n"
        'method = "rk4"\n'
        "dt = 0.5\n"
        "t_final = 5.0\n"
        "[output]\n"
        'prefix = "crash"\n')
    code, _, err = run_cli("simulate", "--config", str(cfg),
                           "--out", str(tmp_path))
    assert code == 2
    assert "domain violation" in err

    _, table, markers = _read_csv(tmp_path / "crash.csv")
    assert len(markers) == 1 and markers[0].startswith("# truncated at step ")
    assert len(table) >= 1
    summary = json.loads((tmp_path / "crash_summary.json").read_text())
    assert summary["status"] == "truncated"
    assert "message" in summary


def test_simulate_config_errors_exit_1_without_output(run_cli, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("this = is not [ toml\n")
    out_dir = tmp_path / "out"
    code, _, err = run_cli("simulate", "--config", str(bad),
                           "--out", str(out_dir))
    assert code == 1
    assert err.startswith("metriplectic: config error:")
    assert not out_dir.exists()

    code, _, err = run_cli("simulate",
                           "--config", str(tmp_path / "missing.toml"),
                           "--out", str(out_dir))
    assert code == 1
    assert err.startswith("metriplectic: config error:")
    assert not out_dir.exists()


def test_usage_errors_exit_2(run_cli):
    assert run_cli("simulate")[0] == 2
    assert run_cli("frobnicate")[0] == 2
    assert run_cli("verify", "--system", "piston",
                   "--suite", "no_such_suite")[0] == 2


# ---------------------------------------------------------------------------
# verify


def test_verify_prints_report_json(run_cli):
    code, out, err = run_cli("verify", "--system", "piston",
                             "--suite", "kn_agreement", "-n", "5")
    assert code == 0
    assert err == ""
    report = json.loads(out)
    assert report["suite"] == "kn_agreement"
    assert report["cases"] == 5
    assert report["pass"] is True
    assert all(v >= 0.0 for v in report["violations"].values())


def test_verify_spec_file_negative_control(run_cli, configs_dir):
    code, out, err = run_cli("verify",
                             "--spec", str(configs_dir / "bad_lambda.toml"),
                             "--suite", "conservation", "-n", "10")
    assert code == 1
    report = json.loads(out)
    assert report["pass"] is False
    assert report["violations"]["entropy_rate_floor"] > 1.0


def test_verify_rejects_unsupported_pairs(run_cli):
    code, _, err = run_cli("verify", "--system", "two_pistons",
                           "--suite", "kn_agreement")
    assert code == 2
    assert err.startswith("metriplectic: config error:")


def test_verify_seed_changes_report(run_cli):
    _, out_a, _ = run_cli("verify", "--system", "chemical",
                          "--suite", "equivalence", "-n", "6", "--seed", "1")
    _, out_b, _ = run_cli("verify", "--system", "chemical",
                          "--suite", "equivalence", "-n", "6", "--seed", "2")
    assert json.loads(out_a)["seed"] == 1
    assert out_a != out_b


# ---------------------------------------------------------------------------
# compare


def test_compare_writes_both_engines_and_divergence(run_cli, configs_dir,
                                                    tmp_path):
    code, out, _ = run_cli("compare",
                           "--config", str(configs_dir / "chemical.toml"),
                           "--out", str(tmp_path))
    assert code == 0
    for name in ("chemical_euler_lagrange.csv", "chemical_bracket.csv",
                 "chemical_divergence.json"):
        assert (tmp_path / name).exists()

    payload = json.loads(out)
    report = json.loads((tmp_path / "chemical_divergence.json").read_text())
    assert payload == report
    assert report["pass"] is True
    assert report["max_divergence"] <= report["tolerance"]

    _, el, _ = _read_csv(tmp_path / "chemical_euler_lagrange.csv")
    _, br, _ = _read_csv(tmp_path / "chemical_bracket.csv")
    assert len(el) == len(br) == report["steps"] + 1


# ---------------------------------------------------------------------------
# the installed entry point


def test_module_invocation_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "metriplectic", "verify", "--system", "piston",
         "--suite", "kn_agreement", "-n", "3"],
        capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["pass"] is True
