import json
import subprocess
import sys

import numpy as np
import pytest

from bs_spectra import cli


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "bs_spectra", *args], capture_output=True,
                          text=True, cwd=cwd)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    cols = body[0].split(",")
    rows = [dict(zip(cols, r.split(","))) for r in body[1:]]
    return header, rows


@pytest.fixture
def delta_config(tmp_path):
    p = tmp_path / "delta.json"
    p.write_text(json.dumps({"point_masses": [[-2, 0]]}))
    return p


def test_spectrum_delta(tmp_path, delta_config):
    r = run_cli("spectrum", "--config", str(delta_config), "--out", str(tmp_path / "out"))
    assert r.returncode == 0, r.stderr
    header, rows = read_csv(tmp_path / "out" / "spectrum.csv")
    assert len(rows) == 1
    assert abs(float(rows[0]["energy"]) + 1) < 1e-5
    assert rows[0]["multiplicity"] == "1"
    assert any("xi=200" in h and "nodes=4096" in h for h in header)
    ef_header, ef = read_csv(tmp_path / "out" / "eigenfunctions.csv")
    x = np.array([float(r["x"]) for r in ef])
    f = np.array([float(r["f0_0_re"]) for r in ef])
    assert np.max(np.abs(f - np.exp(-np.abs(x)))) < 1e-4


def test_output_is_byte_identical(tmp_path, delta_config):
    for name in ("a", "b"):
        assert run_cli("spectrum", "--config", str(delta_config), "--out", str(tmp_path / name),
                       "--grid-panels", "64").returncode == 0
    for f in ("spectrum.csv", "eigenfunctions.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seventeen_digit_floats(tmp_path, delta_config):
    run_cli("spectrum", "--config", str(delta_config), "--out", str(tmp_path), "--grid-panels", "64")
    _, rows = read_csv(tmp_path / "spectrum.csv")
    e = rows[0]["energy"]
    assert float(e) == float("%.17g" % float(e))
    assert len(e.lstrip("-").replace(".", "").split("e")[0]) >= 15


def test_hs_check_ladder(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"potential": {"point_masses": [[-2, 0]]}, "kappas": [1, 2, 4]}))
    r = run_cli("hs-check", "--config", str(cfg), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    _, rows = read_csv(tmp_path / "hs_check.csv")
    np.testing.assert_allclose([float(r["hs_formula"]) for r in rows], [1.0, 0.5, 0.25], rtol=1e-14)
    np.testing.assert_allclose([float(r["hs_matrix"]) for r in rows], [1.0, 0.5, 0.25], rtol=1e-12)


def test_resolvent_check(tmp_path, delta_config):
    r = run_cli("resolvent-check", "--config", str(delta_config), "--out", str(tmp_path),
                "--grid-panels", "128")
    assert r.returncode == 0, r.stderr
    _, rows = read_csv(tmp_path / "resolvent_check.csv")
    vals = {row["metric"]: float(row["value"]) for row in rows}
    assert vals["identity_residual"] < 1e-8 and vals["recast_deviation"] < 1e-10
    _, sv = read_csv(tmp_path / "resolvent_svals.csv")
    assert float(sv[0]["sigma"]) == pytest.approx(0.125, rel=1e-6)


def test_counterexample_output():
    r = run_cli("counterexample", "--a", "4")
    assert r.returncode == 0
    assert "multiplicities: (1, 2, 1, 1)" in r.stdout
    assert "A_V(0) =" in r.stdout


def test_verify_passes(tmp_path):
    r = run_cli("verify", "--out", str(tmp_path))
    assert r.returncode == 0, r.stdout
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["failed"] == 0 and summary["total"] >= 30


# --- exit codes --------------------------------------------------------------------

@pytest.mark.parametrize("content", [
    "{not json",
    json.dumps({"point_masses": [[-2, 0]], "wells": 1}),
    json.dumps({"potential": {"point_masses": [[-2, 0]]}, "point_masses": []}),
    json.dumps({"point_masses": [[-2]]}),
    json.dumps({"point_masses": [[-2, 0]], "kmin": 3, "kmax": 1}),
    json.dumps({"point_masses": [[-2, 0]], "tol": 0}),
    json.dumps({"point_masses": [[-2, 0]], "grid": {"panels": 4096}}),
])
def test_config_errors_exit_2(tmp_path, content):
    p = tmp_path / "bad.json"
    p.write_text(content)
    r = run_cli("spectrum", "--config", str(p), "--out", str(tmp_path))
    assert r.returncode == 2, r.stderr
    assert "config error" in r.stderr


def test_missing_config_exit_2(tmp_path):
    assert run_cli("spectrum", "--config", str(tmp_path / "nope.json")).returncode == 2


def test_bad_seed_and_parameter_exit_2(delta_config):
    assert cli.main(["hs-check", "--config", str(delta_config), "--seed", "-1"]) == 2
    assert cli.main(["counterexample", "--a", "1"]) == 2


def test_near_pole_exit_3(tmp_path):
    p = tmp_path / "pole.json"
    p.write_text(json.dumps({"potential": {"point_masses": [[-2, 0]]}, "resolvent": {"z1": -1, "z2": -4}}))
    r = run_cli("resolvent-check", "--config", str(p), "--out", str(tmp_path), "--grid-panels", "64")
    assert r.returncode == 3
    assert "NearPole" in r.stderr


def test_unknown_command_is_argparse_error():
    assert run_cli("frobnicate").returncode == 2


# --- in-process --------------------------------------------------------------------

def test_flags_override_config(tmp_path):
    cfg = cli.config_from_dict({"point_masses": [[-2, 0]], "grid": {"xi": 50, "panels": 16}, "kmax": 5})
    assert (cfg.xi, cfg.panels, cfg.kmax) == (50.0, 16, 5.0)
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"point_masses": [[-2, 0]], "grid": {"xi": 50, "panels": 16}}))
    assert cli.main(["spectrum", "--config", str(p), "--grid-panels", "32", "--out", str(tmp_path)]) == 0
    assert "panels=32" in (tmp_path / "spectrum.csv").read_text()


def test_complex_z_in_config():
    cfg = cli.config_from_dict({"resolvent": {"z1": [-1, 2], "z2": "-3-1j"}})
    assert cfg.z1 == -1 + 2j and cfg.z2 == -3 - 1j


def test_write_csv_format(tmp_path):
    path = cli.write_csv(tmp_path / "t.csv", ["hello"], ["a", "b"], [(1, 0.1), (2, 1 / 3)])
    assert path.read_text() == "# hello\na,b\n1,0.10000000000000001\n2,0.33333333333333331\n"
