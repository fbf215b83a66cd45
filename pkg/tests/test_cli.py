import json

import numpy as np
import pytest

from circdetect import ConfigurationError
from circdetect.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main, parse_config
from circdetect.records import read_csv


def _write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_empty_file_gives_defaults(tmp_path):
    exp = parse_config(_write(tmp_path, ""))
    cfg = exp.scenario_config()
    assert cfg.scenario.value == "II" and cfg.w0 == 0.012
    assert (cfg.dt, cfg.n_harmonics, cfg.m_powers, cfg.q_w, cfg.steps) == (0.1, 12, 4, 1e-8, 10_000)


def test_bound_violation_names_field(tmp_path):
    with pytest.raises(ConfigurationError, match=r"q_theta >= 0"):
        parse_config(_write(tmp_path, "q_theta = -1\n"))


def test_snr_back_solves_sigma0():
    cfg = parse_config(overrides={"snr": "0.1"}).scenario_config()
    assert cfg.sigma0 == pytest.approx(10.0, rel=1e-12)


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match="q_thetta"):
        parse_config(_write(tmp_path, "q_thetta = 0.1\n"))


def test_parse_error_has_line_info(tmp_path):
    with pytest.raises(ConfigurationError, match="line 2"):
        parse_config(_write(tmp_path, "steps = 10\nq_theta = = 1\n"))


def test_nested_tables_rejected(tmp_path):
    with pytest.raises(ConfigurationError, match="nested"):
        parse_config(_write(tmp_path, "[filter]\nsteps = 3\n"))


def test_overrides_win_and_units(tmp_path):
    exp = parse_config(_write(tmp_path, "steps = 50\nw0 = 0.5\nw0_unit = 'hz'\n"),
                       {"steps": "70", "estimator": "ec,ekf"})
    assert exp.steps == 70 and exp.estimator == ("EC", "EKF")
    assert exp.scenario_config().w0 == pytest.approx(np.pi)


def test_scenario_one_defaults_to_zero_drift():
    assert parse_config(overrides={"scenario": "i"}).scenario_config().w0 == 0.0


def test_output_dir_environment_default(monkeypatch, tmp_path):
    monkeypatch.setenv("CIRCDETECT_OUTPUT_DIR", str(tmp_path))
    assert parse_config().output_dir == str(tmp_path)
    assert parse_config(overrides={"output_dir": "x"}).output_dir == "x"


def _run(tmp_path, *args):
    return main(list(args) + ["--output-dir", str(tmp_path), "--steps", "200"])


def test_filter_twice_is_byte_identical(tmp_path):
    out = tmp_path / "trace_II_EC_seed7.csv"
    assert _run(tmp_path, "filter", "--estimator", "ec", "--seed", "7") == EXIT_OK
    first = out.read_bytes()
    assert _run(tmp_path, "filter", "--estimator", "ec", "--seed", "7") == EXIT_OK
    assert out.read_bytes() == first
    meta, _ = read_csv(out)
    assert meta["config"]["seed"] == 7


@pytest.mark.parametrize("extra", [["--scenario", "iii"], ["--estimator", "ekf"],
                                   ["--scenario", "iii", "--estimator", "ekf"]])
def test_filter_variants(tmp_path, extra):
    assert _run(tmp_path, "filter", *extra) == EXIT_OK
    assert len(list(tmp_path.glob("trace_*.csv"))) == 1


def test_simulate_then_filter_from_file(tmp_path, capsys):
    assert _run(tmp_path, "simulate", "--seed", "3") == EXIT_OK
    path = capsys.readouterr().out.strip()
    assert _run(tmp_path, "detect", "--input", path) == EXIT_OK
    from_file = float(capsys.readouterr().out.strip())
    assert _run(tmp_path, "detect", "--seed", "3") == EXIT_OK
    direct = float(capsys.readouterr().out.strip())
    assert from_file == direct


def test_simulate_h0(tmp_path):
    assert _run(tmp_path, "simulate", "--hypothesis", "H0") == EXIT_OK
    _, cols = read_csv(next(tmp_path.glob("path_II_H0_*.csv")))
    assert cols["dz"].size == 200


def test_detect_prints_loglik(tmp_path, capsys):
    assert _run(tmp_path, "detect", "--seed", "1") == EXIT_OK
    value = float(capsys.readouterr().out.strip())
    _, cols = read_csv(next(tmp_path.glob("detect_*.csv")))
    assert cols["loglik"][0] == value


def test_roc_three_snrs(tmp_path):
    code = _run(tmp_path, "roc", "--scenario", "ii", "--snr", "0.1,0.0816,0.0577",
                "--n-trials-h0", "5", "--n-trials-h1", "5")
    assert code == EXIT_OK
    rocs = sorted(p for p in tmp_path.glob("roc_*.csv") if not p.name.endswith("_trials.csv"))
    assert len(rocs) == 3
    for p in rocs:
        meta, cols = read_csv(p)
        assert list(cols) == ["threshold", "pf", "pd", "pf_hw", "pd_hw"]
        assert "config" in meta
    manifest = json.loads(next(tmp_path.glob("*_manifest.json")).read_text())
    assert manifest["n_trials_h0"] == 5


def test_track(tmp_path, capsys):
    assert _run(tmp_path, "track", "--n-runs", "3", "--estimator", "EC,EKF") == EXIT_OK
    _, cols = read_csv(next(tmp_path.glob("tracking_*.csv")))
    assert list(cols["estimator"]) == ["EC"] * 3 + ["EKF"] * 3


def test_oracle_compare(tmp_path):
    assert _run(tmp_path, "oracle-compare", "--np", "1000", "--snr", "0.3") == EXIT_OK
    _, cols = read_csv(next(tmp_path.glob("oracle_*.csv")))
    assert cols["abs_diff"].size == 201
    np.testing.assert_allclose(cols["abs_diff"], np.hypot(cols["moment_re"] - cols["particle_re"],
                                                          cols["moment_im"] - cols["particle_im"]))


def test_exit_codes(tmp_path, capsys):
    assert _run(tmp_path, "filter", "--q-theta", "-1") == EXIT_CONFIG
    assert _run(tmp_path, "filter", "--np", "10") == EXIT_CONFIG
    assert _run(tmp_path, "filter", "--sigma0", "1e-6") == EXIT_NUMERIC
    assert "replay seed 0" in capsys.readouterr().err
    assert _run(tmp_path, "filter", "--input", str(tmp_path / "missing.csv")) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["simulate", "--steps", "5", "--output-dir", str(blocker / "sub")]) == EXIT_IO


def test_module_entry_point():
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "circdetect", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "oracle-compare" in proc.stdout
