import numpy as np
import pytest

from circdetect import (Hypothesis, ScenarioConfig, SignalPath, UsageError, simulate,
                        simulate_measurements, simulate_signal)
from circdetect.records import read_csv
from circdetect.sdesim import write_path_csv


def test_zero_noise_drift_is_deterministic():
    cfg = ScenarioConfig(scenario="II", q_theta=0.0, w0=0.012, dt=0.1, steps=10, seed=3)
    path = simulate_signal(cfg)
    k = np.arange(11)
    np.testing.assert_allclose(path.theta, path.theta[0] + 0.012 * 0.1 * k, rtol=0, atol=1e-15)
    assert 0 <= path.theta[0] < 2 * np.pi
    np.testing.assert_array_equal(path.omega, 0.012)


def test_brownian_phase_variance():
    # Var(theta_L - theta_0) = q_theta * T = 0.01 * 1000 = 10
    cfg = ScenarioConfig(scenario="I", q_theta=0.01, w0=0.0, dt=0.1, steps=10_000)
    inc = np.empty(1000)
    for seed in range(1000):
        th = simulate_signal(cfg, seed).theta
        inc[seed] = th[-1] - th[0]
    var = inc.var(ddof=1)
    se = 10.0 * np.sqrt(2.0 / (inc.size - 1))
    assert abs(var - 10.0) <= 3 * se


def test_circular_mean_decay():
    # E[exp(i(theta_t - theta_0))] = exp(-q t / 2)
    q, n_runs = 0.01, 1000
    cfg = ScenarioConfig(scenario="I", q_theta=q, w0=0.0, dt=0.1, steps=10_000)
    half = cfg.steps // 2
    z = np.empty((n_runs, 2), dtype=complex)
    for seed in range(n_runs):
        th = simulate_signal(cfg, seed).theta
        z[seed] = np.exp(1j * (th[[half, -1]] - th[0]))
    for col, t in enumerate((half * cfg.dt, cfg.duration)):
        expected = np.exp(-q * t / 2)
        mean = z[:, col].mean()
        se = np.sqrt(np.var(z[:, col].real, ddof=1) / n_runs)
        assert abs(mean.real - expected) <= 3 * se
        assert abs(mean.imag) <= 3 * np.sqrt(np.var(z[:, col].imag, ddof=1) / n_runs)


def test_degenerate_frequency_noise_reduces_to_scenario_two():
    base = dict(q_theta=0.1, w0=0.012, steps=500, seed=11)
    p3 = simulate_signal(ScenarioConfig(scenario="III", q_w=0.0, **base))
    p2 = simulate_signal(ScenarioConfig(scenario="II", **base))
    np.testing.assert_array_equal(p3.omega, 0.012)
    np.testing.assert_array_equal(p3.theta, p2.theta)


def test_scenario_three_frequency_walk_variance():
    cfg = ScenarioConfig(scenario="III", q_w=1e-4, steps=1000)
    end = np.array([simulate_signal(cfg, s).omega[-1] for s in range(1000)]) - cfg.w0
    # Var = q_w * T = 1e-4 * 100 = 1e-2
    se = 1e-2 * np.sqrt(2 / 999)
    assert abs(end.var(ddof=1) - 1e-2) <= 3 * se


def test_pure_noise_increment_moments():
    cfg = ScenarioConfig(sigma0=10.0, dt=0.1, steps=10_000, seed=5)
    dz = simulate_measurements(None, cfg, "H0").dz
    n = dz.size
    assert abs(dz.mean()) <= 3 * np.sqrt(1.0 / n)
    assert abs(dz.var(ddof=1) - 1.0) <= 3 * np.sqrt(2.0 / (n - 1))


def test_noise_free_cosine_of_zero_phase():
    cfg = ScenarioConfig(sigma0=1e-12, steps=100)
    path = SignalPath(np.zeros(101), np.zeros(101))
    dz = simulate_measurements(path, cfg, "H1").dz
    np.testing.assert_allclose(dz, 0.1, atol=1e-5)


def test_h1_minus_h0_is_the_signal():
    cfg = ScenarioConfig(steps=2000, seed=21)
    path = simulate_signal(cfg)
    h1 = simulate_measurements(path, cfg, Hypothesis.H1).dz
    h0 = simulate_measurements(None, cfg, Hypothesis.H0).dz
    np.testing.assert_allclose(h1 - h0, np.cos(path.theta[:-1]) * cfg.dt, rtol=0, atol=1e-15)


def test_seed_fixes_every_bit():
    cfg = ScenarioConfig(scenario="III", q_w=1e-6, steps=300, seed=99)
    a, b = simulate(cfg), simulate(cfg)
    np.testing.assert_array_equal(a[0].theta, b[0].theta)
    np.testing.assert_array_equal(a[0].omega, b[0].omega)
    np.testing.assert_array_equal(a[1].dz, b[1].dz)
    c = simulate(cfg.replace(seed=100))
    assert not np.array_equal(a[1].dz, c[1].dz)


def test_lengths():
    cfg = ScenarioConfig(steps=17)
    sig, meas = simulate(cfg)
    assert sig.theta.shape == sig.omega.shape == (18,)
    assert meas.dz.shape == (17,) and meas.dt == cfg.dt


def test_hypothesis_path_mismatch():
    cfg = ScenarioConfig(steps=10)
    with pytest.raises(UsageError):
        simulate_measurements(None, cfg, "H1")
    with pytest.raises(UsageError):
        simulate_measurements(simulate_signal(cfg), cfg, "H0")


def test_wrapped_readout_only():
    cfg = ScenarioConfig(q_theta=1.0, steps=2000, seed=1)
    sig = simulate_signal(cfg)
    assert np.ptp(sig.theta) > 2 * np.pi  # stored unwrapped
    w = sig.wrapped()
    assert np.all((w >= -np.pi) & (w < np.pi))
    np.testing.assert_allclose(np.exp(1j * w), sig.signal, atol=1e-12)


def test_path_csv_round_trip(tmp_path):
    cfg = ScenarioConfig(steps=50, seed=4)
    sig, meas = simulate(cfg)
    out = write_path_csv(tmp_path / "p.csv", sig, meas, cfg)
    assert out.read_text().splitlines()[1] == "k,t,theta,omega,dz"
    meta, cols = read_csv(out)
    assert meta["config"]["seed"] == 4
    np.testing.assert_array_equal(cols["theta"], sig.theta[:50])
    np.testing.assert_array_equal(cols["dz"], meas.dz)
    again = write_path_csv(tmp_path / "q.csv", *simulate(cfg), cfg)
    assert again.read_bytes() == out.read_bytes()
