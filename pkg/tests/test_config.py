import math

import pytest

from circdetect import ConfigurationError, Scenario, ScenarioConfig


def test_defaults_are_table_values():
    cfg = ScenarioConfig()
    assert cfg.scenario is Scenario.II
    assert (cfg.dt, cfg.steps, cfg.n_harmonics, cfg.m_powers) == (0.1, 10_000, 12, 4)
    assert cfg.q_w == 1e-8 and cfg.w0 == 0.012
    assert cfg.duration == pytest.approx(1000.0)


def test_snr_of_table_noise_level():
    # sigma0 = 10, dt = 0.1 -> SNR = 0.1
    assert ScenarioConfig(sigma0=10.0).snr == pytest.approx(0.1, rel=1e-15)


@pytest.mark.parametrize("snr, sigma0", [(0.1, 10.0), (0.0816, 0.1 / 0.0816**2), (0.0577, 0.1 / 0.0577**2)])
def test_with_snr_back_solves_sigma0(snr, sigma0):
    cfg = ScenarioConfig().with_snr(snr)
    assert cfg.sigma0 == pytest.approx(sigma0, rel=1e-12)
    assert cfg.snr == pytest.approx(snr, rel=1e-12)


@pytest.mark.parametrize("field, value, needle", [
    ("q_theta", -1.0, "q_theta >= 0"),
    ("q_w", -1e-9, "q_w >= 0"),
    ("sigma0", 0.0, "sigma0 > 0"),
    ("dt", -0.1, "dt > 0"),
    ("steps", 0, "steps >= 1"),
    ("n_harmonics", 1, "n_harmonics >= 2"),
    ("sigma0", math.nan, "sigma0 must be finite"),
])
def test_validation_names_the_bound(field, value, needle):
    with pytest.raises(ConfigurationError, match=needle):
        ScenarioConfig(**{field: value})


def test_scenario_three_needs_two_frequency_powers():
    with pytest.raises(ConfigurationError, match="m_powers"):
        ScenarioConfig(scenario="III", m_powers=1)
    # the bound only applies to scenario III
    ScenarioConfig(scenario="II", m_powers=1)


def test_scenario_one_has_no_drift():
    with pytest.raises(ConfigurationError, match="w0 must be 0"):
        ScenarioConfig(scenario="I", w0=0.012)
    assert ScenarioConfig(scenario="I", w0=0.0).w0 == 0.0


@pytest.mark.parametrize("raw, expected", [("ii", Scenario.II), ("3", Scenario.III), (Scenario.I, Scenario.I)])
def test_scenario_parse(raw, expected):
    assert Scenario.parse(raw) is expected


def test_scenario_parse_rejects_garbage():
    with pytest.raises(ConfigurationError):
        Scenario.parse("iv")
