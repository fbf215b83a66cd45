"""Scenario parameters for the phase models and the measurement channel.

Default values follow the simulation table used throughout the package:
``dt = 0.1`` s, ``L = 10**4`` steps, highest circular harmonic 11
(``n_harmonics = 12``), highest frequency power 3 (``m_powers = 4``),
``q_w = 1e-8`` and ``w0 = 0.012``.
"""

from __future__ import annotations

import dataclasses
import enum
import math

from .errors import ConfigurationError


class Scenario(enum.Enum):
    """Phase model.

    I    pure phase diffusion
    II   phase diffusion plus a known constant frequency ``w0``
    III  phase diffusion plus a frequency that itself random-walks from ``w0``
    """

    I = "I"
    II = "II"
    III = "III"

    @classmethod
    def parse(cls, value) -> "Scenario":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"1": "I", "2": "II", "3": "III"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(
                f"scenario must be one of I, II, III (got {value!r})"
            ) from None


class Hypothesis(enum.Enum):
    H0 = "H0"
    H1 = "H1"

    @classmethod
    def parse(cls, value) -> "Hypothesis":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ConfigurationError(f"hypothesis must be H0 or H1 (got {value!r})") from None


def _check(cond, msg):
    if not cond:
        raise ConfigurationError(msg)


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    """Full parameter set of one simulated scenario.

    Parameters
    ----------
    scenario : Scenario
        Phase model (I, II or III).
    q_theta : float
        Phase-noise variance rate, rad^2/s.
    q_w : float
        Frequency-noise variance rate, (rad/s)^2/s. Only used by scenario III.
    w0 : float
        Initial (scenario III) or constant (scenario II) angular frequency in
        rad/s. Must be zero for scenario I.
    sigma0 : float
        Measurement-noise variance rate.
    dt : float
        Sampling interval, s.
    steps : int
        Number of measurement increments ``L``.
    n_harmonics : int
        Number of tracked circular moments ``N`` (harmonics ``0 .. N-1``).
    m_powers : int
        Number of tracked frequency powers ``M`` (scenario III only).
    seed : int
        Root seed of all random streams.
    """

    scenario: Scenario = Scenario.II
    q_theta: float = 0.1
    q_w: float = 1e-8
    w0: float = 0.012
    sigma0: float = 10.0
    dt: float = 0.1
    steps: int = 10_000
    n_harmonics: int = 12
    m_powers: int = 4
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        for name in ("q_theta", "q_w", "w0", "sigma0", "dt"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigurationError(f"{name} must be a real number (got {value!r})") from None
            _check(math.isfinite(value), f"{name} must be finite (got {value!r})")
            object.__setattr__(self, name, value)
        for name in ("steps", "n_harmonics", "m_powers", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ConfigurationError(f"{name} must be an integer (got {value!r})")
            object.__setattr__(self, name, int(value))

        _check(self.q_theta >= 0, f"q_theta must satisfy q_theta >= 0 (got {self.q_theta})")
        _check(self.q_w >= 0, f"q_w must satisfy q_w >= 0 (got {self.q_w})")
        _check(self.sigma0 > 0, f"sigma0 must satisfy sigma0 > 0 (got {self.sigma0})")
        _check(self.dt > 0, f"dt must satisfy dt > 0 (got {self.dt})")
        _check(self.steps >= 1, f"steps must satisfy steps >= 1 (got {self.steps})")
        _check(self.n_harmonics >= 2, f"n_harmonics must satisfy n_harmonics >= 2 (got {self.n_harmonics})")
        _check(0 <= self.seed < 2**64, f"seed must satisfy 0 <= seed < 2**64 (got {self.seed})")
        if self.scenario is Scenario.III:
            _check(self.m_powers >= 2,
                   f"m_powers must satisfy m_powers >= 2 for scenario III (got {self.m_powers})")
        if self.scenario is Scenario.I:
            _check(self.w0 == 0, f"w0 must be 0 for scenario I (got {self.w0})")

    @property
    def snr(self) -> float:
        """Per-sample amplitude-to-noise ratio ``sqrt(dt / sigma0)`` (unit amplitude)."""
        return math.sqrt(self.dt / self.sigma0)

    @property
    def duration(self) -> float:
        """Termination time ``T = steps * dt``."""
        return self.steps * self.dt

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def with_snr(self, snr: float) -> "ScenarioConfig":
        """Return a copy whose ``sigma0`` gives the requested SNR (``sigma0 = dt / snr**2``)."""
        _check(snr > 0 and math.isfinite(snr), f"snr must satisfy snr > 0 (got {snr})")
        return self.replace(sigma0=self.dt / snr**2)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenario"] = self.scenario.value
        return d
