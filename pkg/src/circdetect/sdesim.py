"""Euler-Maruyama simulation of circle-valued signals and their measurements.

The phase is stored unwrapped. Because the phase drift and diffusion do not
depend on the phase itself, the Euler-Maruyama recursion is exact in law.

Each purpose (initial phase, phase noise, frequency noise, measurement
noise) draws from its own counter-based Philox stream keyed by
``(seed, tag)``, so e.g. the H0 and H1 measurements of one seed share the
same noise samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Hypothesis, Scenario, ScenarioConfig
from .errors import UsageError
from .records import write_csv

STREAM_TAGS = {"init": 0, "phase": 1, "freq": 2, "meas": 3, "oracle": 4}


def substream(seed: int, tag: str) -> np.random.Generator:
    """Independent generator for one purpose of one seed."""
    ss = np.random.SeedSequence([int(seed), STREAM_TAGS[tag]])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SignalPath:
    """Phase and frequency samples at ``t_k = k*dt``, ``k = 0..steps``."""

    theta: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        if self.theta.shape != self.omega.shape:
            raise UsageError("theta and omega must have the same length")

    @property
    def signal(self) -> np.ndarray:
        """Complex signal ``exp(i*theta)``."""
        return np.exp(1j * self.theta)

    def wrapped(self) -> np.ndarray:
        """Phase reduced to ``[-pi, pi)``."""
        return (self.theta + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True)
class MeasurementPath:
    """Measurement increments ``dz[k] = Z(t_{k+1}) - Z(t_k)``.

    ``dz`` has shape ``(steps,)`` for one path or ``(steps, batch)`` for a
    stack of independent paths sharing the same grid.
    """

    dz: np.ndarray
    dt: float
    hypothesis: Hypothesis = Hypothesis.H1

    @property
    def steps(self) -> int:
        return self.dz.shape[0]


def simulate_signal(cfg: ScenarioConfig, seed: int | None = None) -> SignalPath:
    """Draw one phase/frequency trajectory for ``cfg.scenario``.

    Uses ``cfg.seed`` unless ``seed`` is given.
    """
    seed = cfg.seed if seed is None else seed
    dt, L = cfg.dt, cfg.steps
    phi0 = substream(seed, "init").uniform(0.0, 2 * np.pi)
    xi = substream(seed, "phase").standard_normal(L)

    if cfg.scenario is Scenario.I:
        omega = np.zeros(L + 1)
    elif cfg.scenario is Scenario.II:
        omega = np.full(L + 1, cfg.w0)
    else:
        eta = substream(seed, "freq").standard_normal(L)
        omega = np.empty(L + 1)
        omega[0] = cfg.w0
        omega[1:] = cfg.w0 + np.cumsum(np.sqrt(cfg.q_w * dt) * eta)

    theta = np.empty(L + 1)
    theta[0] = phi0
    theta[1:] = phi0 + np.cumsum(omega[:-1] * dt + np.sqrt(cfg.q_theta * dt) * xi)
    return SignalPath(theta=theta, omega=omega)


def simulate_measurements(path: SignalPath | None, cfg: ScenarioConfig,
                          hypothesis=Hypothesis.H1, seed: int | None = None) -> MeasurementPath:
    """Measurement increments under H0 (noise only) or H1 (``cos(theta)*dt`` plus noise)."""
    hypothesis = Hypothesis.parse(hypothesis)
    if hypothesis is Hypothesis.H1 and path is None:
        raise UsageError("H1 measurements need a signal path")
    if hypothesis is Hypothesis.H0 and path is not None:
        raise UsageError("H0 measurements take no signal path (pass path=None)")
    seed = cfg.seed if seed is None else seed
    noise = np.sqrt(cfg.sigma0 * cfg.dt) * substream(seed, "meas").standard_normal(cfg.steps)
    if hypothesis is Hypothesis.H0:
        return MeasurementPath(dz=noise, dt=cfg.dt, hypothesis=hypothesis)
    if path.theta.shape[0] != cfg.steps + 1:
        raise UsageError(f"signal path has {path.theta.shape[0]} samples, expected {cfg.steps + 1}")
    dz = np.cos(path.theta[:-1]) * cfg.dt + noise
    return MeasurementPath(dz=dz, dt=cfg.dt, hypothesis=hypothesis)


def simulate(cfg: ScenarioConfig, hypothesis=Hypothesis.H1, seed: int | None = None):
    """Convenience wrapper returning ``(signal, measurements)``.

    Under H0 the signal is still drawn (it is simply not observed), which
    keeps the per-seed streams aligned between hypotheses.
    """
    hypothesis = Hypothesis.parse(hypothesis)
    signal = simulate_signal(cfg, seed)
    meas = simulate_measurements(signal if hypothesis is Hypothesis.H1 else None,
                                 cfg, hypothesis, seed)
    return signal, meas


def write_path_csv(path, signal: SignalPath, meas: MeasurementPath, cfg: ScenarioConfig,
                   meta=None):
    """Dump ``k,t,theta,omega,dz`` with one row per step."""
    L = meas.steps
    k = np.arange(L)
    info = {"config": cfg.to_dict(), "hypothesis": meas.hypothesis.value}
    info.update(meta or {})
    return write_csv(path, ["k", "t", "theta", "omega", "dz"],
                     [k, k * cfg.dt, signal.theta[:L], signal.omega[:L], meas.dz], info)
