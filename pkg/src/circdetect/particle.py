"""Bootstrap particle filter used only as an independent test oracle.

Particles carry the phase and, for scenario III, the centred frequency
``nu = w - w0``. They are propagated with the same Euler-Maruyama transition
as the simulator, weighted by the Gaussian likelihood of each increment
(log domain, max-subtracted) and resampled systematically when the effective
sample size falls below half the particle count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Scenario, ScenarioConfig
from .errors import OracleFailure, UsageError
from .records import write_csv
from .sdesim import substream

MIN_PARTICLES = 1000


@dataclass
class ParticleEnsemble:
    thetas: np.ndarray
    nus: np.ndarray | None
    weights: np.ndarray

    def estimate(self) -> complex:
        """Weighted mean of ``exp(i*theta)``."""
        return complex(np.sum(self.weights * np.exp(1j * self.thetas)))

    def ess(self) -> float:
        return 1.0 / float(np.sum(self.weights**2))


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices drawn by systematic resampling (one uniform draw)."""
    n = weights.shape[0]
    positions = (rng.uniform() + np.arange(n)) / n
    idx = np.searchsorted(np.cumsum(weights), positions, side="right")
    return np.minimum(idx, n - 1)


@dataclass(frozen=True)
class PfRun:
    """``estimates[k]`` is the posterior mean of ``exp(i*theta)`` at ``t_k``."""

    t: np.ndarray
    estimates: np.ndarray
    ess: np.ndarray
    resampled: np.ndarray


def pf_init(cfg: ScenarioConfig, n_particles: int, rng: np.random.Generator) -> ParticleEnsemble:
    if n_particles < MIN_PARTICLES:
        raise UsageError(f"the oracle needs at least {MIN_PARTICLES} particles (got {n_particles})")
    thetas = rng.uniform(0.0, 2 * np.pi, n_particles)
    nus = np.zeros(n_particles) if cfg.scenario is Scenario.III else None
    return ParticleEnsemble(thetas, nus, np.full(n_particles, 1.0 / n_particles))


def pf_run(meas, cfg: ScenarioConfig, n_particles: int = 10_000,
           seed: int | None = None) -> PfRun:
    """Run the oracle over every increment of a single measurement path."""
    dz = np.asarray(meas.dz, dtype=float)
    if dz.ndim != 1:
        raise UsageError("the particle oracle filters one path at a time")
    seed = cfg.seed if seed is None else seed
    rng = substream(seed, "oracle")
    ens = pf_init(cfg, n_particles, rng)
    dt, L, n = cfg.dt, dz.shape[0], n_particles
    w0 = 0.0 if cfg.scenario is Scenario.I else cfg.w0
    sq_theta, sq_w = np.sqrt(cfg.q_theta * dt), np.sqrt(cfg.q_w * dt)
    inv_2var = 1.0 / (2.0 * cfg.sigma0 * dt)

    estimates = np.empty(L + 1, dtype=complex)
    ess = np.empty(L + 1)
    resampled = np.zeros(L, dtype=bool)
    estimates[0], ess[0] = ens.estimate(), ens.ess()
    logw = np.log(ens.weights)
    for k in range(L):
        if ens.nus is None:
            ens.thetas += w0 * dt + sq_theta * rng.standard_normal(n)
        else:
            ens.thetas += (w0 + ens.nus) * dt + sq_theta * rng.standard_normal(n)
            ens.nus += sq_w * rng.standard_normal(n)
        resid = dz[k] - np.cos(ens.thetas) * dt
        logw = logw - resid * resid * inv_2var
        logw -= logw.max()
        w = np.exp(logw)
        total = w.sum()
        if not (np.isfinite(total) and total > 0):
            raise OracleFailure("particle weights collapsed", step=k, seed=seed)
        ens.weights = w / total
        estimates[k + 1], ess[k + 1] = ens.estimate(), ens.ess()
        if ess[k + 1] < n / 2:
            idx = systematic_resample(ens.weights, rng)
            ens.thetas = ens.thetas[idx]
            if ens.nus is not None:
                ens.nus = ens.nus[idx]
            ens.weights = np.full(n, 1.0 / n)
            resampled[k] = True
        logw = np.log(ens.weights)
    return PfRun(dt * np.arange(L + 1), estimates, ess, resampled)


def write_estimates_csv(path, run: PfRun, cfg: ScenarioConfig, meta=None):
    info = {"config": cfg.to_dict(), "estimator": "particle"}
    info.update(meta or {})
    e = run.estimates
    return write_csv(path, ["k", "t", "re_x1", "im_x1", "ess"],
                     [np.arange(e.shape[0]), run.t, e.real, e.imag, run.ess], info)
