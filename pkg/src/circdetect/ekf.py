"""Extended Kalman filter baseline on the phase (I/II) or phase-frequency (III) state.

Continuous-discrete form: each increment is turned into the pseudo
measurement ``y = dz/dt`` with variance ``R = sigma0/dt`` and observation
model ``cos(theta)``. The uniform initial phase is replaced by a Gaussian
surrogate with mean 0 and variance ``pi**2/3``.

States broadcast over leading batch axes: ``mean`` is ``(..., d)`` and
``cov`` is ``(..., d, d)`` with ``d = 1`` or ``2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Scenario, ScenarioConfig
from .errors import DataError, NumericalFailure, UsageError
from .records import write_csv

PRIOR_PHASE_VAR = np.pi**2 / 3


@dataclass(frozen=True)
class EkfState:
    mean: np.ndarray
    cov: np.ndarray
    t: float = 0.0

    @property
    def phase(self):
        return self.mean[..., 0]

    @property
    def h_hat(self):
        return np.cos(self.mean[..., 0])

    @property
    def signal(self):
        return np.exp(1j * self.mean[..., 0])


def _wrap(theta):
    return (theta + np.pi) % (2 * np.pi) - np.pi


def ekf_init(cfg: ScenarioConfig, batch_shape=()) -> EkfState:
    batch_shape = tuple(batch_shape)
    if cfg.scenario is Scenario.III:
        mean = np.zeros(batch_shape + (2,))
        mean[..., 1] = cfg.w0
        cov = np.zeros(batch_shape + (2, 2))
        cov[..., 0, 0] = PRIOR_PHASE_VAR
    else:
        mean = np.zeros(batch_shape + (1,))
        cov = np.full(batch_shape + (1, 1), PRIOR_PHASE_VAR)
    return EkfState(mean, cov, 0.0)


def _transition(cfg, d, dt):
    if d == 1:
        return np.eye(1), np.array([[cfg.q_theta]]) * dt
    if d == 2:
        return np.array([[1.0, dt], [0.0, 1.0]]), np.diag([cfg.q_theta, cfg.q_w]) * dt
    raise UsageError(f"EKF state dimension must be 1 or 2 (got {d})")


def ekf_predict(s: EkfState, cfg: ScenarioConfig, dt: float | None = None) -> EkfState:
    dt = cfg.dt if dt is None else dt
    d = s.mean.shape[-1]
    F, Qdt = _transition(cfg, d, dt)
    mean = s.mean.copy()
    if d == 1:
        mean[..., 0] += (0.0 if cfg.scenario is Scenario.I else cfg.w0) * dt
    else:
        mean[..., 0] += mean[..., 1] * dt
    cov = F @ s.cov @ F.T + Qdt
    return EkfState(mean, cov, s.t + dt)


def _check_psd(cov, step):
    diag = np.diagonal(cov, axis1=-2, axis2=-1)
    scale = np.maximum(diag.max(axis=-1), 1e-300)
    ok = np.all(diag >= -1e-12 * scale[..., None], axis=-1)
    if cov.shape[-1] == 2:
        det = cov[..., 0, 0] * cov[..., 1, 1] - cov[..., 0, 1] * cov[..., 1, 0]
        ok &= det >= -1e-12 * scale**2
    if not np.all(ok):
        raise NumericalFailure("EKF covariance lost positive semidefiniteness", step=step)


def ekf_update(s: EkfState, dz, cfg: ScenarioConfig, dt: float | None = None,
               step: int | None = None) -> EkfState:
    dt = cfg.dt if dt is None else dt
    dz = np.asarray(dz, dtype=float)
    if not np.all(np.isfinite(dz)):
        raise DataError(f"non-finite measurement increment at step {step}")
    d = s.mean.shape[-1]
    theta = s.mean[..., 0]
    H = np.zeros(s.mean.shape)
    H[..., 0] = -np.sin(theta)
    R = cfg.sigma0 / dt
    PH = np.einsum("...ij,...j->...i", s.cov, H)
    S = np.einsum("...i,...i->...", H, PH) + R
    K = PH / S[..., None]
    mean = s.mean + K * (dz / dt - np.cos(theta))[..., None]
    mean[..., 0] = _wrap(mean[..., 0])
    cov = s.cov - K[..., :, None] * PH[..., None, :]
    cov = 0.5 * (cov + np.swapaxes(cov, -1, -2))
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise NumericalFailure("EKF state became non-finite", step=step)
    _check_psd(cov, step)
    return EkfState(mean, cov, s.t)


def ekf_step(s: EkfState, dz, cfg: ScenarioConfig, dt: float | None = None,
             step: int | None = None) -> EkfState:
    """Predict over ``dt`` then update with ``dz``."""
    return ekf_update(ekf_predict(s, cfg, dt), dz, cfg, dt, step)


def ekf_signal_estimate(s: EkfState):
    """Unit-modulus signal estimate ``exp(i*theta_hat)``."""
    return np.exp(1j * s.mean[..., 0])


@dataclass(frozen=True)
class EkfRun:
    t: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    h_hat: np.ndarray

    def __len__(self):
        return self.h_hat.shape[0]

    @property
    def signal(self) -> np.ndarray:
        return np.exp(1j * self.mean[..., 0])


def run_ekf(meas, cfg: ScenarioConfig) -> EkfRun:
    dz = np.asarray(meas.dz)
    L = dz.shape[0]
    s = ekf_init(cfg, dz.shape[1:])
    mean = np.empty((L + 1,) + s.mean.shape)
    cov = np.empty((L + 1,) + s.cov.shape)
    h_hat = np.empty((L,) + s.mean.shape[:-1])
    mean[0], cov[0] = s.mean, s.cov
    for k in range(L):
        pred = ekf_predict(s, cfg)
        h_hat[k] = pred.h_hat
        s = ekf_update(pred, dz[k], cfg, step=k)
        mean[k + 1], cov[k + 1] = s.mean, s.cov
    return EkfRun(cfg.dt * np.arange(L + 1), mean, cov, h_hat)


def write_ekf_trace_csv(path, run: EkfRun, cfg: ScenarioConfig, meta=None):
    """Same schema as the moment-filter trace, with ``re_x1 = cos``, ``im_x1 = sin``."""
    L = len(run)
    info = {"config": cfg.to_dict(), "estimator": "EKF"}
    info.update(meta or {})
    th = run.mean[1:, 0]
    return write_csv(path, ["k", "t", "re_x1", "im_x1", "h_hat", "max_mod"],
                     [np.arange(L), run.t[1:], np.cos(th), np.sin(th), run.h_hat,
                      np.ones(L)], info)
