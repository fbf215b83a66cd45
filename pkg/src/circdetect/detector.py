"""Estimator-correlator log-likelihood ratio and threshold decisions.

For an estimator with causal predicted measurement ``h_hat`` the discretised
log-likelihood ratio accumulates

    log_lambda += h_hat * dz - h_hat**2 * dt / 2

where ``h_hat`` must come from the estimator's predicted state, i.e. before
it has seen ``dz``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .config import Hypothesis, Scenario, ScenarioConfig
from .errors import ConfigurationError, DataError, NumericalFailure, UsageError
from . import ekf, lattice, moments


class Estimator(enum.Enum):
    EC = "EC"
    EKF = "EKF"

    @classmethod
    def parse(cls, value) -> "Estimator":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ConfigurationError(f"estimator must be EC or EKF (got {value!r})") from None


@dataclass(frozen=True)
class LogLikAccumulator:
    loglik: np.ndarray | float = 0.0
    steps_seen: int = 0


def loglik_step(acc: LogLikAccumulator, h_hat, dz, dt: float) -> LogLikAccumulator:
    h_hat = np.asarray(h_hat, dtype=float)
    dz = np.asarray(dz, dtype=float)
    if not (np.all(np.isfinite(h_hat)) and np.all(np.isfinite(dz)) and math.isfinite(dt)):
        raise DataError(f"non-finite input to the log-likelihood at step {acc.steps_seen}")
    inc = h_hat * dz - 0.5 * h_hat * h_hat * dt
    return LogLikAccumulator(acc.loglik + inc, acc.steps_seen + 1)


def accumulate(h_hat, dz, dt: float, acc: LogLikAccumulator | None = None) -> LogLikAccumulator:
    """Fold :func:`loglik_step` over aligned sequences of predictions and increments."""
    acc = LogLikAccumulator() if acc is None else acc
    for h, z in zip(h_hat, dz):
        acc = loglik_step(acc, h, z, dt)
    return acc


def decide(loglik: float, threshold: float) -> Hypothesis:
    """H1 iff ``loglik > threshold``; ties go to H0."""
    return Hypothesis.H1 if loglik > threshold else Hypothesis.H0


class EstimatorTracker:
    """Uniform predict / h_hat / update view over the three estimators."""

    def __init__(self, cfg, estimator, batch_shape, propagator="euler", clip=False):
        estimator = Estimator.parse(estimator)
        self.cfg = cfg
        self.estimator = estimator
        if estimator is Estimator.EKF:
            self.state = ekf.ekf_init(cfg, batch_shape)
            self._predict = lambda s: ekf.ekf_predict(s, cfg)
            self._update = lambda s, dz, k: ekf.ekf_update(s, dz, cfg, step=k)
        elif cfg.scenario is Scenario.III:
            op = lattice.prediction_operator(cfg, cfg.dt, propagator)
            self.state = lattice.init_lattice(cfg, batch_shape)
            self._predict = lambda s: lattice.predict_lattice(s, cfg, operator=op)
            self._update = lambda s, dz, k: lattice.update_lattice(
                s, dz, cfg, clip=clip, step=k).x_post
        else:
            fac = moments.prediction_factors(cfg, cfg.dt, propagator)
            self.state = moments.init_moments(cfg, batch_shape)
            self._predict = lambda s: moments.predict(s, cfg, factors=fac)
            self._update = lambda s, dz, k: moments.update(s, dz, cfg, clip=clip, step=k).x_post

    def predict(self):
        self.state = self._predict(self.state)
        return self.state.h_hat

    def update(self, dz, k):
        self.state = self._update(self.state, dz, k)

    @property
    def signal(self):
        """Current estimate of the complex signal."""
        return self.state.signal


def run_ec_detector(meas, cfg: ScenarioConfig, estimator=Estimator.EC,
                    propagator: str = "euler", clip: bool = False,
                    return_h_hat: bool = False):
    """Final ``log Lambda_T`` of ``meas`` under the chosen estimator.

    ``meas.dz`` may carry a trailing batch axis, in which case an array of
    log-likelihoods is returned. With ``return_h_hat`` the per-step causal
    predictions are returned as well.
    """
    estimator = Estimator.parse(estimator)
    if not np.isclose(meas.dt, cfg.dt, rtol=1e-12, atol=0):
        raise UsageError(f"measurement dt {meas.dt} does not match config dt {cfg.dt}")
    dz = np.asarray(meas.dz, dtype=float)
    tracker = EstimatorTracker(cfg, estimator, dz.shape[1:], propagator, clip)
    acc = LogLikAccumulator(np.zeros(dz.shape[1:]), 0)
    h_rec = np.empty(dz.shape) if return_h_hat else None
    for k in range(dz.shape[0]):
        h = tracker.predict()
        acc = loglik_step(acc, h, dz[k], cfg.dt)
        tracker.update(dz[k], k)
        if h_rec is not None:
            h_rec[k] = h
    loglik = acc.loglik
    if not np.all(np.isfinite(loglik)):
        raise NumericalFailure("log-likelihood became non-finite", step=dz.shape[0] - 1)
    if np.ndim(loglik) == 0:
        loglik = float(loglik)
    return (loglik, h_rec) if return_h_hat else loglik
