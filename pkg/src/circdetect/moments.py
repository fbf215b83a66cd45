"""Truncated circular-moment filter for phase models I and II.

The filter state is the vector of conditional circular moments
``x[n] = E[exp(i*n*theta) | Z]`` for ``n = 0..N-1``. Each harmonic is an
eigenfunction of the phase generator, so prediction is diagonal:

    dx[n]/dt = (i*n*w0 - q_theta*n**2/2) * x[n]

and because ``cos(theta) * exp(i*n*theta)`` is the average of the two
neighbouring harmonics, the innovation update closes on the same vector
except at ``n = N-1``, where ``x[N]`` is taken to be zero.

All functions accept states with arbitrary leading batch axes (shape
``(..., N)``) and broadcast the measurement increment over them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .config import Scenario, ScenarioConfig
from .errors import DataError, NumericalFailure, UsageError
from .records import write_csv

logger = logging.getLogger(__name__)

TOL_MOD = 1e-2


@dataclass(frozen=True)
class MomentVector:
    """Conditional circular moments ``x[..., n]`` at time ``t``."""

    x: np.ndarray
    t: float = 0.0

    @property
    def n_harmonics(self) -> int:
        return self.x.shape[-1]

    @property
    def signal(self):
        """Conditional mean of the complex signal, ``x[..., 1]``."""
        return self.x[..., 1]

    @property
    def h_hat(self):
        """Conditional mean of the measurement function ``cos(theta)``."""
        return self.x[..., 1].real

    def max_mod(self):
        return np.abs(self.x).max(axis=-1)


@dataclass(frozen=True)
class FilterStep:
    x_pred: MomentVector
    x_post: MomentVector
    h_hat: np.ndarray | float
    gain: np.ndarray


def init_moments(cfg: ScenarioConfig, batch_shape=()) -> MomentVector:
    """Moments of the uniform initial phase: ``[1, 0, ..., 0]``."""
    x = np.zeros(tuple(batch_shape) + (cfg.n_harmonics,), dtype=complex)
    x[..., 0] = 1.0
    return MomentVector(x, 0.0)


def generator_rates(cfg: ScenarioConfig, n_harmonics: int | None = None) -> np.ndarray:
    """Eigenvalues ``i*n*w0 - q_theta*n**2/2`` of the phase generator."""
    n = np.arange(cfg.n_harmonics if n_harmonics is None else n_harmonics)
    w0 = 0.0 if cfg.scenario is Scenario.I else cfg.w0
    return 1j * n * w0 - 0.5 * cfg.q_theta * n**2


def _check_scenario(cfg):
    if cfg.scenario is Scenario.III:
        raise UsageError("scenario III has a random frequency; use circdetect.lattice instead")


def prediction_factors(cfg: ScenarioConfig, dt: float | None = None,
                       propagator: str = "euler", n_harmonics: int | None = None) -> np.ndarray:
    """Per-harmonic multipliers applied by one prediction step.

    ``"euler"`` gives ``1 + rate*dt`` (explicit Euler, the default);
    ``"exact"`` gives ``exp(rate*dt)``, the exact flow of the generator.
    """
    dt = cfg.dt if dt is None else dt
    rates = generator_rates(cfg, n_harmonics)
    if propagator == "euler":
        factors = 1.0 + rates * dt
        if np.any(np.abs(factors) > 1.0 + 1e-3):
            logger.warning("explicit Euler prediction is unstable for harmonic(s) %s at dt=%g; "
                           "reduce dt or use propagator='exact'",
                           np.flatnonzero(np.abs(factors) > 1.0 + 1e-3).tolist(), dt)
        return factors
    if propagator == "exact":
        return np.exp(rates * dt)
    raise UsageError(f"unknown propagator {propagator!r} (expected 'euler' or 'exact')")


def predict(x: MomentVector, cfg: ScenarioConfig, dt: float | None = None,
            propagator: str = "euler", factors=None) -> MomentVector:
    """Advance the moments by ``dt`` under the phase generator (no data)."""
    _check_scenario(cfg)
    dt = cfg.dt if dt is None else dt
    if factors is None:
        factors = prediction_factors(cfg, dt, propagator, x.n_harmonics)
    return MomentVector(x.x * factors, x.t + dt)


def cross_moments(x: np.ndarray) -> np.ndarray:
    """``E[cos(theta) exp(i n theta)] = (x[n+1] + x[n-1]) / 2`` with closure.

    ``x[-1] = conj(x[1])`` holds exactly; ``x[N] = 0`` is the truncation.
    """
    lower = np.concatenate([np.conj(x[..., 1:2]), x[..., :-1]], axis=-1)
    upper = np.concatenate([x[..., 1:], np.zeros_like(x[..., :1])], axis=-1)
    return 0.5 * (upper + lower)


def clip_to_disk(x: np.ndarray) -> np.ndarray:
    """Radially project every moment onto the closed unit disk."""
    mod = np.abs(x)
    return np.where(mod > 1.0, x / np.where(mod > 1.0, mod, 1.0), x)


def update(x: MomentVector, dz, cfg: ScenarioConfig, dt: float | None = None,
           clip: bool = False, step: int | None = None) -> FilterStep:
    """Innovation update with the increment ``dz`` over an interval of length ``dt``.

    ``x`` is the predicted state; its ``h_hat`` is used in the innovation
    ``dz - h_hat*dt``.
    """
    dt = cfg.dt if dt is None else dt
    dz = np.asarray(dz, dtype=float)
    if not np.all(np.isfinite(dz)):
        raise DataError(f"non-finite measurement increment at step {step}")
    xp = x.x
    h = xp[..., 1].real
    gain = (cross_moments(xp) - xp * h[..., None]) / cfg.sigma0
    post = xp + gain * (dz - h * dt)[..., None]
    if clip:
        post[..., 1:] = clip_to_disk(post[..., 1:])
    if not np.all(np.isfinite(post)):
        raise NumericalFailure("moment state became non-finite", step=step)
    return FilterStep(x, MomentVector(post, x.t), h, gain)


@dataclass(frozen=True)
class FilterRun:
    """Per-step record of a filter pass.

    ``x_post[0]`` is the initial state; ``x_post[k + 1]`` is the state after
    the ``k``-th increment (time ``(k + 1) * dt``). ``x_pred[k]``, ``h_hat[k]``
    and ``gain[k]`` belong to step ``k``.
    """

    t: np.ndarray
    x_post: np.ndarray
    x_pred: np.ndarray
    h_hat: np.ndarray
    gain: np.ndarray
    mod_violations: int = 0

    def __len__(self):
        return self.h_hat.shape[0]

    def __getitem__(self, k) -> FilterStep:
        return FilterStep(MomentVector(self.x_pred[k], self.t[k + 1]),
                          MomentVector(self.x_post[k + 1], self.t[k + 1]),
                          self.h_hat[k], self.gain[k])

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    @property
    def final(self) -> MomentVector:
        return MomentVector(self.x_post[-1], self.t[-1])

    @property
    def signal(self) -> np.ndarray:
        """Signal estimates ``x[1]`` at ``t_0 .. t_L``."""
        return self.x_post[..., 1]

    def max_mod(self) -> np.ndarray:
        return np.abs(self.x_post).max(axis=-1)


def run_filter(meas, cfg: ScenarioConfig, clip: bool = False, propagator: str = "euler",
               tol_mod: float = TOL_MOD) -> FilterRun:
    """Alternate predict/update over every increment of ``meas``."""
    _check_scenario(cfg)
    if not np.isclose(meas.dt, cfg.dt, rtol=1e-12, atol=0):
        raise UsageError(f"measurement dt {meas.dt} does not match config dt {cfg.dt}")
    dz = np.asarray(meas.dz)
    L = dz.shape[0]
    state = init_moments(cfg, dz.shape[1:])
    factors = prediction_factors(cfg, cfg.dt, propagator)

    x_post = np.empty((L + 1,) + state.x.shape, dtype=complex)
    x_pred = np.empty((L,) + state.x.shape, dtype=complex)
    h_hat = np.empty((L,) + state.x.shape[:-1])
    gain = np.empty_like(x_pred)
    x_post[0] = state.x
    violations, first = 0, None
    for k in range(L):
        pred = predict(state, cfg, factors=factors)
        res = update(pred, dz[k], cfg, clip=clip, step=k)
        state = res.x_post
        x_pred[k], x_post[k + 1], h_hat[k], gain[k] = pred.x, state.x, res.h_hat, res.gain
        if np.any(np.abs(state.x) > 1.0 + tol_mod):
            violations += 1
            first = k if first is None else first
    if violations:
        logger.warning("moment modulus exceeded 1 + %g on %d of %d steps (first at step %d)",
                       tol_mod, violations, L, first)
    t = cfg.dt * np.arange(L + 1)
    return FilterRun(t, x_post, x_pred, h_hat, gain, violations)


def write_trace_csv(path, run: FilterRun, cfg: ScenarioConfig, meta=None):
    """Dump ``k,t,re_x1,im_x1,h_hat,max_mod``; row ``k`` holds the state after step ``k``."""
    L = len(run)
    info = {"config": cfg.to_dict(), "estimator": "EC"}
    info.update(meta or {})
    x1 = run.x_post[1:, 1]
    return write_csv(path, ["k", "t", "re_x1", "im_x1", "h_hat", "max_mod"],
                     [np.arange(L), run.t[1:], x1.real, x1.imag, run.h_hat,
                      run.max_mod()[1:]], info)
