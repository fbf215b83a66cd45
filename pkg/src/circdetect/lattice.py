"""Augmented moment filter for phase model III (random-walk frequency).

The state is the lattice ``x[m, n] = E[nu**m exp(i*n*theta) | Z]`` with the
centred frequency ``nu = w - w0``, ``m = 0..M-1`` and ``n = 0..N-1``. On
this lattice the generator is a fixed linear operator:

    L x[m, n] = q_w*m*(m-1)/2 * x[m-2, n] + i*n*w0 * x[m, n]
                + i*n * x[m+1, n] - q_theta*n**2/2 * x[m, n]

with ``x[M, n] = 0`` and ``x[m, N] = 0`` as closures. Centring keeps the
neglected power ``nu**M`` tiny, since ``nu`` starts at exactly zero.

States have shape ``(..., M, N)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .config import Scenario, ScenarioConfig
from .errors import DataError, NumericalFailure, UsageError
from .moments import TOL_MOD, FilterRun, clip_to_disk, cross_moments
from .records import write_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MomentLattice:
    x: np.ndarray
    t: float = 0.0

    @property
    def signal(self):
        return self.x[..., 0, 1]

    @property
    def h_hat(self):
        return self.x[..., 0, 1].real

    def freq_estimate(self, w0: float):
        """Conditional mean frequency ``w0 + E[nu]``."""
        return w0 + self.x[..., 1, 0].real

    def max_mod(self):
        return np.abs(self.x[..., 0, :]).max(axis=-1)


@dataclass(frozen=True)
class LatticeStep:
    x_pred: MomentLattice
    x_post: MomentLattice
    h_hat: np.ndarray | float
    gain: np.ndarray


def _check_scenario(cfg):
    if cfg.scenario is not Scenario.III:
        raise UsageError(f"the lattice filter needs scenario III (got {cfg.scenario.value}); "
                         "use circdetect.moments for scenarios I and II")


def init_lattice(cfg: ScenarioConfig, batch_shape=()) -> MomentLattice:
    """Known initial frequency (``nu = 0``) and uniform phase: only ``x[0, 0] = 1``."""
    _check_scenario(cfg)
    x = np.zeros(tuple(batch_shape) + (cfg.m_powers, cfg.n_harmonics), dtype=complex)
    x[..., 0, 0] = 1.0
    return MomentLattice(x, 0.0)


def generator_blocks(cfg: ScenarioConfig) -> np.ndarray:
    """Generator as one ``(M, M)`` block per harmonic, shape ``(N, M, M)``.

    Block ``n`` maps column ``x[:, n]`` to ``L x[:, n]``.
    """
    M, N = cfg.m_powers, cfg.n_harmonics
    A = np.zeros((N, M, M), dtype=complex)
    m = np.arange(M)
    for n in range(N):
        A[n, m, m] = 1j * n * cfg.w0 - 0.5 * cfg.q_theta * n**2
        A[n, m[:-1], m[:-1] + 1] = 1j * n
        A[n, m[2:], m[2:] - 2] = 0.5 * cfg.q_w * m[2:] * (m[2:] - 1)
    return A


def prediction_operator(cfg: ScenarioConfig, dt: float | None = None,
                        propagator: str = "euler") -> np.ndarray:
    """One-step transition blocks: ``I + A*dt`` (Euler) or ``expm(A*dt)`` (exact)."""
    dt = cfg.dt if dt is None else dt
    A = generator_blocks(cfg)
    if propagator == "euler":
        return np.eye(cfg.m_powers)[None] + A * dt
    if propagator == "exact":
        return np.stack([expm(a * dt) for a in A])
    raise UsageError(f"unknown propagator {propagator!r} (expected 'euler' or 'exact')")


def predict_lattice(x: MomentLattice, cfg: ScenarioConfig, dt: float | None = None,
                    propagator: str = "euler", operator=None) -> MomentLattice:
    _check_scenario(cfg)
    dt = cfg.dt if dt is None else dt
    if operator is None:
        operator = prediction_operator(cfg, dt, propagator)
    return MomentLattice(np.einsum("nmj,...jn->...mn", operator, x.x), x.t + dt)


def update_lattice(x: MomentLattice, dz, cfg: ScenarioConfig, dt: float | None = None,
                   clip: bool = False, step: int | None = None) -> LatticeStep:
    """Innovation update of every lattice entry.

    ``x[m, -1] = conj(x[m, 1])`` is exact because ``nu`` is real.
    """
    dt = cfg.dt if dt is None else dt
    dz = np.asarray(dz, dtype=float)
    if not np.all(np.isfinite(dz)):
        raise DataError(f"non-finite measurement increment at step {step}")
    xp = x.x
    h = xp[..., 0, 1].real
    gain = (cross_moments(xp) - xp * h[..., None, None]) / cfg.sigma0
    post = xp + gain * (dz - h * dt)[..., None, None]
    if clip:
        post[..., 0, 1:] = clip_to_disk(post[..., 0, 1:])
    if not np.all(np.isfinite(post)):
        raise NumericalFailure("lattice state became non-finite", step=step)
    return LatticeStep(x, MomentLattice(post, x.t), h, gain)


class LatticeRun(FilterRun):
    """:class:`FilterRun` whose states are ``(M, N)`` lattices."""

    def __getitem__(self, k) -> LatticeStep:
        return LatticeStep(MomentLattice(self.x_pred[k], self.t[k + 1]),
                           MomentLattice(self.x_post[k + 1], self.t[k + 1]),
                           self.h_hat[k], self.gain[k])

    @property
    def final(self) -> MomentLattice:
        return MomentLattice(self.x_post[-1], self.t[-1])

    @property
    def signal(self) -> np.ndarray:
        return self.x_post[..., 0, 1]

    def freq_estimate(self, w0: float) -> np.ndarray:
        return w0 + self.x_post[..., 1, 0].real

    def max_mod(self) -> np.ndarray:
        return np.abs(self.x_post[..., 0, :]).max(axis=-1)


def run_lattice_filter(meas, cfg: ScenarioConfig, clip: bool = False,
                       propagator: str = "euler", tol_mod: float = TOL_MOD) -> LatticeRun:
    _check_scenario(cfg)
    if not np.isclose(meas.dt, cfg.dt, rtol=1e-12, atol=0):
        raise UsageError(f"measurement dt {meas.dt} does not match config dt {cfg.dt}")
    dz = np.asarray(meas.dz)
    L = dz.shape[0]
    state = init_lattice(cfg, dz.shape[1:])
    op = prediction_operator(cfg, cfg.dt, propagator)

    x_post = np.empty((L + 1,) + state.x.shape, dtype=complex)
    x_pred = np.empty((L,) + state.x.shape, dtype=complex)
    h_hat = np.empty((L,) + state.x.shape[:-2])
    gain = np.empty_like(x_pred)
    x_post[0] = state.x
    violations, first = 0, None
    for k in range(L):
        pred = predict_lattice(state, cfg, operator=op)
        res = update_lattice(pred, dz[k], cfg, clip=clip, step=k)
        state = res.x_post
        x_pred[k], x_post[k + 1], h_hat[k], gain[k] = pred.x, state.x, res.h_hat, res.gain
        if np.any(state.max_mod() > 1.0 + tol_mod):
            violations += 1
            first = k if first is None else first
    if violations:
        logger.warning("moment modulus exceeded 1 + %g on %d of %d steps (first at step %d)",
                       tol_mod, violations, L, first)
    return LatticeRun(cfg.dt * np.arange(L + 1), x_post, x_pred, h_hat, gain, violations)


def write_lattice_trace_csv(path, run: LatticeRun, cfg: ScenarioConfig, meta=None):
    """Dump ``k,t,re_x01,im_x01,h_hat,freq_est,max_mod``."""
    L = len(run)
    info = {"config": cfg.to_dict(), "estimator": "EC"}
    info.update(meta or {})
    x01 = run.signal[1:]
    return write_csv(path, ["k", "t", "re_x01", "im_x01", "h_hat", "freq_est", "max_mod"],
                     [np.arange(L), run.t[1:], x01.real, x01.imag, run.h_hat,
                      run.freq_estimate(cfg.w0)[1:], run.max_mod()[1:]], info)
