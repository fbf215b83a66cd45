"""Monte Carlo experiments: detector batches, ROC sweeps and tracking RMSE.

Every trial draws its own seed from ``(base_seed, purpose, index)``, so the
result of a trial never depends on which other trials share its block or
on how blocks are scheduled across workers. Trials are filtered in fixed
blocks of ``block_size`` paths at a time (vectorised over the block).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .config import Hypothesis, ScenarioConfig
from .detector import Estimator, EstimatorTracker, run_ec_detector
from .errors import BatchFailure, CircDetectError, ConfigurationError
from .records import write_csv, write_json
from .sdesim import MeasurementPath, simulate_measurements, simulate_signal

logger = logging.getLogger(__name__)

BLOCK_SIZE = 100
_PURPOSE = {Hypothesis.H0: 0, Hypothesis.H1: 1, "track": 2}


def derive_seed(base_seed: int, purpose, index: int) -> int:
    """64-bit trial seed from ``(base_seed, purpose, index)``."""
    key = _PURPOSE[purpose]
    ss = np.random.SeedSequence([int(base_seed), key, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TrialBatchSpec:
    cfg: ScenarioConfig
    estimator: Estimator = Estimator.EC
    n_trials_h0: int = 500
    n_trials_h1: int = 500
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "estimator", Estimator.parse(self.estimator))
        for name in ("n_trials_h0", "n_trials_h1"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must satisfy {name} >= 1")

    def seeds(self, hypothesis) -> list[int]:
        hypothesis = Hypothesis.parse(hypothesis)
        n = self.n_trials_h0 if hypothesis is Hypothesis.H0 else self.n_trials_h1
        return [derive_seed(self.base_seed, hypothesis, i) for i in range(n)]


@dataclass(frozen=True)
class BatchResult:
    spec: TrialBatchSpec
    h0: np.ndarray
    h1: np.ndarray
    seeds_h0: list = field(repr=False)
    seeds_h1: list = field(repr=False)


def _measurements(cfg, seeds, hypothesis):
    dz = np.empty((cfg.steps, len(seeds)))
    for j, seed in enumerate(seeds):
        path = simulate_signal(cfg, seed) if hypothesis is Hypothesis.H1 else None
        dz[:, j] = simulate_measurements(path, cfg, hypothesis, seed).dz
    return MeasurementPath(dz, cfg.dt, hypothesis)


def _loglik_block(args):
    cfg, estimator, hypothesis, seeds, propagator = args
    meas = _measurements(cfg, seeds, hypothesis)
    try:
        return np.atleast_1d(run_ec_detector(meas, cfg, estimator, propagator)), []
    except CircDetectError:
        pass
    # locate the failing trials one by one so they can be replayed
    out, failures = np.full(len(seeds), np.nan), []
    for j, seed in enumerate(seeds):
        single = MeasurementPath(meas.dz[:, j], cfg.dt, hypothesis)
        try:
            out[j] = run_ec_detector(single, cfg, estimator, propagator)
        except CircDetectError as err:
            err.seed = seed
            failures.append((seed, err))
    return out, failures


def _blocks(seeds, block_size):
    return [seeds[i:i + block_size] for i in range(0, len(seeds), block_size)]


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def run_batch(spec: TrialBatchSpec, workers: int = 1, block_size: int = BLOCK_SIZE,
              propagator: str = "euler") -> BatchResult:
    """Final log-likelihoods of every H0 and H1 trial of ``spec``."""
    seeds = {h: spec.seeds(h) for h in (Hypothesis.H0, Hypothesis.H1)}
    tasks, owners = [], []
    for h in (Hypothesis.H0, Hypothesis.H1):
        for block in _blocks(seeds[h], block_size):
            tasks.append((spec.cfg, spec.estimator, h, block, propagator))
            owners.append(h)
    results = _map(_loglik_block, tasks, workers)
    parts = {Hypothesis.H0: [], Hypothesis.H1: []}
    failures = []
    for h, (values, fails) in zip(owners, results):
        parts[h].append(values)
        failures.extend(fails)
    if failures:
        raise BatchFailure(failures)
    return BatchResult(spec, np.concatenate(parts[Hypothesis.H0]),
                       np.concatenate(parts[Hypothesis.H1]),
                       seeds[Hypothesis.H0], seeds[Hypothesis.H1])


@dataclass(frozen=True)
class RocTable:
    """Empirical ROC, rows sorted by descending threshold.

    ``pf_hw`` and ``pd_hw`` are half-widths of 95% Wilson intervals.
    """

    threshold: np.ndarray
    pf: np.ndarray
    pd: np.ndarray
    pf_hw: np.ndarray
    pd_hw: np.ndarray
    snr: float = float("nan")

    def __len__(self):
        return self.threshold.shape[0]

    def pd_at_pf(self, pf_max: float) -> float:
        """Largest detection probability among operating points with ``pf <= pf_max``."""
        ok = self.pf <= pf_max + 1e-12
        return float(self.pd[ok].max())

    def is_valid(self) -> bool:
        """Monotone in both rates and bounded in ``[0, 1]``."""
        return bool(np.all(np.diff(self.threshold) < 0)
                    and np.all(np.diff(self.pf) >= 0) and np.all(np.diff(self.pd) >= 0)
                    and np.all((self.pf >= 0) & (self.pf <= 1))
                    and np.all((self.pd >= 0) & (self.pd <= 1)))


def _wilson_halfwidth(count, nobs):
    lo, hi = proportion_confint(count, nobs, alpha=0.05, method="wilson")
    return 0.5 * (np.asarray(hi) - np.asarray(lo))


def sweep_roc(h0_logliks, h1_logliks, snr: float = float("nan")) -> RocTable:
    """Threshold at every distinct log-likelihood plus the two infinite sentinels.

    ``pf`` (``pd``) is the fraction of H0 (H1) log-likelihoods strictly above
    the threshold.
    """
    h0 = np.sort(np.asarray(h0_logliks, dtype=float))
    h1 = np.sort(np.asarray(h1_logliks, dtype=float))
    if h0.size == 0 or h1.size == 0:
        raise ConfigurationError("sweep_roc needs non-empty H0 and H1 samples")
    thr = np.unique(np.concatenate([h0, h1]))[::-1]
    thr = np.concatenate([[np.inf], thr, [-np.inf]])
    c0 = h0.size - np.searchsorted(h0, thr, side="right")
    c1 = h1.size - np.searchsorted(h1, thr, side="right")
    return RocTable(thr, c0 / h0.size, c1 / h1.size,
                    _wilson_halfwidth(c0, h0.size), _wilson_halfwidth(c1, h1.size), snr)


def operating_point(h0_logliks, h1_logliks, threshold: float) -> tuple[float, float]:
    """``(pf, pd)`` of the rule "H1 iff loglik > threshold" on the two samples."""
    h0 = np.asarray(h0_logliks, dtype=float)
    h1 = np.asarray(h1_logliks, dtype=float)
    return float(np.mean(h0 > threshold)), float(np.mean(h1 > threshold))


@dataclass(frozen=True)
class TrackingReport:
    estimator: Estimator
    rmse: np.ndarray
    seeds: list = field(repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.rmse))

    @property
    def std(self) -> float:
        return float(np.std(self.rmse, ddof=1)) if self.rmse.size > 1 else 0.0


def _rmse_block(args):
    cfg, estimator, seeds, burn_in, propagator = args
    L = cfg.steps
    theta = np.empty((L + 1, len(seeds)))
    dz = np.empty((L, len(seeds)))
    for j, seed in enumerate(seeds):
        path = simulate_signal(cfg, seed)
        theta[:, j] = path.theta
        dz[:, j] = simulate_measurements(path, cfg, Hypothesis.H1, seed).dz
    tracker = EstimatorTracker(cfg, estimator, (len(seeds),), propagator)
    start = int(math.ceil(burn_in * L))
    sq = np.zeros(len(seeds))
    for k in range(L):
        tracker.predict()
        tracker.update(dz[k], k)
        if k >= start:
            err = tracker.signal.real - np.cos(theta[k + 1])
            sq += err * err
    return np.sqrt(sq / (L - start))


def tracking_rmse(cfg: ScenarioConfig, estimator=Estimator.EC, n_runs: int = 100,
                  base_seed: int = 0, burn_in: float = 0.2, workers: int = 1,
                  block_size: int = BLOCK_SIZE, propagator: str = "euler") -> TrackingReport:
    """RMSE of ``Re(signal estimate)`` against ``cos(theta)`` after the burn-in fraction.

    Run ``i`` uses the same seed for every estimator, so estimators are
    compared on identical measurement paths.
    """
    estimator = Estimator.parse(estimator)
    if not 0 <= burn_in < 1:
        raise ConfigurationError(f"burn_in must satisfy 0 <= burn_in < 1 (got {burn_in})")
    seeds = [derive_seed(base_seed, "track", i) for i in range(n_runs)]
    tasks = [(cfg, estimator, b, burn_in, propagator) for b in _blocks(seeds, block_size)]
    rmse = np.concatenate(_map(_rmse_block, tasks, workers))
    return TrackingReport(estimator, rmse, seeds)


def write_roc_csv(path, table: RocTable, meta=None):
    return write_csv(path, ["threshold", "pf", "pd", "pf_hw", "pd_hw"],
                     [table.threshold, table.pf, table.pd, table.pf_hw, table.pd_hw], meta)


def write_tracking_csv(path, reports, meta=None):
    runs, names, values = [], [], []
    for rep in reports:
        runs.extend(range(rep.rmse.size))
        names.extend([rep.estimator.value] * rep.rmse.size)
        values.extend(rep.rmse.tolist())
    return write_csv(path, ["run", "estimator", "rmse"], [runs, names, values], meta)


def write_trials_csv(path, result: BatchResult, meta=None):
    """Per-trial records ``trial_id,hypothesis,estimator,loglik``."""
    ids, hyps, lls = [], [], []
    for h, values in ((Hypothesis.H0, result.h0), (Hypothesis.H1, result.h1)):
        ids.extend(range(values.size))
        hyps.extend([h.value] * values.size)
        lls.extend(values.tolist())
    est = [result.spec.estimator.value] * len(ids)
    return write_csv(path, ["trial_id", "hypothesis", "estimator", "loglik"],
                     [ids, hyps, est, lls], meta)


def batch_manifest(spec: TrialBatchSpec, **extra) -> dict:
    """Everything needed to replay a batch."""
    from . import __version__

    manifest = {
        "package": "circdetect",
        "version": __version__,
        "config": spec.cfg.to_dict(),
        "estimator": spec.estimator.value,
        "n_trials_h0": spec.n_trials_h0,
        "n_trials_h1": spec.n_trials_h1,
        "base_seed": spec.base_seed,
        "seed_derivation": "SeedSequence([base_seed, 0 for H0 | 1 for H1, trial_index])",
    }
    manifest.update(extra)
    return manifest


def write_manifest(path, spec: TrialBatchSpec, **extra):
    return write_json(path, batch_manifest(spec, **extra))
