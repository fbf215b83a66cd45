"""Estimation and detection of circle-valued random signals in white noise.

The conditional density of the phase is carried by its truncated circular
moments (``moments`` for scenarios I/II, ``lattice`` for the random-frequency
scenario III). The estimator-correlator detector in ``detector`` correlates
the causal estimate with the measurements. ``ekf`` is the baseline,
``particle`` an independent oracle and ``harness`` the Monte Carlo driver.
"""

from .config import Hypothesis, Scenario, ScenarioConfig
from .detector import Estimator, LogLikAccumulator, decide, loglik_step, run_ec_detector
from .ekf import EkfState, ekf_init, ekf_signal_estimate, ekf_step, run_ekf
from .errors import (BatchFailure, CircDetectError, ConfigurationError, DataError,
                     NumericalFailure, OracleFailure, UsageError)
from .harness import (RocTable, TrackingReport, TrialBatchSpec, run_batch, sweep_roc,
                      tracking_rmse)
from .lattice import (MomentLattice, init_lattice, predict_lattice, run_lattice_filter,
                      update_lattice)
from .moments import FilterStep, MomentVector, init_moments, predict, run_filter, update
from .particle import pf_run
from .sdesim import (MeasurementPath, SignalPath, simulate, simulate_measurements,
                     simulate_signal)

__version__ = "0.1.0"
