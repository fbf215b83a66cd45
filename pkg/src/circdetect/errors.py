"""Exception hierarchy shared by every module of the package."""


class CircDetectError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CircDetectError, ValueError):
    """A configuration value violates its documented bound."""


class UsageError(CircDetectError):
    """An operation was called with incompatible arguments."""


class DataError(CircDetectError, ValueError):
    """Input data (e.g. a measurement increment) is not finite."""


class NumericalFailure(CircDetectError, ArithmeticError):
    """A filter state became non-finite or lost a structural property.

    ``step`` is the zero-based step index at which the failure was detected
    and ``seed`` (when known) lets the caller replay the trial.
    """

    def __init__(self, message, step=None, seed=None):
        super().__init__(message)
        self.step = step
        self.seed = seed

    def __str__(self):
        msg = super().__str__()
        if self.step is not None:
            msg += f" (step {self.step})"
        if self.seed is not None:
            msg += f" (replay seed {self.seed})"
        return msg


class OracleFailure(NumericalFailure):
    """The particle oracle lost all of its weight."""


class BatchFailure(CircDetectError):
    """One or more Monte Carlo trials failed; ``failures`` holds (seed, error) pairs."""

    def __init__(self, failures):
        self.failures = list(failures)
        seeds = ", ".join(str(s) for s, _ in self.failures[:10])
        super().__init__(f"{len(self.failures)} trial(s) failed; seeds: {seeds}")
