"""Exception hierarchy shared by every module."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class MissingPolicyEntry(SolverError, KeyError):
    def __init__(self, key):
        super().__init__(key)
        self.key = key

    def __str__(self):
        return f"policy has no entry for information state {self.key!r}"


class ProfileArityMismatch(SolverError, ValueError):
    pass


class EmptyMixture(SolverError, ValueError):
    pass


class UnsupportedPlayerCount(SolverError, ValueError):
    pass


class ShapeError(SolverError, ValueError):
    pass


class ConvergenceError(SolverError, RuntimeError):
    def __init__(self, message, residual=float("nan"), layer=None):
        super().__init__(message)
        self.residual = residual
        self.layer = layer


class EmptyWindow(SolverError, ValueError):
    pass


class InvalidOutcome(SolverError, ValueError):
    pass


class SlotError(SolverError, IndexError):
    pass


class InvalidBudget(SolverError, ValueError):
    pass


class IncompleteOutcomes(SolverError, ValueError):
    pass


class CountOverflow(SolverError, OverflowError):
    pass


class ConfigError(SolverError, ValueError):
    """Raised for malformed or invalid configuration input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
