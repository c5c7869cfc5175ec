"""Exception hierarchy shared by every module in the package."""


class CoreApproxError(Exception):
    """Base class for all package errors."""


class CapacityError(CoreApproxError):
    """Requested computation exceeds the supported problem size."""


class GameFormatError(CoreApproxError, ValueError):
    """A game file or game definition violates the expected schema."""


class ContractError(CoreApproxError, ValueError):
    """An input violates a documented precondition."""


class SolverFailure(CoreApproxError):
    """The simplex solver could not reach a certified optimum."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InternalSolverError(SolverFailure):
    """The solver hit a state that is impossible for a bounded core LP."""


class ConfigError(CoreApproxError, ValueError):
    """An experiment configuration is invalid."""
