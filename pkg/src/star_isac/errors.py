"""Exception types raised across the package."""


class InvalidInput(ValueError):
    """Arguments violate an operation's preconditions."""


class ConfigError(ValueError):
    """A scenario configuration file is malformed or violates an invariant."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DegenerateFilter(ArithmeticError):
    """The matched-filter chain vector is zero."""


class InfeasibleScenario(RuntimeError):
    """The first beamforming sub-problem has no feasible point."""

    def __init__(self, message, binding=None):
        super().__init__(message)
        self.binding = binding


class NumericalFailure(RuntimeError):
    """The conic solver stopped without reaching a verdict."""


class RecoveryFailure(RuntimeError):
    """No rank-one STAR-RIS candidate satisfies the constraints."""

    def __init__(self, message, candidate=None, report=None):
        super().__init__(message)
        self.candidate = candidate
        self.report = report
