"""Exception hierarchy. Each class carries a short ``kind`` tag used in CLI reports."""


class HartreeError(Exception):
    """Base class for all library errors."""

    kind = "error"

    def __init__(self, detail, **info):
        super().__init__(detail)
        self.detail = detail
        self.info = info


class ParameterError(HartreeError, ValueError):
    kind = "parameter"


class DimensionError(ParameterError):
    kind = "dimension"


class DomainError(HartreeError, ValueError):
    kind = "domain"


class ConfigurationError(HartreeError, ValueError):
    kind = "configuration"


class IntegrabilityError(HartreeError, ValueError):
    """A power-law tail makes the requested integral diverge."""

    kind = "integrability"


class DegenerateInputError(HartreeError, ValueError):
    kind = "degenerate"


class ToleranceError(HartreeError, ArithmeticError):
    """A numerical procedure missed its accuracy target."""

    kind = "tolerance"


class ConvergenceError(ToleranceError):
    """An iteration stopped before converging; ``trace`` holds its history."""

    kind = "convergence"

    def __init__(self, detail, trace=None, **info):
        super().__init__(detail, **info)
        self.trace = trace
