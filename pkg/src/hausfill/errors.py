"""Exception hierarchy; every error carries a stable short code used by the CLI."""


class HausfillError(Exception):
    code = "error"
    exit_status = 1


class InvalidInput(HausfillError, ValueError):
    code = "invalid-input"
    exit_status = 2


class InvalidGauge(HausfillError, ValueError):
    code = "invalid-gauge"
    exit_status = 3


class ConfigInvalid(HausfillError, ValueError):
    code = "config-invalid"
    exit_status = 4


class ResolutionExceeded(HausfillError):
    code = "resolution-exceeded"
    exit_status = 5


class CapacityExceeded(HausfillError):
    code = "capacity-exceeded"
    exit_status = 6

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class BudgetExceeded(HausfillError):
    code = "budget-exceeded"
    exit_status = 7


class DepthExceeded(HausfillError):
    code = "depth-exceeded"
    exit_status = 8


class InsufficientMass(HausfillError):
    code = "insufficient-mass"
    exit_status = 9


class UndefinedDimension(HausfillError):
    code = "undefined-dimension"
    exit_status = 10


class InvalidRadii(HausfillError, ValueError):
    code = "invalid-radii"
    exit_status = 11


class DegenerateCurve(HausfillError):
    code = "degenerate-curve"
    exit_status = 12
