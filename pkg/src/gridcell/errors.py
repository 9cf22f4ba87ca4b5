"""Exception hierarchy shared by all gridcell modules."""

from __future__ import annotations


class GridcellError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GridcellError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(GridcellError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (error estimate {residual:.3e})")
        self.residual = residual


class BracketError(GridcellError):
    """A root bracket could not be established (indicates a numerics bug)."""


class UnsupportedRegime(GridcellError):
    """The requested quantity has no closed form for these parameters."""


class InfeasibleLoad(GridcellError):
    """Even with every BS active the outage constraint cannot be met."""

    def __init__(self, message: str, horizon: int | None = None):
        if horizon is not None:
            message = f"horizon {horizon}: {message}"
        super().__init__(message)
        self.horizon = horizon


class DemandViolation(GridcellError):
    """Storage plus supply does not cover the demand of a horizon."""


class PreconditionViolation(GridcellError):
    """A standing assumption of a closed-form result does not hold."""


class BudgetExceeded(GridcellError):
    """A computation would exceed its configured work budget."""

    def __init__(self, message: str, required: int):
        super().__init__(f"{message} (required {required})")
        self.required = required


class ParseError(GridcellError):
    """A profile or config file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(GridcellError, ValueError):
    """Parsed data violates a documented invariant."""


class NoActiveBS(GridcellError):
    """Thinning left a realization without any active base station."""
