"""
Error hierarchy for the hyperwave library.

Two families: constraint violations (bad inputs, exit status 1) and
numerical failures (discretization, divergence, horizon, exit status 2).
"""
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional


@dataclass
class ConstraintViolation:
    """Represents a violated relation with structured information"""
    field: str
    error_type: str
    message: str
    value: Any = None
    path: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class HyperwaveError(Exception):
    """Base class for every error raised by the library."""
    exit_code = 2


class ConstraintViolationError(HyperwaveError):
    """Input rejected; carries the list of violated relations."""
    exit_code = 1

    def __init__(self, message: str, violations: Optional[List[ConstraintViolation]] = None):
        self.violations = list(violations or [])
        if self.violations:
            names = ", ".join(v.field for v in self.violations)
            message = f"{message} [violated: {names}]"
        super().__init__(message)

    @property
    def offenders(self) -> List[str]:
        return [v.field for v in self.violations]


class InvalidDimensionError(ConstraintViolationError):
    pass


class UnsupportedDimensionError(ConstraintViolationError):
    pass


class DomainError(ConstraintViolationError):
    pass


class SpectralPositivityError(ConstraintViolationError):
    pass


class PreconditionError(ConstraintViolationError):
    pass


class DivergentIntegralError(ConstraintViolationError):
    pass


class NumericalError(HyperwaveError):
    exit_code = 2


class DiscretizationError(NumericalError):
    pass


class IncompatibleGridError(NumericalError):
    pass


class CalibrationRequiredError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class SingularMultiplierError(NumericalError):
    pass


class SingularEnvelopeError(NumericalError):
    pass


class DivergentNormError(NumericalError):
    pass


class InterpolationRequiredError(NumericalError):
    pass


class DivergenceError(NumericalError):
    """Picard iteration stopped contracting."""

    def __init__(self, message: str, diff_norms: Optional[List[float]] = None):
        self.diff_norms = list(diff_norms or [])
        super().__init__(message)


class LocalSolveError(NumericalError):
    pass


class HorizonError(NumericalError):
    pass


def violation(field: str, message: str, value: Any = None, error_type: str = "CONSTRAINT") -> ConstraintViolation:
    return ConstraintViolation(field=field, error_type=error_type, message=message, value=value)
