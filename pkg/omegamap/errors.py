from typing import Any, Dict, List


class OmegaMapError(Exception):
    """
    Base class for every error raised by omegamap.

    Args:
        message (str): Human-readable description.
        code (str): Machine-readable error code used in the CLI error JSON.
        details (dict, optional): Extra structured context. Defaults to None.
    """

    default_code = "omega_map_error"

    def __init__(self, message: str, code: str | None = None, details: Dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.code = code or self.default_code
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class ValidationError(OmegaMapError, ValueError):
    """
    Invalid input or configuration. Carries every violated invariant, not only the first.

    Args:
        errors (List[str]): One message per violated invariant.
        code (str, optional): Machine-readable error code. Defaults to "invalid_input".
    """

    default_code = "invalid_input"

    def __init__(self, errors: List[str] | str, code: str | None = None, details: Dict[str, Any] | None = None):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        details = dict(details or {})
        details.setdefault("violations", self.errors)
        super().__init__("; ".join(self.errors), code=code, details=details)


class NumericalError(OmegaMapError, ArithmeticError):
    default_code = "numerical_failure"


class ConvergenceError(NumericalError):
    default_code = "no_convergence"


class ConditioningError(NumericalError):
    default_code = "ill_conditioned"
