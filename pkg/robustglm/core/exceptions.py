"""Exceptions + the CLI exit-code contract."""

from __future__ import annotations

from typing import Any

from robustglm.core.logging import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class ApplicationError(Exception):
    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(ApplicationError):
    pass


class DomainError(ValidationError):
    """Argument outside the mathematical domain of the operation."""


class NumericalError(ApplicationError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class DivergenceError(NumericalError):
    pass


class DegenerateWeightsError(NumericalError):
    """Every robust weight vanished; the start is too far from the data."""


class TableBuildError(NumericalError):
    pass


class EigenSolverError(NumericalError):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, NumericalError):
        return EXIT_NOT_CONVERGED
    return EXIT_INPUT_ERROR


def report_error(exc: BaseException, command: str) -> int:
    """Log `exc` the way its class deserves and return the exit code."""
    if isinstance(exc, ValidationError):
        logger.warning("validation_error", command=command, code=exc.error_code, message=exc.message)
    elif isinstance(exc, NumericalError):
        logger.error(
            "numerical_error",
            command=command,
            code=exc.error_code,
            message=exc.message,
            details=exc.details,
        )
    else:
        logger.error("unexpected_error", command=command, exc_type=type(exc).__name__, exc_info=True)
    return exit_code_for(exc)
