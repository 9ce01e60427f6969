"""Core public surface."""

from robustglm.core.config import Settings, get_settings
from robustglm.core.exceptions import (
    ApplicationError,
    DegenerateWeightsError,
    DivergenceError,
    DomainError,
    EigenSolverError,
    NumericalError,
    RankDeficiencyError,
    TableBuildError,
    ValidationError,
    exit_code_for,
    report_error,
)
from robustglm.core.logging import get_logger, setup_logging
from robustglm.core.parallel import WorkerPool, inline_pool

__all__ = [
    "ApplicationError",
    "DegenerateWeightsError",
    "DivergenceError",
    "DomainError",
    "EigenSolverError",
    "NumericalError",
    "RankDeficiencyError",
    "Settings",
    "TableBuildError",
    "ValidationError",
    "WorkerPool",
    "exit_code_for",
    "get_logger",
    "get_settings",
    "inline_pool",
    "report_error",
    "setup_logging",
]
