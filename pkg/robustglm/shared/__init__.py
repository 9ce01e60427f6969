"""Shared data shapes, IO and the least-squares kernel."""

from robustglm.shared.data import dataset_from_frame, read_dataset
from robustglm.shared.linalg import Step, numerical_rank, solve_weighted
from robustglm.shared.output import emit_document, emit_frame
from robustglm.shared.schemas import (
    INTERCEPT,
    Dataset,
    FitConfig,
    FitDocument,
    FitResult,
    InitConfig,
)

__all__ = [
    "INTERCEPT",
    "Dataset",
    "FitConfig",
    "FitDocument",
    "FitResult",
    "InitConfig",
    "Step",
    "dataset_from_frame",
    "emit_document",
    "emit_frame",
    "numerical_rank",
    "read_dataset",
    "solve_weighted",
]
