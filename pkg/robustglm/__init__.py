"""Robust Poisson regression with transformed M-estimators."""

from robustglm.features.mt import ESTIMATORS, FitContext, fmt, ml_fit, mt_fit, smt
from robustglm.shared.data import read_dataset
from robustglm.shared.schemas import Dataset, FitConfig, FitResult, InitConfig

__version__ = "0.1.0"

__all__ = [
    "ESTIMATORS",
    "Dataset",
    "FitConfig",
    "FitContext",
    "FitResult",
    "InitConfig",
    "__version__",
    "fmt",
    "ml_fit",
    "mt_fit",
    "read_dataset",
    "smt",
]
