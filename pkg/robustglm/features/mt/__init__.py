"""MT estimator, the FMT pipeline and the ML / SMT baselines."""

from robustglm.features.mt.baselines import ml_fit, required_subsamples, smt
from robustglm.features.mt.pipeline import ESTIMATORS, FitContext, fmt
from robustglm.features.mt.solver import mt_fit, mt_residual_norm

__all__ = [
    "ESTIMATORS",
    "FitContext",
    "fmt",
    "ml_fit",
    "mt_fit",
    "mt_residual_norm",
    "required_subsamples",
    "smt",
]
