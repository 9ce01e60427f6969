"""Transformed least squares."""

from robustglm.features.lst.solver import (
    eta0,
    lst_fit,
    lst_onestep,
    lst_onestep_all,
    lst_residual_norm,
    relative_change,
)

__all__ = [
    "eta0",
    "lst_fit",
    "lst_onestep",
    "lst_onestep_all",
    "lst_residual_norm",
    "relative_change",
]
