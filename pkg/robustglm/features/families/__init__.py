"""Response families."""

from robustglm.features.families.poisson import (
    POISSON,
    PoissonLogModel,
    expected_t,
    pois_pmf,
    pois_quantile,
    sqrt_transform,
    t_transform,
)

__all__ = [
    "POISSON",
    "PoissonLogModel",
    "expected_t",
    "pois_pmf",
    "pois_quantile",
    "sqrt_transform",
    "t_transform",
]
