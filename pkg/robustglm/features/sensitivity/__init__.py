"""Principal sensitivity components."""

from robustglm.features.sensitivity.services import (
    SensitivityDecomposition,
    principal_components,
    psc,
    sensitivity_matrix,
)

__all__ = [
    "SensitivityDecomposition",
    "principal_components",
    "psc",
    "sensitivity_matrix",
]
