"""Loss functions and the tabulated centering function."""

from robustglm.features.mloss.losses import SQUARE, LossKind, LossSpec, bisquare
from robustglm.features.mloss.mtable import (
    MGridConfig,
    MTable,
    build_m_table,
    get_m_table,
    load_m_table,
    m_value,
    save_m_table,
)

__all__ = [
    "SQUARE",
    "LossKind",
    "LossSpec",
    "MGridConfig",
    "MTable",
    "bisquare",
    "build_m_table",
    "get_m_table",
    "load_m_table",
    "m_value",
    "save_m_table",
]
