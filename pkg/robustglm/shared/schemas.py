"""Shared data shapes.

Array-carrying types (Dataset, FitResult) are dataclasses; everything that
is configuration or a serialised document is a pydantic model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from robustglm.core.config import get_settings
from robustglm.core.exceptions import ValidationError

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

INTERCEPT = "(Intercept)"


# numeric containers ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix X (n x p) and count response y (n)."""

    X: FloatArray
    y: IntArray
    columns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        X = np.ascontiguousarray(self.X, dtype=float)
        y_raw = np.asarray(self.y)
        if X.ndim != 2:
            raise ValidationError("X must be a 2-d matrix", details={"shape": list(X.shape)})
        n, p = X.shape
        if y_raw.shape != (n,):
            raise ValidationError("y length must match the rows of X", details={"n": n, "y": list(y_raw.shape)})
        if n <= p:
            raise ValidationError("need more observations than coefficients", details={"n": n, "p": p})
        if not np.all(np.isfinite(X)):
            raise ValidationError("X has non-finite entries")
        y_float = y_raw.astype(float)
        if not np.all(np.isfinite(y_float)) or np.any(y_float < 0) or np.any(y_float != np.floor(y_float)):
            raise ValidationError("y must hold non-negative integers")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y_float.astype(np.int64))
        if not self.columns:
            object.__setattr__(self, "columns", tuple(f"x{j + 1}" for j in range(p)))
        elif len(self.columns) != p:
            raise ValidationError("column names must match the columns of X")

    @classmethod
    def from_arrays(
        cls,
        x: ArrayLike,
        y: ArrayLike,
        *,
        intercept: bool = True,
        columns: tuple[str, ...] | None = None,
    ) -> Dataset:
        X = np.asarray(x, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        names = tuple(columns) if columns else tuple(f"x{j + 1}" for j in range(X.shape[1]))
        if intercept:
            X = np.column_stack([np.ones(X.shape[0]), X])
            names = (INTERCEPT, *names)
        return cls(X=X, y=np.asarray(y), columns=names)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    def subset(self, rows: ArrayLike) -> Dataset:
        idx = np.asarray(rows, dtype=np.int64)
        return replace(self, X=self.X[idx], y=self.y[idx])

    def drop(self, row: int) -> Dataset:
        return replace(self, X=np.delete(self.X, row, axis=0), y=np.delete(self.y, row))

    def with_response(self, y: ArrayLike) -> Dataset:
        return replace(self, y=np.asarray(y))

    def t(self, model: Any) -> FloatArray:
        """Transformed responses T = (t(y_1), ..., t(y_n))."""
        return np.asarray(model.t(self.y), dtype=float)


@dataclass
class FitResult:
    beta: FloatArray
    converged: bool
    iterations: int
    objective: float
    eq_residual_norm: float
    estimator: str = "lst"
    degraded: bool = False
    weights: FloatArray | None = None
    telemetry: dict[str, Any] = field(default_factory=dict)


# configuration ---------------------------------------------------------------


class InitConfig(BaseModel):
    """Two-stage deterministic initial estimator controls."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=0.05, gt=0.0, lt=0.5)
    stage1_tol: PositiveFloat = 1e-3
    stage1_max_iter: PositiveInt = 10
    loo_start: Literal["anchor", "eta0"] = "anchor"

    @staticmethod
    def n_delete(n: int) -> int:
        return n // 2

    @staticmethod
    def min_kept(p: int) -> int:
        return max(p + 1, 2 * p)


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    c: PositiveFloat = 2.0
    tol: PositiveFloat = 1e-8
    max_iter: PositiveInt = 100
    subsamples: PositiveInt = 2500
    subsample_max_iter: PositiveInt = 10
    seed: int = 0
    init: InitConfig = Field(default_factory=InitConfig)

    @classmethod
    def from_settings(cls, **overrides: Any) -> FitConfig:
        s = get_settings()
        base: dict[str, Any] = {
            "c": s.BISQUARE_C,
            "tol": s.TOL,
            "max_iter": s.MAX_ITER,
            "subsamples": s.SUBSAMPLES,
            "init": InitConfig(alpha=s.ALPHA),
        }
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


# documents -------------------------------------------------------------------


class FitDocument(BaseModel):
    """What `robustglm fit` prints."""

    app: str
    version: str
    estimator: str
    n: int
    p: int
    coefficients: dict[str, float]
    converged: bool
    iterations: int
    objective: float
    eq_residual_norm: float
    degraded: bool
    telemetry: dict[str, Any] = Field(default_factory=dict)
