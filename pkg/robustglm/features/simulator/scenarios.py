"""Monte Carlo scenarios: true coefficients, outlier location and the y0 sweep."""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

FloatArray = NDArray[np.float64]

ModelId = Literal[1, 2, 3, 4]
X0Variant = Literal["text", "caption"]

FULL_SCALE = {"n": 1000, "p": 100, "reps": 1000}

# (intercept, slope on the first covariate)
_BETA0_HEAD: dict[int, tuple[float, float]] = {
    1: (0.0, 1.0),
    2: (2.0, 1.0),
    3: (2.0, 1.5),
    4: (0.0, 1.0),
}


def _basis(p: int, entries: dict[int, float]) -> FloatArray:
    out = np.zeros(p)
    for idx, value in entries.items():
        out[idx] = value
    return out


class SimScenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: ModelId = 1
    n: PositiveInt = 200
    p: int = Field(default=10, ge=2)
    eps: float = Field(default=0.10, ge=0.0, lt=0.5)
    reps: PositiveInt = 100
    seed: int = Field(default=0, ge=0)
    x0_variant: X0Variant = "text"
    y0_grid: tuple[int, ...] | None = None

    @model_validator(mode="after")
    def _check(self) -> SimScenario:
        if self.model == 4:
            need = 4 if self.x0_variant == "caption" else 3
            if self.p < need:
                raise ValueError(f"model 4 with the {self.x0_variant} outlier needs p >= {need}")
        if self.n <= self.p:
            raise ValueError("n must exceed p")
        if self.y0_grid is not None:
            if not self.y0_grid:
                raise ValueError("y0 grid must not be empty")
            if min(self.y0_grid) < 0:
                raise ValueError("y0 values must be non-negative")
        return self

    @classmethod
    def full_scale(cls, **overrides: object) -> SimScenario:
        return cls(**{**FULL_SCALE, **overrides})

    @property
    def beta0(self) -> FloatArray:
        intercept, slope = _BETA0_HEAD[self.model]
        return _basis(self.p, {0: intercept, 1: slope})

    @property
    def x0(self) -> FloatArray:
        if self.x0_variant == "text":
            entries = {0: 1.0, 1: 3.0}
            if self.model == 4:
                entries[2] = 4.0
        else:
            entries = {0: 3.0, 1: 1.0}
            if self.model == 4:
                entries[3] = 4.0
        return _basis(self.p, entries)

    @property
    def mu0(self) -> float:
        return float(np.exp(self.beta0 @ self.x0))

    @property
    def clean(self) -> bool:
        return self.eps == 0.0

    def grid(self) -> list[int | None]:
        """y0 values to sweep; a single None stands for the clean cell."""
        if self.clean:
            return [None]
        if self.y0_grid is not None:
            return list(self.y0_grid)
        top = math.floor(3.0 * self.mu0)
        step = max(1, math.floor(self.mu0 / 10.0))
        return list(range(0, top + 1, step))
