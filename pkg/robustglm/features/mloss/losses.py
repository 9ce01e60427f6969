"""rho / psi pairs for the transformed M-estimators.

Bisquare is normalised so that sup rho = 1; square is plain u**2 and turns
the MT estimator into transformed least squares.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, PositiveFloat

LossKind = Literal["bisquare", "square"]


class LossSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: LossKind = "bisquare"
    c: PositiveFloat = 2.0

    @property
    def bounded(self) -> bool:
        return self.kind == "bisquare"

    @property
    def weight_at_zero(self) -> float:
        """psi'(0), the continuous extension of psi(u)/u at u = 0."""
        return 6.0 / self.c**2 if self.kind == "bisquare" else 2.0

    def rho(self, u: ArrayLike) -> NDArray[np.float64] | float:
        arr = np.asarray(u, dtype=float)
        if self.kind == "square":
            out = arr * arr
        else:
            r2 = np.minimum((arr / self.c) ** 2, 1.0)
            out = 1.0 - (1.0 - r2) ** 3
        return float(out) if out.ndim == 0 else out

    def psi(self, u: ArrayLike) -> NDArray[np.float64] | float:
        arr = np.asarray(u, dtype=float)
        if self.kind == "square":
            out = 2.0 * arr
        else:
            r2 = (arr / self.c) ** 2
            out = np.where(r2 < 1.0, 6.0 * arr / self.c**2 * (1.0 - r2) ** 2, 0.0)
        return float(out) if out.ndim == 0 else out

    def psi_prime(self, u: ArrayLike) -> NDArray[np.float64]:
        arr = np.asarray(u, dtype=float)
        if self.kind == "square":
            return np.full(arr.shape, 2.0)
        r2 = (arr / self.c) ** 2
        return np.where(r2 < 1.0, self.weight_at_zero * (1.0 - r2) * (1.0 - 5.0 * r2), 0.0)

    def weight(self, u: ArrayLike) -> NDArray[np.float64]:
        """psi(u)/u with weight(0) = psi'(0)."""
        arr = np.asarray(u, dtype=float)
        if self.kind == "square":
            return np.full(arr.shape, 2.0)
        r2 = (arr / self.c) ** 2
        return np.where(r2 < 1.0, self.weight_at_zero * (1.0 - r2) ** 2, 0.0)


SQUARE = LossSpec(kind="square")


def bisquare(c: float = 2.0) -> LossSpec:
    return LossSpec(kind="bisquare", c=c)
