"""Weighted least-squares kernel behind every IRWLS step.

Each step solves min ||A d - b|| with A the row-weighted design. Pivoted QR
detects rank deficiency; a deficient system gets a tiny ridge
(1e-10 * trace(A'A) / p) and the step is marked degraded instead of
aborting the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from robustglm.core.exceptions import DivergenceError, RankDeficiencyError

FloatArray = NDArray[np.float64]

RIDGE_SCALE = 1e-10


@dataclass(frozen=True)
class Step:
    delta: FloatArray
    degraded: bool = False


def numerical_rank(A: FloatArray) -> int:
    r = scipy.linalg.qr(A, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > diag[0] * max(A.shape) * np.finfo(float).eps))


def solve_weighted(A: FloatArray, b: FloatArray, *, allow_ridge: bool = True) -> Step:
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise DivergenceError("weighted system has non-finite entries")
    p = A.shape[1]
    q, r, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        raise RankDeficiencyError("weighted design is identically zero", details={"p": p})
    rank = int(np.sum(diag > diag[0] * max(A.shape) * np.finfo(float).eps))

    if rank == p:
        delta = np.empty(p)
        delta[piv] = scipy.linalg.solve_triangular(r, q.T @ b)
        return Step(delta)

    if not allow_ridge:
        raise RankDeficiencyError("weighted normal matrix is singular", details={"rank": rank, "p": p})
    gram = A.T @ A
    lam = RIDGE_SCALE * float(np.trace(gram)) / p
    try:
        delta = scipy.linalg.solve(gram + lam * np.eye(p), A.T @ b, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise RankDeficiencyError(
            "weighted normal matrix is singular after ridge", details={"rank": rank, "p": p}
        ) from exc
    return Step(delta, degraded=True)
