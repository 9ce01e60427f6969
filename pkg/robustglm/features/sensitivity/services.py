"""Sensitivity matrix and principal sensitivity components.

r_ij = t_hat_i - t_hat_i(j) measures how much the fitted transformed value
of observation i moves when observation j is deleted. The directions v_k
maximise sum_i (v' r_i)^2 under orthogonality, i.e. they are the leading
right singular vectors of R, and z_k = R v_k. Groups of similar outliers
show up together at the extremes of some z_k even when they mask each
other in single-deletion diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from robustglm.core.exceptions import EigenSolverError, NumericalError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.lst.solver import lst_onestep_all
from robustglm.features.mloss.mtable import MTable
from robustglm.shared.schemas import Dataset, FitResult

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class SensitivityDecomposition:
    R: FloatArray
    directions: FloatArray  # (count, n), rows are v_1..v_count
    components: FloatArray  # (count, n), rows are z_k = R v_k
    eigenvalues: FloatArray  # nonincreasing, eigenvalues of R'R
    residuals: FloatArray | None = None  # e_i = t_i - t_hat_i

    @property
    def count(self) -> int:
        return int(self.directions.shape[0])

    def flags(self) -> NDArray[np.bool_]:
        """(count, n) mask: |z_ki| above the median of |z_k|."""
        mags = np.abs(self.components)
        return mags > np.median(mags, axis=1, keepdims=True)


def sensitivity_matrix(
    data: Dataset,
    fit: FitResult,
    table: MTable,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
    loo_start: str = "anchor",
) -> FloatArray:
    """R with column j = s(X beta_hat) - s(X beta_hat_(j))."""
    anchor = fit.beta if loo_start == "anchor" else None
    try:
        loo = lst_onestep_all(data, anchor, table, model, pool)
    except NumericalError as exc:
        logger.error("sensitivity_column_failed", index=exc.details.get("deleted_index"), message=exc.message)
        raise
    fitted = table.s(data.X @ fit.beta)
    # loo is (n, p): row j is beta_(j); column j of R uses it
    return fitted[:, None] - table.s(data.X @ loo.T)


def _fix_signs(vectors: FloatArray) -> FloatArray:
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(vectors.shape[0]), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def principal_components(R: FloatArray, count: int) -> SensitivityDecomposition:
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise EigenSolverError("sensitivity matrix has non-finite entries")
    count = min(count, R.shape[1])
    try:
        _, sing, vt = scipy.linalg.svd(R, full_matrices=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        with np.errstate(divide="ignore"):
            cond = float(np.linalg.cond(R))
        raise EigenSolverError("SVD of the sensitivity matrix failed", details={"condition": cond}) from exc

    directions = _fix_signs(vt[:count])
    return SensitivityDecomposition(
        R=R,
        directions=directions,
        components=(R @ directions.T).T,
        eigenvalues=sing[:count] ** 2,
    )


def psc(
    data: Dataset,
    fit: FitResult,
    table: MTable,
    count: int | None = None,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
    loo_start: str = "anchor",
) -> SensitivityDecomposition:
    """Residuals + the leading `count` (default p) principal sensitivity components."""
    R = sensitivity_matrix(data, fit, table, model, pool, loo_start)
    dec = principal_components(R, count or data.p)
    residuals = data.t(model) - table.s(data.X @ fit.beta)
    logger.debug("psc_done", n=data.n, count=dec.count, top_eigenvalue=float(dec.eigenvalues[0]))
    return SensitivityDecomposition(
        R=dec.R,
        directions=dec.directions,
        components=dec.components,
        eigenvalues=dec.eigenvalues,
        residuals=residuals,
    )
