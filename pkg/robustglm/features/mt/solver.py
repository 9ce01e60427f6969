"""MT estimator: bounded-loss M-estimation on transformed responses.

Each IRWLS step solves the weighted least-squares problem with rows
sqrt(w*_i) s'(x_i' beta) x_i and responses sqrt(w*_i) u_i, where
u_i = t(y_i) - s(x_i' beta) and w*(u) = psi(u)/u. Rows whose residual is
beyond c get weight exactly zero, which is what makes the fit redescending.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from robustglm.core.exceptions import DegenerateWeightsError, DivergenceError
from robustglm.core.logging import get_logger
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.lst.solver import relative_change
from robustglm.features.mloss.losses import LossSpec
from robustglm.features.mloss.mtable import MTable
from robustglm.shared.linalg import solve_weighted
from robustglm.shared.schemas import Dataset, FitResult

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]


def mt_residual_norm(X: FloatArray, T: FloatArray, eta: FloatArray, table: MTable, loss: LossSpec) -> float:
    """||X' W Psi||_inf at eta; zero at a solution of the MT estimating equation."""
    psi = np.asarray(loss.psi(T - table.s(eta)), dtype=float)
    return float(np.max(np.abs(X.T @ (table.s_prime(eta) * psi))))


def mt_fit(
    data: Dataset,
    table: MTable,
    loss: LossSpec,
    start: FloatArray,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
) -> FitResult:
    X, T = data.X, data.t(model)
    beta = np.asarray(start, dtype=float).copy()
    if beta.shape != (data.p,) or not np.all(np.isfinite(beta)):
        raise DivergenceError("MT start must be a finite vector of length p", details={"p": data.p})

    degraded = False
    converged = False
    iterations = 0
    while iterations < max_iter:
        eta = X @ beta
        u = T - table.s(eta)
        w = loss.weight(u)
        if not np.any(w > 0.0):
            raise DegenerateWeightsError(
                "all robust weights are zero; the start is too far from the data",
                details={"iteration": iterations + 1, "c": loss.c},
            )
        root_w = np.sqrt(w)
        step = solve_weighted((root_w * table.s_prime(eta))[:, None] * X, root_w * u)
        degraded |= step.degraded
        new = beta + step.delta
        if not np.all(np.isfinite(new)):
            raise DivergenceError("MT iterate is not finite", details={"iteration": iterations + 1})
        change = relative_change(new, beta)
        beta = new
        iterations += 1
        if change <= tol:
            converged = True
            break

    eta = X @ beta
    u = T - table.s(eta)
    w = loss.weight(u)
    logger.debug(
        "mt_fit_done",
        n=data.n,
        iterations=iterations,
        converged=converged,
        zero_weight=int(np.sum(w == 0.0)),
    )
    return FitResult(
        beta=beta,
        converged=converged,
        iterations=iterations,
        objective=float(np.sum(loss.rho(u))),
        eq_residual_norm=mt_residual_norm(X, T, eta, table, loss),
        estimator="mt",
        degraded=degraded,
        weights=w,
        telemetry={"zero_weight": int(np.sum(w == 0.0))},
    )
