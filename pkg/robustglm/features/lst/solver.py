"""Transformed least squares (LST) by iteratively reweighted least squares.

With s(eta) = m(exp(eta)) from the square-loss table and W = diag(s'(X beta)),
each iteration is

    beta_{k+1} = beta_k + (X' W^2 X)^{-1} X' W (T - s(X beta_k))

i.e. a least-squares fit of the residuals on the rows s'(x_i' beta_k) x_i.
Without a start the first step is taken from the linear predictor
eta_0 = log(y + 0.1), which needs no coefficients at all.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from robustglm.core.exceptions import DivergenceError, NumericalError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.mloss.mtable import MTable
from robustglm.shared.linalg import solve_weighted
from robustglm.shared.schemas import Dataset, FitResult

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]

ETA0_OFFSET = 0.1
_LEVERAGE_SLACK = 1e-8


def eta0(y: NDArray[np.int64]) -> FloatArray:
    return np.log(np.asarray(y, dtype=float) + ETA0_OFFSET)


def relative_change(new: FloatArray, old: FloatArray) -> float:
    return float(np.linalg.norm(new - old) / max(float(np.linalg.norm(old)), 1e-12))


def lst_residual_norm(X: FloatArray, T: FloatArray, eta: FloatArray, table: MTable) -> float:
    """||X' W (T - s(eta))||_inf, zero at an LST fixed point."""
    return float(np.max(np.abs(X.T @ (table.s_prime(eta) * (T - table.s(eta))))))


def _step_from_eta(X: FloatArray, T: FloatArray, eta: FloatArray, table: MTable) -> tuple[FloatArray, bool]:
    # (X'W^2X)^{-1}(X'W^2 eta + X'W(T - s(eta))): only the linear predictor is needed
    sp = table.s_prime(eta)
    step = solve_weighted(sp[:, None] * X, sp * eta + (T - table.s(eta)))
    return step.delta, step.degraded


def _increment(X: FloatArray, T: FloatArray, beta: FloatArray, table: MTable) -> tuple[FloatArray, bool]:
    eta = X @ beta
    sp = table.s_prime(eta)
    step = solve_weighted(sp[:, None] * X, T - table.s(eta))
    return step.delta, step.degraded


def lst_fit(
    data: Dataset,
    table: MTable,
    start: FloatArray | None = None,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
) -> FitResult:
    X, T = data.X, data.t(model)
    degraded = False
    trace: list[float] = []

    if start is None:
        beta, degraded = _step_from_eta(X, T, eta0(data.y), table)
        iterations = 1
    else:
        beta = np.asarray(start, dtype=float).copy()
        iterations = 0
    if not np.all(np.isfinite(beta)):
        raise DivergenceError("LST start step is not finite")

    converged = False
    while iterations < max_iter:
        delta, was_degraded = _increment(X, T, beta, table)
        degraded |= was_degraded
        new = beta + delta
        if not np.all(np.isfinite(new)):
            raise DivergenceError("LST iterate is not finite", details={"iteration": iterations + 1})
        change = relative_change(new, beta)
        beta = new
        iterations += 1
        if len(trace) < 5:
            trace.append(float(np.sum((T - table.s(X @ beta)) ** 2)))
        if change <= tol:
            converged = True
            break

    eta = X @ beta
    resid = T - table.s(eta)
    result = FitResult(
        beta=beta,
        converged=converged,
        iterations=iterations,
        objective=float(np.sum(resid**2)),
        eq_residual_norm=lst_residual_norm(X, T, eta, table),
        estimator="lst",
        degraded=degraded,
        weights=table.s_prime(eta),
        telemetry={"objective_trace": trace},
    )
    logger.debug(
        "lst_fit_done",
        n=data.n,
        p=data.p,
        iterations=iterations,
        converged=converged,
        degraded=degraded,
    )
    return result


def lst_onestep(
    data: Dataset,
    anchor: FloatArray | None,
    table: MTable,
    model: PoissonLogModel = POISSON,
) -> FloatArray:
    """Exactly one LST update on `data`, from `anchor` (or from eta_0 when None)."""
    X, T = data.X, data.t(model)
    if anchor is None:
        beta, _ = _step_from_eta(X, T, eta0(data.y), table)
        return beta
    delta, _ = _increment(X, T, np.asarray(anchor, dtype=float), table)
    return np.asarray(anchor, dtype=float) + delta


def lst_onestep_all(
    data: Dataset,
    anchor: FloatArray | None,
    table: MTable,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
) -> FloatArray:
    """Row j holds lst_onestep(data without j, anchor).

    All n deletions share the weighted normal matrix M = A'A of the full
    sample, so each is a rank-one downdate (Sherman-Morrison):

        beta_(j) = x0 + b* + u_j (a_j' b* - r_j) / (1 - h_j)

    with u_j = M^{-1} a_j, h_j = a_j' u_j and b* = M^{-1} A' r. Rows whose
    leverage is numerically one are recomputed directly on the reduced sample.
    """
    X, T = data.X, data.t(model)
    if anchor is None:
        origin = np.zeros(data.p)
        eta = eta0(data.y)
        sp = table.s_prime(eta)
        rhs = sp * eta + (T - table.s(eta))
    else:
        origin = np.asarray(anchor, dtype=float)
        eta = X @ origin
        sp = table.s_prime(eta)
        rhs = T - table.s(eta)
    A = sp[:, None] * X

    def direct(j: int) -> FloatArray:
        try:
            return lst_onestep(data.drop(j), anchor, table, model)
        except NumericalError as exc:
            exc.details.setdefault("deleted_index", j)
            raise

    try:
        factor = scipy.linalg.cho_factor(A.T @ A)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        logger.info("loo_downdate_unavailable", n=data.n, p=data.p)
        return np.vstack(pool.map_ordered(direct, range(data.n)))

    U = scipy.linalg.cho_solve(factor, A.T)
    leverage = np.einsum("ij,ji->i", A, U)
    base = scipy.linalg.cho_solve(factor, A.T @ rhs)
    room = 1.0 - leverage
    safe = room > _LEVERAGE_SLACK
    coef = np.where(safe, (A @ base - rhs) / np.where(safe, room, 1.0), 0.0)
    out = origin + base + U.T * coef[:, None]

    unsafe = np.flatnonzero(~safe)
    if unsafe.size:
        out[unsafe] = np.vstack(pool.map_ordered(direct, unsafe.tolist()))
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(out), axis=1))[0])
        raise DivergenceError("leave-one-out step is not finite", details={"deleted_index": bad})
    return out
