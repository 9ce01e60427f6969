"""Deterministic two-stage robust start for the MT estimator.

Stage 1 builds candidate sets from principal sensitivity components: for
every component three half-samples are deleted (smallest, largest and
largest-absolute entries) and LST is refit on the rest. The candidate with
the smallest bounded objective L on the full sample wins; then the sample is
trimmed with Poisson quantile bounds from that winner and the procedure is
repeated until it settles.

Stage 2 trades some of that robustness back for efficiency: trim, refit,
restore the deleted observations that now look plausible, refit once more.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from robustglm.core.exceptions import ApplicationError, NumericalError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.lst.solver import lst_fit, relative_change
from robustglm.features.mloss.losses import LossSpec
from robustglm.features.mloss.mtable import MTable
from robustglm.features.sensitivity.services import SensitivityDecomposition, psc
from robustglm.shared.schemas import Dataset, FitResult, InitConfig

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]
IndexArray = NDArray[np.int64]

Provenance = Literal["full", "trimmed-lst", "prev", "psc-small", "psc-large", "psc-abs", "subsample"]


@dataclass(frozen=True, eq=False)
class Candidate:
    beta: FloatArray
    objective: float
    provenance: Provenance
    component: int | None = None


@dataclass
class CandidateSet:
    candidates: list[Candidate] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def best(self) -> Candidate:
        if not self.candidates:
            raise NumericalError("candidate set is empty")
        objectives = np.array([c.objective for c in self.candidates])
        # argmin returns the first minimiser, so ties go to the lowest index
        return self.candidates[int(np.argmin(objectives))]


def objective_L(
    beta: FloatArray,
    data: Dataset,
    table: MTable,
    loss: LossSpec,
    model: PoissonLogModel = POISSON,
) -> float:
    """sum_i rho(t(y_i) - s(x_i' beta)) over the full sample."""
    resid = data.t(model) - table.s(data.X @ beta)
    value = float(np.sum(loss.rho(resid)))
    return value if np.isfinite(value) else float("inf")


def within_bounds(
    X: FloatArray,
    y: FloatArray,
    beta: FloatArray,
    alpha: float,
    model: PoissonLogModel = POISSON,
) -> NDArray[np.bool_]:
    """Mask of rows with F^-1(alpha/2) <= y <= F^-1(1 - alpha/2) at mu = exp(x' beta).

    Works on raw arrays so any number of rows can be tested, including fewer
    rows than coefficients.
    """
    mu = model.inverse_link(np.clip(X @ beta, -745.0, 700.0))
    lower = model.quantiles(alpha / 2.0, mu)
    upper = model.quantiles(1.0 - alpha / 2.0, mu)
    return (y >= lower) & (y <= upper)


def trim_indices(
    data: Dataset,
    beta: FloatArray,
    alpha: float,
    model: PoissonLogModel = POISSON,
) -> IndexArray:
    """Indices of the rows kept by the Poisson quantile bounds at beta."""
    return np.flatnonzero(within_bounds(data.X, data.y, beta, alpha, model)).astype(np.int64)


def restore_indices(
    data: Dataset,
    removed: IndexArray,
    beta: FloatArray,
    alpha: float,
    model: PoissonLogModel = POISSON,
) -> IndexArray:
    """Subset of the removed rows that fall back inside the bounds at beta."""
    if removed.size == 0:
        return removed
    mask = within_bounds(data.X[removed], data.y[removed], beta, alpha, model)
    return removed[mask]


def _deletion_plans(dec: SensitivityDecomposition, n_delete: int) -> list[tuple[Provenance, int, IndexArray]]:
    plans: list[tuple[Provenance, int, IndexArray]] = []
    for k, z in enumerate(dec.components):
        order = np.argsort(z, kind="stable")
        by_size = np.argsort(-np.abs(z), kind="stable")
        plans.append(("psc-small", k, order[:n_delete]))
        plans.append(("psc-large", k, order[len(order) - n_delete :]))
        plans.append(("psc-abs", k, by_size[:n_delete]))
    return plans


def candidate_set(
    data: Dataset,
    dec: SensitivityDecomposition,
    work_fit: FitResult,
    lst_table: MTable,
    mt_table: MTable,
    loss: LossSpec,
    *,
    work_rows: IndexArray | None = None,
    head: list[Candidate] | None = None,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
) -> CandidateSet:
    """A_k: `head` (or the full fit), then three half-sample deletions per component.

    `dec` and `work_fit` belong to the working sample `data.subset(work_rows)`;
    every objective is evaluated on the full `data`.
    """
    rows = np.arange(data.n, dtype=np.int64) if work_rows is None else work_rows
    work = data.subset(rows)
    min_kept = InitConfig.min_kept(data.p)
    n_delete = InitConfig.n_delete(work.n)

    def score(beta: FloatArray) -> float:
        return objective_L(beta, data, mt_table, loss, model)

    out = CandidateSet(list(head) if head is not None else [Candidate(work_fit.beta, score(work_fit.beta), "full")])

    def fit_plan(plan: tuple[Provenance, int, IndexArray]) -> Candidate | None:
        tag, k, deleted = plan
        kept = np.setdiff1d(np.arange(work.n), deleted)
        if kept.size < min_kept:
            logger.info("candidate_dropped", provenance=tag, component=k + 1, reason="too_few_rows", kept=kept.size)
            return None
        try:
            fit = lst_fit(work.subset(kept), lst_table, tol=tol, max_iter=max_iter, model=model)
        except ApplicationError as exc:
            logger.info("candidate_dropped", provenance=tag, component=k + 1, reason=exc.error_code)
            return None
        return Candidate(fit.beta, score(fit.beta), tag, component=k + 1)

    for cand in pool.map_ordered(fit_plan, _deletion_plans(dec, n_delete)):
        if cand is not None:
            out.candidates.append(cand)
    return out


def stage1(
    data: Dataset,
    cfg: InitConfig,
    lst_table: MTable,
    mt_table: MTable,
    loss: LossSpec,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
) -> FitResult:
    """Highly robust, possibly inefficient estimate."""
    full_fit = lst_fit(data, lst_table, tol=tol, max_iter=max_iter, model=model)
    dec = psc(data, full_fit, lst_table, model=model, pool=pool, loo_start=cfg.loo_start)
    cands = candidate_set(data, dec, full_fit, lst_table, mt_table, loss, tol=tol, max_iter=max_iter, model=model, pool=pool)
    best = cands.best()
    sizes = [len(cands)]
    trace = [best.objective]
    winners = [best.provenance]
    converged = False
    iterations = 1

    while iterations < cfg.stage1_max_iter:
        kept = trim_indices(data, best.beta, cfg.alpha, model)
        if kept.size < InitConfig.min_kept(data.p):
            logger.warning("stage1_trim_too_aggressive", kept=kept.size, n=data.n)
            break
        work = data.subset(kept)
        try:
            work_fit = lst_fit(work, lst_table, tol=tol, max_iter=max_iter, model=model)
            dec = psc(work, work_fit, lst_table, model=model, pool=pool, loo_start=cfg.loo_start)
        except ApplicationError as exc:
            logger.warning("stage1_iteration_failed", iteration=iterations + 1, reason=exc.error_code)
            break
        head = [
            Candidate(best.beta, best.objective, "prev"),
            Candidate(work_fit.beta, objective_L(work_fit.beta, data, mt_table, loss, model), "trimmed-lst"),
        ]
        cands = candidate_set(
            data,
            dec,
            work_fit,
            lst_table,
            mt_table,
            loss,
            work_rows=kept,
            head=head,
            tol=tol,
            max_iter=max_iter,
            model=model,
            pool=pool,
        )
        new = cands.best()
        iterations += 1
        change = relative_change(new.beta, best.beta)
        best = new
        sizes.append(len(cands))
        trace.append(best.objective)
        winners.append(best.provenance)
        logger.debug(
            "stage1_iteration",
            iteration=iterations,
            trimmed=data.n - kept.size,
            candidates=len(cands),
            objective=best.objective,
            change=change,
        )
        if change <= cfg.stage1_tol:
            converged = True
            break

    return FitResult(
        beta=best.beta,
        converged=converged,
        iterations=iterations,
        objective=best.objective,
        eq_residual_norm=float("nan"),
        estimator="stage1",
        telemetry={"candidates": sizes, "objective_trace": trace, "winners": winners},
    )


def stage2(
    data: Dataset,
    beta1: FloatArray,
    cfg: InitConfig,
    table: MTable,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
) -> FitResult:
    """Trim, refit, restore the plausible deleted rows, refit."""
    kept = trim_indices(data, beta1, cfg.alpha, model)
    if kept.size == data.n:
        fit = lst_fit(data, table, tol=tol, max_iter=max_iter, model=model)
        fit.estimator = "stage2"
        fit.telemetry.update(trimmed=0, restored=0)
        return fit
    if kept.size < InitConfig.min_kept(data.p):
        logger.warning("stage2_trim_too_aggressive", kept=kept.size, n=data.n)
        kept = np.arange(data.n, dtype=np.int64)

    interim = lst_fit(data.subset(kept), table, tol=tol, max_iter=max_iter, model=model)
    removed = np.setdiff1d(np.arange(data.n), kept)
    restored = restore_indices(data, removed, interim.beta, cfg.alpha, model)
    final_rows = np.union1d(kept, restored)

    fit = lst_fit(data.subset(final_rows), table, tol=tol, max_iter=max_iter, model=model)
    fit.estimator = "stage2"
    fit.telemetry.update(
        trimmed=int(data.n - kept.size),
        restored=int(restored.size),
        excluded=[int(i) for i in np.setdiff1d(np.arange(data.n), final_rows)],
    )
    logger.debug("stage2_done", trimmed=data.n - kept.size, restored=restored.size, iterations=fit.iterations)
    return fit


def initial_estimate(
    data: Dataset,
    cfg: InitConfig,
    lst_table: MTable,
    mt_table: MTable,
    loss: LossSpec,
    *,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
) -> tuple[FitResult, FitResult]:
    first = stage1(data, cfg, lst_table, mt_table, loss, tol=tol, max_iter=max_iter, model=model, pool=pool)
    second = stage2(data, first.beta, cfg, lst_table, tol=tol, max_iter=max_iter, model=model)
    return first, second
