"""Estimator pipelines shared by the `fit` command and the simulator."""

from __future__ import annotations

import time
from collections.abc import Callable
from dataclasses import dataclass, field

from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.lst.solver import lst_fit
from robustglm.features.mloss.losses import SQUARE, LossSpec, bisquare
from robustglm.features.mloss.mtable import MGridConfig, MTable, get_m_table
from robustglm.features.mt.baselines import ml_fit, smt
from robustglm.features.mt.solver import mt_fit
from robustglm.features.psc_init.services import stage1, stage2
from robustglm.shared.schemas import Dataset, FitConfig, FitResult

logger = get_logger(__name__)


@dataclass
class FitContext:
    """Everything an estimator needs besides the data."""

    config: FitConfig
    loss: LossSpec
    lst_table: MTable
    mt_table: MTable
    model: PoissonLogModel = POISSON
    pool: WorkerPool = field(default=inline_pool)

    @classmethod
    def build(
        cls,
        config: FitConfig | None = None,
        *,
        pool: WorkerPool = inline_pool,
        grid: MGridConfig | None = None,
        model: PoissonLogModel = POISSON,
        threads: int | None = None,
    ) -> FitContext:
        """`threads` caps any m-table build this triggers; `pool` is what the estimators use."""
        config = config or FitConfig.from_settings()
        loss = bisquare(config.c)
        return cls(
            config=config,
            loss=loss,
            lst_table=get_m_table(SQUARE, grid, model, threads=threads),
            mt_table=get_m_table(loss, grid, model, threads=threads),
            model=model,
            pool=pool,
        )


def fmt(data: Dataset, ctx: FitContext) -> FitResult:
    """Stage 1, stage 2, then the MT iteration from the stage-2 estimate."""
    cfg = ctx.config
    common = {"tol": cfg.tol, "max_iter": cfg.max_iter, "model": ctx.model}

    t0 = time.perf_counter()
    first = stage1(data, cfg.init, ctx.lst_table, ctx.mt_table, ctx.loss, pool=ctx.pool, **common)
    t1 = time.perf_counter()
    second = stage2(data, first.beta, cfg.init, ctx.lst_table, **common)
    t2 = time.perf_counter()
    fit = mt_fit(data, ctx.mt_table, ctx.loss, second.beta, **common)
    t3 = time.perf_counter()

    fit.estimator = "fmt"
    fit.degraded |= second.degraded
    fit.telemetry.update(
        stage1_iterations=first.iterations,
        stage1_converged=first.converged,
        stage1_candidates=first.telemetry["candidates"],
        stage1_objective=first.objective,
        stage2_trimmed=second.telemetry["trimmed"],
        stage2_restored=second.telemetry["restored"],
        timings={"stage1_s": t1 - t0, "stage2_s": t2 - t1, "mt_s": t3 - t2},
    )
    logger.info(
        "fmt_done",
        n=data.n,
        p=data.p,
        stage1_iterations=first.iterations,
        trimmed=second.telemetry["trimmed"],
        converged=fit.converged,
    )
    return fit


def _fmt(data: Dataset, ctx: FitContext, seed: int) -> FitResult:
    return fmt(data, ctx)


def _smt(data: Dataset, ctx: FitContext, seed: int) -> FitResult:
    cfg = ctx.config
    return smt(
        data,
        cfg.subsamples,
        ctx.loss,
        ctx.mt_table,
        seed,
        subsample_max_iter=cfg.subsample_max_iter,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
        model=ctx.model,
        pool=ctx.pool,
    )


def _lst(data: Dataset, ctx: FitContext, seed: int) -> FitResult:
    return lst_fit(data, ctx.lst_table, tol=ctx.config.tol, max_iter=ctx.config.max_iter, model=ctx.model)


def _ml(data: Dataset, ctx: FitContext, seed: int) -> FitResult:
    return ml_fit(data, tol=ctx.config.tol, max_iter=ctx.config.max_iter)


Estimator = Callable[[Dataset, FitContext, int], FitResult]

ESTIMATORS: dict[str, Estimator] = {
    "fmt": _fmt,
    "smt": _smt,
    "lst": _lst,
    "ml": _ml,
}
