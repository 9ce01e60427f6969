"""Monte Carlo harness: generate, contaminate, fit, score."""

from __future__ import annotations

import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from robustglm.core.config import get_settings
from robustglm.core.exceptions import ApplicationError, ValidationError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.mt.pipeline import ESTIMATORS, FitContext
from robustglm.features.simulator.scenarios import SimScenario
from robustglm.shared.schemas import INTERCEPT, Dataset

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]

CSV_COLUMNS = ["model", "n", "p", "estimator", "eps", "y0", "mse", "n_ok", "n_fail", "mean_time_s", "seed"]
# appended after the fixed columns when timings are requested
TIMING_COLUMNS = ["p90_time_s"]


def generate_dataset(scenario: SimScenario, rep: int) -> Dataset:
    """x = (1, x*) with x* ~ N(0, I), y | x ~ Poisson(exp(beta0' x)); keyed on (seed, rep)."""
    rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, rep]))
    n, p = scenario.n, scenario.p
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
    y = rng.poisson(np.exp(X @ scenario.beta0))
    columns = (INTERCEPT, *(f"x{j}" for j in range(2, p + 1)))
    return Dataset(X=X, y=y, columns=columns)


def contaminate(data: Dataset, eps: float, x0: ArrayLike, y0: int) -> Dataset:
    """Replace the first floor(eps * n) rows by the point (x0, y0)."""
    if not 0.0 <= eps < 0.5:
        raise ValidationError("eps must lie in [0, 0.5)", details={"eps": eps})
    k = math.floor(eps * data.n)
    if k == 0:
        return data
    X = data.X.copy()
    y = data.y.copy()
    X[:k] = np.asarray(x0, dtype=float)
    y[:k] = int(y0)
    return Dataset(X=X, y=y, columns=data.columns)


def cell_seed(base: int, y0: int | None, rep: int) -> int:
    """Seed for randomised estimators in one (y0, rep) cell."""
    key = 0 if y0 is None else int(y0) + 1
    return int(np.random.SeedSequence([base, key, rep]).generate_state(1)[0])


@dataclass
class SimCell:
    estimator: str
    y0: int | None
    errors: list[float] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    n_fail: int = 0

    @property
    def n_ok(self) -> int:
        return len(self.errors)

    @property
    def mse(self) -> float:
        return float(np.mean(self.errors)) if self.errors else float("nan")

    @property
    def mean_time_s(self) -> float:
        return float(np.mean(self.times)) if self.times else float("nan")

    @property
    def p90_time_s(self) -> float:
        return float(np.percentile(self.times, 90)) if self.times else float("nan")


@dataclass
class SimResult:
    scenario: SimScenario
    cells: list[SimCell]
    version: str = field(default_factory=lambda: get_settings().VERSION)

    def cell(self, estimator: str, y0: int | None) -> SimCell:
        for c in self.cells:
            if c.estimator == estimator and c.y0 == y0:
                return c
        raise KeyError((estimator, y0))

    def max_mse(self, estimator: str) -> float:
        return max(c.mse for c in self.cells if c.estimator == estimator)

    def to_frame(self, *, timings: bool = True) -> pd.DataFrame:
        """One row per (estimator, y0); timing fields are blank or absent unless `timings`."""
        sc = self.scenario
        rows = [
            {
                "model": sc.model,
                "n": sc.n,
                "p": sc.p,
                "estimator": c.estimator,
                "eps": sc.eps,
                "y0": c.y0,
                "mse": c.mse,
                "n_ok": c.n_ok,
                "n_fail": c.n_fail,
                "mean_time_s": c.mean_time_s if timings else None,
                "seed": sc.seed,
                **({"p90_time_s": c.p90_time_s} if timings else {}),
            }
            for c in self.cells
        ]
        frame = pd.DataFrame(rows, columns=CSV_COLUMNS + TIMING_COLUMNS if timings else CSV_COLUMNS)
        frame["y0"] = frame["y0"].astype("Int64")
        return frame

    def to_csv(self, path: Path | None = None, *, timings: bool = True) -> str:
        text = self.to_frame(timings=timings).to_csv(index=False, lineterminator="\n")
        if path is not None:
            path.write_text(text, encoding="utf-8", newline="\n")
        return text


def _run_replication(
    scenario: SimScenario,
    estimators: Sequence[str],
    ctx: FitContext,
    y0: int | None,
    rep: int,
) -> list[tuple[float | None, float]]:
    data = generate_dataset(scenario, rep)
    if y0 is not None:
        data = contaminate(data, scenario.eps, scenario.x0, y0)
    seed = cell_seed(scenario.seed, y0, rep)
    out: list[tuple[float | None, float]] = []
    for name in estimators:
        started = time.perf_counter()
        try:
            fit = ESTIMATORS[name](data, ctx, seed)
        except ApplicationError as exc:
            logger.info("replication_failed", estimator=name, y0=y0, rep=rep, code=exc.error_code)
            out.append((None, time.perf_counter() - started))
            continue
        elapsed = time.perf_counter() - started
        out.append((float(np.sum((fit.beta - scenario.beta0) ** 2)), elapsed))
    return out


def run_mse_grid(
    scenario: SimScenario,
    estimators: Sequence[str],
    ctx: FitContext | None = None,
    pool: WorkerPool = inline_pool,
) -> SimResult:
    """MSE-hat per (estimator, y0) over `scenario.reps` replications.

    Replications run on `pool`; the estimators inside one replication use the
    context's own pool, which should be single-threaded when `pool` is not.
    """
    unknown = [e for e in estimators if e not in ESTIMATORS]
    if unknown or not estimators:
        raise ValidationError("unknown estimator", details={"unknown": unknown, "known": sorted(ESTIMATORS)})
    ctx = ctx or FitContext.build()
    cells: list[SimCell] = []

    for y0 in scenario.grid():
        results = pool.map_ordered(
            lambda rep, y0=y0: _run_replication(scenario, estimators, ctx, y0, rep),
            range(scenario.reps),
        )
        row = [SimCell(estimator=name, y0=y0) for name in estimators]
        for per_rep in results:
            for cell, (err, elapsed) in zip(row, per_rep, strict=True):
                if err is None:
                    cell.n_fail += 1
                else:
                    cell.errors.append(err)
                    cell.times.append(elapsed)
        cells.extend(row)
        logger.info(
            "grid_point_done",
            y0=y0,
            mse={c.estimator: round(c.mse, 6) for c in row},
            failures={c.estimator: c.n_fail for c in row},
        )
    return SimResult(scenario=scenario, cells=cells)
