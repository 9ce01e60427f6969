"""Non-deterministic and non-robust comparators: Poisson ML and SMT."""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from robustglm.core.exceptions import DivergenceError, DomainError, NumericalError, RankDeficiencyError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel
from robustglm.features.mloss.losses import LossSpec
from robustglm.features.mloss.mtable import MTable
from robustglm.features.mt.solver import mt_fit
from robustglm.features.psc_init.services import Candidate, CandidateSet, objective_L
from robustglm.shared.linalg import numerical_rank, solve_weighted
from robustglm.shared.schemas import Dataset, FitResult

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]

SUBSAMPLE_REDRAWS = 10
_ETA_BOUNDS = (-700.0, 700.0)


# maximum likelihood -----------------------------------------------------------


def _ml_irls(
    X: FloatArray,
    y: FloatArray,
    tol: float,
    max_iter: int,
) -> tuple[FloatArray, bool, int, bool]:
    """Fisher scoring for the log link: beta, converged, iterations, degraded."""
    eta = np.log(y + 0.1)
    beta: FloatArray | None = None
    degraded = False
    for it in range(1, max_iter + 1):
        mu = np.exp(eta)
        root_w = np.sqrt(mu)
        z = eta + (y - mu) / mu
        step = solve_weighted(root_w[:, None] * X, root_w * z)
        degraded |= step.degraded
        new = step.delta
        if not np.all(np.isfinite(new)):
            raise DivergenceError("ML iterate is not finite", details={"iteration": it})
        done = beta is not None and np.linalg.norm(new - beta) <= tol * max(float(np.linalg.norm(beta)), 1e-12)
        beta = new
        eta = np.clip(X @ beta, *_ETA_BOUNDS)
        if done:
            return beta, True, it, degraded
    assert beta is not None
    return beta, False, max_iter, degraded


def ml_fit(
    data: Dataset,
    tol: float = 1e-8,
    max_iter: int = 100,
    *,
    strict: bool = True,
) -> FitResult:
    """Poisson maximum likelihood by iteratively reweighted least squares.

    With ``strict`` a fit that does not converge within ``max_iter`` (typically
    because the MLE sits at infinity) raises DivergenceError.
    """
    y = data.y.astype(float)
    beta, converged, iterations, degraded = _ml_irls(data.X, y, tol, max_iter)
    if strict and not converged:
        raise DivergenceError(
            "ML did not converge; the likelihood may have no finite maximiser",
            details={"iterations": iterations},
        )
    mu = np.exp(np.clip(data.X @ beta, *_ETA_BOUNDS))
    deviance = 2.0 * float(np.sum(np.where(y > 0, y * np.log(np.where(y > 0, y, 1.0) / mu), 0.0) - (y - mu)))
    return FitResult(
        beta=beta,
        converged=converged,
        iterations=iterations,
        objective=deviance,
        eq_residual_norm=float(np.max(np.abs(data.X.T @ (y - mu)))),
        estimator="ml",
        degraded=degraded,
        weights=mu,
    )


# subsampling ------------------------------------------------------------------


def required_subsamples(eps: float, p: int, target_prob: float) -> int:
    """Smallest N with 1 - (1 - (1 - eps)^p)^N > target_prob."""
    if not 0.0 <= eps < 1.0:
        raise DomainError("eps must lie in [0, 1)", details={"eps": eps})
    if not 0.0 < target_prob < 1.0:
        raise DomainError("target_prob must lie in (0, 1)", details={"target_prob": target_prob})
    if p < 1:
        raise DomainError("p must be positive", details={"p": p})
    clean = (1.0 - eps) ** p
    if clean >= 1.0:
        return 1
    if clean <= 0.0:
        raise DomainError("no subsample can be clean", details={"eps": eps, "p": p})

    def covered(n: int) -> bool:
        return -math.expm1(n * math.log1p(-clean)) > target_prob

    n = max(1, math.floor(math.log1p(-target_prob) / math.log1p(-clean)))
    while n > 1 and covered(n - 1):
        n -= 1
    while not covered(n):
        n += 1
    return n


def _subsample_candidate(
    data: Dataset,
    seq: np.random.SeedSequence,
    max_iter: int,
) -> FloatArray | None:
    rng = np.random.default_rng(seq)
    try:
        for attempt in Retrying(
            stop=stop_after_attempt(SUBSAMPLE_REDRAWS),
            retry=retry_if_exception_type(RankDeficiencyError),
        ):
            with attempt:
                idx = np.sort(rng.choice(data.n, size=data.p, replace=False))
                X = data.X[idx]
                if numerical_rank(X) < data.p:
                    raise RankDeficiencyError("singular subsample", details={"rows": idx.tolist()})
                beta, _, _, _ = _ml_irls(X, data.y[idx].astype(float), 1e-8, max_iter)
    except RetryError:
        logger.debug("subsample_skipped", reason="singular", redraws=SUBSAMPLE_REDRAWS)
        return None
    except NumericalError as exc:
        logger.debug("subsample_skipped", reason=exc.error_code)
        return None
    return beta if np.all(np.isfinite(beta)) else None


def smt(
    data: Dataset,
    n_subsamples: int,
    loss: LossSpec,
    table: MTable,
    seed: int,
    *,
    subsample_max_iter: int = 10,
    tol: float = 1e-8,
    max_iter: int = 100,
    model: PoissonLogModel = POISSON,
    pool: WorkerPool = inline_pool,
) -> FitResult:
    """MT estimate started from the best of `n_subsamples` elemental ML fits."""
    if n_subsamples < 1:
        raise DomainError("n_subsamples must be at least 1", details={"n_subsamples": n_subsamples})
    streams = np.random.SeedSequence(seed).spawn(n_subsamples)

    def evaluate(seq: np.random.SeedSequence) -> Candidate | None:
        beta = _subsample_candidate(data, seq, subsample_max_iter)
        if beta is None:
            return None
        return Candidate(beta, objective_L(beta, data, table, loss, model), "subsample")

    found = [c for c in pool.map_ordered(evaluate, streams) if c is not None]
    if not found:
        raise NumericalError("every subsample fit failed", details={"n_subsamples": n_subsamples})
    start = CandidateSet(found).best()
    fit = mt_fit(data, table, loss, start.beta, tol=tol, max_iter=max_iter, model=model)
    fit.estimator = "smt"
    fit.telemetry.update(subsamples=n_subsamples, usable_subsamples=len(found), start_objective=start.objective)
    logger.debug("smt_done", usable=len(found), n_subsamples=n_subsamples, converged=fit.converged)
    return fit
