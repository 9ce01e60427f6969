"""`robustglm fit`."""

from __future__ import annotations

import argparse
from typing import Any

from robustglm.core.config import get_settings
from robustglm.core.exceptions import EXIT_NOT_CONVERGED, EXIT_OK
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool
from robustglm.features.mt.pipeline import ESTIMATORS, FitContext
from robustglm.shared.data import read_dataset
from robustglm.shared.options import add_data_options, add_fit_options, add_run_options, fit_config_from_args
from robustglm.shared.output import emit_document
from robustglm.shared.schemas import Dataset, FitDocument, FitResult

logger = get_logger(__name__)


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("fit", help="fit a Poisson regression with one estimator")
    add_data_options(parser)
    parser.add_argument(
        "--estimator",
        choices=sorted(ESTIMATORS),
        default="fmt",
        help="fmt (default), smt, lst or ml",
    )
    add_fit_options(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run_fit)


def fit_document(data: Dataset, fit: FitResult, *, timings: bool = False) -> FitDocument:
    s = get_settings()
    telemetry = {k: v for k, v in fit.telemetry.items() if timings or k != "timings"}
    return FitDocument(
        app=s.APP_NAME,
        version=s.VERSION,
        estimator=fit.estimator,
        n=data.n,
        p=data.p,
        coefficients={name: float(b) for name, b in zip(data.columns, fit.beta, strict=True)},
        converged=fit.converged,
        iterations=fit.iterations,
        objective=fit.objective,
        eq_residual_norm=fit.eq_residual_norm,
        degraded=fit.degraded,
        telemetry=telemetry,
    )


def run_fit(args: argparse.Namespace) -> int:
    data = read_dataset(args.data, args.response, intercept=args.intercept)
    config = fit_config_from_args(args)
    with WorkerPool(args.threads) as pool:
        ctx = FitContext.build(config, pool=pool, threads=args.threads)
        fit = ESTIMATORS[args.estimator](data, ctx, config.seed)

    emit_document(fit_document(data, fit, timings=args.timings), args.output)
    if not fit.converged:
        logger.warning("fit_not_converged", estimator=args.estimator, iterations=fit.iterations)
        return EXIT_NOT_CONVERGED
    return EXIT_OK
