"""`robustglm psc`: residuals and principal sensitivity components as CSV."""

from __future__ import annotations

import argparse
from typing import Any

import numpy as np
import pandas as pd

from robustglm.core.exceptions import EXIT_NOT_CONVERGED, EXIT_OK
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool
from robustglm.features.lst.solver import lst_fit
from robustglm.features.mloss.losses import SQUARE
from robustglm.features.mloss.mtable import get_m_table
from robustglm.features.sensitivity.services import SensitivityDecomposition, psc
from robustglm.shared.data import read_dataset
from robustglm.shared.options import add_data_options, add_fit_options, add_run_options, fit_config_from_args
from robustglm.shared.output import emit_frame

logger = get_logger(__name__)


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("psc", help="principal sensitivity components of the LST fit")
    add_data_options(parser)
    parser.add_argument(
        "--components",
        type=int,
        default=None,
        help="number of components to report (default p)",
    )
    add_fit_options(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run_psc)


def psc_frame(dec: SensitivityDecomposition) -> pd.DataFrame:
    flags = dec.flags()
    n = dec.R.shape[0]
    columns: dict[str, Any] = {"index": np.arange(n), "e_i": dec.residuals}
    for k in range(dec.count):
        columns[f"z_{k + 1}"] = dec.components[k]
    for k in range(dec.count):
        columns[f"flagged_{k + 1}"] = flags[k].astype(int)
    columns["flagged"] = flags.any(axis=0).astype(int)
    return pd.DataFrame(columns)


def run_psc(args: argparse.Namespace) -> int:
    data = read_dataset(args.data, args.response, intercept=args.intercept)
    config = fit_config_from_args(args)
    table = get_m_table(SQUARE, threads=args.threads)
    fit = lst_fit(data, table, tol=config.tol, max_iter=config.max_iter)
    with WorkerPool(args.threads) as pool:
        dec = psc(data, fit, table, args.components, pool=pool, loo_start=config.init.loo_start)

    emit_frame(psc_frame(dec), args.output)
    if not fit.converged:
        logger.warning("psc_fit_not_converged", iterations=fit.iterations)
        return EXIT_NOT_CONVERGED
    return EXIT_OK
