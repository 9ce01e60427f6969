"""argparse flags shared by several commands."""

from __future__ import annotations

import argparse
from pathlib import Path

from robustglm.core.config import get_settings
from robustglm.shared.schemas import FitConfig, InitConfig


def add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, required=True, help="input CSV with a header row")
    parser.add_argument("--response", required=True, help="name of the count response column")
    parser.add_argument(
        "--no-intercept",
        dest="intercept",
        action="store_false",
        help="do not prepend an intercept column (default: intercept on)",
    )


def add_fit_options(parser: argparse.ArgumentParser) -> None:
    s = get_settings()
    parser.add_argument("--c", type=float, default=s.BISQUARE_C, help=f"bisquare tuning constant (default {s.BISQUARE_C})")
    parser.add_argument("--alpha", type=float, default=s.ALPHA, help=f"trimming constant in (0, 0.5) (default {s.ALPHA})")
    parser.add_argument("--tol", type=float, default=s.TOL, help=f"relative-change tolerance (default {s.TOL:g})")
    parser.add_argument("--max-iter", type=int, default=s.MAX_ITER, help=f"IRWLS iteration cap (default {s.MAX_ITER})")
    parser.add_argument(
        "--subsamples", type=int, default=s.SUBSAMPLES, help=f"SMT subsample count (default {s.SUBSAMPLES})"
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for randomised estimators (default 0)")
    parser.add_argument(
        "--loo-start",
        choices=["anchor", "eta0"],
        default="anchor",
        help="start of the one-step leave-one-out fits (default anchor)",
    )


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default ROBUSTGLM_THREADS, else all cores)",
    )
    parser.add_argument("--output", type=Path, default=None, help="write here instead of stdout")
    parser.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock timings (output is then no longer reproducible byte for byte)",
    )


def fit_config_from_args(args: argparse.Namespace) -> FitConfig:
    return FitConfig(
        c=args.c,
        tol=args.tol,
        max_iter=args.max_iter,
        subsamples=args.subsamples,
        seed=args.seed,
        init=InitConfig(alpha=args.alpha, loo_start=args.loo_start),
    )
