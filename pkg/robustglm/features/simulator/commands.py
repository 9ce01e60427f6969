"""`robustglm simulate`."""

from __future__ import annotations

import argparse
from typing import Any

from robustglm.core.exceptions import EXIT_OK, ValidationError
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.mt.pipeline import ESTIMATORS, FitContext
from robustglm.features.simulator.scenarios import FULL_SCALE, SimScenario
from robustglm.features.simulator.services import run_mse_grid
from robustglm.shared.options import add_fit_options, add_run_options, fit_config_from_args
from robustglm.shared.output import emit_frame


def _y0_grid(text: str) -> tuple[int, ...]:
    """start:stop:step, stop inclusive."""
    try:
        start, stop, step = (int(part) for part in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected start:stop:step with integers") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    return tuple(range(start, stop + 1, step))


def _estimator_list(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [n for n in names if n not in ESTIMATORS]
    if not names or unknown:
        raise argparse.ArgumentTypeError(f"choose from {','.join(sorted(ESTIMATORS))}")
    return names


def register(subparsers: Any) -> None:
    parser = subparsers.add_parser("simulate", help="Monte Carlo MSE over a grid of outlier responses")
    parser.add_argument("--model", type=int, choices=[1, 2, 3, 4], default=1, help="simulation model (default 1)")
    parser.add_argument("--n", type=int, default=None, help="observations per dataset (default 200)")
    parser.add_argument("--p", type=int, default=None, help="coefficients including the intercept (default 10)")
    parser.add_argument("--reps", type=int, default=None, help="replications per grid point (default 100)")
    parser.add_argument("--eps", type=float, default=0.10, help="contamination fraction in [0, 0.5) (default 0.1)")
    parser.add_argument(
        "--estimators",
        type=_estimator_list,
        default=["fmt", "ml"],
        help="comma separated subset of fmt,smt,lst,ml (default fmt,ml)",
    )
    parser.add_argument(
        "--x0-variant",
        choices=["text", "caption"],
        default="text",
        help="outlier covariate: text e1+3e2 or caption 3e1+e2 (default text)",
    )
    parser.add_argument(
        "--y0-grid",
        type=_y0_grid,
        default=None,
        help="start:stop:step (default 0..3*mu0 in steps of max(1, mu0/10))",
    )
    parser.add_argument(
        "--paper-scale",
        "--full-scale",
        dest="full_scale",
        action="store_true",
        help=f"n={FULL_SCALE['n']}, p={FULL_SCALE['p']}, reps={FULL_SCALE['reps']} unless given explicitly",
    )
    add_fit_options(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run_simulate)


def scenario_from_args(args: argparse.Namespace) -> SimScenario:
    sizes = {k: getattr(args, k) for k in ("n", "p", "reps") if getattr(args, k) is not None}
    if args.seed < 0:
        raise ValidationError("seed must be non-negative", details={"seed": args.seed})
    base = {
        "model": args.model,
        "eps": args.eps,
        "seed": args.seed,
        "x0_variant": args.x0_variant,
        "y0_grid": args.y0_grid,
        **sizes,
    }
    return SimScenario.full_scale(**base) if args.full_scale else SimScenario(**base)


def run_simulate(args: argparse.Namespace) -> int:
    scenario = scenario_from_args(args)
    config = fit_config_from_args(args)
    ctx = FitContext.build(config, pool=inline_pool, threads=args.threads)
    with WorkerPool(args.threads) as pool:
        result = run_mse_grid(scenario, args.estimators, ctx, pool=pool)
    emit_frame(result.to_frame(timings=args.timings), args.output)
    return EXIT_OK
