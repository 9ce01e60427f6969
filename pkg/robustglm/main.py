"""Command-line application factory."""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from typing import NoReturn

import pydantic

from robustglm.core.config import get_settings
from robustglm.core.exceptions import ValidationError, report_error
from robustglm.core.logging import get_logger, setup_logging
from robustglm.features.mt import commands as fit_commands
from robustglm.features.sensitivity import commands as psc_commands
from robustglm.features.simulator import commands as simulate_commands


class _Parser(argparse.ArgumentParser):
    """Parse errors become ValidationError so they share the exit-code contract."""

    def error(self, message: str) -> NoReturn:
        raise ValidationError(message, error_code="usage", details={"usage": self.format_usage().strip()})


def create_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = _Parser(
        prog=settings.APP_NAME,
        description="Robust Poisson regression: MT estimators, sensitivity diagnostics, simulations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument("--log-level", default=None, help=f"log level (default {settings.LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{fit,psc,simulate}")

    fit_commands.register(sub)
    psc_commands.register(sub)
    simulate_commands.register(sub)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    setup_logging()
    parser = create_parser()
    command = "robustglm"
    try:
        args = parser.parse_args(argv)
        command = args.command
        if args.log_level:
            setup_logging(args.log_level)
        get_logger(__name__).debug("command_start", command=command)
        return int(args.handler(args))
    except SystemExit as exc:
        # --help / --version
        return int(exc.code or 0)
    except pydantic.ValidationError as exc:
        problems = [f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()]
        return report_error(ValidationError("invalid parameters", details={"errors": problems}), command)
    except Exception as exc:
        return report_error(exc, command)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
