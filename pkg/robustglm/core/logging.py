"""Logging setup: console lines by default, JSON when ROBUSTGLM_LOG_JSON is set.

structlog events are handed to the stdlib `logging` machinery and rendered
by a structlog ProcessorFormatter on a single stderr handler, so warnings
from numpy/scipy/pandas (captured through `logging`) look the same as ours.
stdout is reserved for fit documents and CSV tables.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import structlog

from robustglm.core.config import get_settings

_QUIET = ("matplotlib", "numexpr")


def setup_logging(level: str | None = None) -> None:
    settings = get_settings()
    numeric = getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.WARNING)

    shared_processors: list[Any] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_logger_name,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.StackInfoRenderer(),
    ]

    renderer: Any = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if settings.LOG_JSON
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            *shared_processors,
            structlog.processors.format_exc_info,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    formatter = structlog.stdlib.ProcessorFormatter(
        foreign_pre_chain=shared_processors,
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            renderer,
        ],
    )
    # resolved now, so a later call picks up a replaced sys.stderr
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    root = logging.getLogger()
    root.handlers = [handler]
    root.setLevel(numeric)
    logging.captureWarnings(True)
    for noisy in _QUIET:
        logging.getLogger(noisy).setLevel(logging.WARNING)


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)
