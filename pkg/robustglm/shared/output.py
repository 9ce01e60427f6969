"""Single place that writes command results: stdout unless --output is given."""

from __future__ import annotations

import sys
from pathlib import Path

import pandas as pd
from pydantic import BaseModel


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text, encoding="utf-8", newline="\n")


def emit_document(doc: BaseModel, output: Path | None = None) -> None:
    _write(doc.model_dump_json(indent=2) + "\n", output)


def emit_frame(frame: pd.DataFrame, output: Path | None = None) -> None:
    _write(frame.to_csv(index=False, lineterminator="\n"), output)
