"""CSV input."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from robustglm.core.exceptions import ValidationError
from robustglm.core.logging import get_logger
from robustglm.shared.schemas import Dataset

logger = get_logger(__name__)


def dataset_from_frame(frame: pd.DataFrame, response: str, *, intercept: bool = True) -> Dataset:
    if response not in frame.columns:
        raise ValidationError(
            f"response column '{response}' not found",
            details={"columns": [str(c) for c in frame.columns]},
        )
    covariates = [c for c in frame.columns if c != response]
    if not covariates and not intercept:
        raise ValidationError("no covariates and no intercept")

    non_numeric = [str(c) for c in covariates if not pd.api.types.is_numeric_dtype(frame[c])]
    if non_numeric:
        raise ValidationError("covariate columns must be numeric", details={"columns": non_numeric})
    if frame.isna().to_numpy().any():
        raise ValidationError("data contain missing values")

    y = pd.to_numeric(frame[response], errors="coerce").to_numpy(dtype=float)
    if np.any(~np.isfinite(y)) or np.any(y < 0) or np.any(y != np.floor(y)):
        raise ValidationError(f"response '{response}' must hold non-negative integers")

    X = frame[covariates].to_numpy(dtype=float) if covariates else np.empty((len(frame), 0))
    return Dataset.from_arrays(X, y, intercept=intercept, columns=tuple(str(c) for c in covariates))


def read_dataset(path: Path | str, response: str, *, intercept: bool = True) -> Dataset:
    """Response column plus every other column as a numeric covariate."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise ValidationError(f"data file not found: {path}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ValidationError(f"malformed CSV: {path}", details={"reason": str(exc)}) from exc
    logger.debug("dataset_read", path=str(path), rows=len(frame), columns=len(frame.columns))
    return dataset_from_frame(frame, response, intercept=intercept)
