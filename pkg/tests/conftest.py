"""Test bootstrap.

Settings are read from ROBUSTGLM_* variables the first time anything asks
for them, so the defaults below have to be in place before the package is
imported. m-tables are built once per session; the bisquare one dominates
the start-up time of the suite.
"""

from __future__ import annotations

import os

os.environ.setdefault("ROBUSTGLM_LOG_LEVEL", "WARNING")
os.environ.setdefault("ROBUSTGLM_SUBSAMPLES", "200")

import numpy as np
import pytest

from robustglm.core.logging import setup_logging
from robustglm.features.mloss import SQUARE, MTable, bisquare, get_m_table
from robustglm.features.mt.pipeline import FitContext
from robustglm.shared.schemas import Dataset, FitConfig

setup_logging()


def poisson_data(n: int, beta: np.ndarray | list[float], seed: int = 0) -> Dataset:
    """Intercept plus standard normal covariates, y ~ Poisson(exp(x' beta))."""
    beta = np.asarray(beta, dtype=float)
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, beta.size - 1))])
    y = rng.poisson(np.exp(X @ beta))
    return Dataset(X=X, y=y)


@pytest.fixture(scope="session")
def sq_table() -> MTable:
    return get_m_table(SQUARE)


@pytest.fixture(scope="session")
def bi_table() -> MTable:
    return get_m_table(bisquare(2.0))


@pytest.fixture(scope="session")
def ctx(sq_table: MTable, bi_table: MTable) -> FitContext:
    return FitContext.build(FitConfig(subsamples=200))


@pytest.fixture
def make_data():
    return poisson_data


@pytest.fixture
def clean_data() -> Dataset:
    return poisson_data(200, [0.5, 1.0, -0.5], seed=11)
