"""Centering function m(mu) and its tabulated chain-rule companions.

m(mu) = argmin_gamma E_mu rho(t(y) - gamma) makes the MT estimator Fisher
consistent. Every IRWLS step needs s(eta) = m(exp(eta)) and s'(eta) for
thousands of linear predictors, so m is computed once on a log-spaced grid
and interpolated with a monotone cubic (PCHIP) in eta = log(mu).

Outside the grid:
  below mu_min  m is linear in mu through the origin,
  above mu_max  m(mu) = 2*sqrt(mu) + d*sqrt(mu_max/mu), d fitted to the last node.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator
from scipy.interpolate import PchipInterpolator, PPoly
from scipy.optimize import minimize_scalar

from robustglm.core.config import get_settings
from robustglm.core.exceptions import DomainError, TableBuildError
from robustglm.core.logging import get_logger
from robustglm.core.parallel import WorkerPool, inline_pool
from robustglm.features.families.poisson import POISSON, PoissonLogModel, support_lower, support_upper
from robustglm.features.mloss.losses import LossSpec

logger = get_logger(__name__)

FloatArray = NDArray[np.float64]

GAMMA_STEP = 0.01
_GAMMA_CHUNK = 256
_ETA_MIN, _ETA_MAX = -745.0, 700.0
_MONOTONE_SLACK = 1e-6

_TABLES: dict[tuple[LossSpec, MGridConfig, PoissonLogModel], MTable] = {}
_TABLES_LOCK = threading.Lock()


class MGridConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu_min: PositiveFloat = 1e-3
    mu_max: PositiveFloat = 1e5
    n_nodes: int = Field(default=400, ge=400)

    @model_validator(mode="after")
    def _ordered(self) -> MGridConfig:
        if self.mu_max <= self.mu_min:
            raise ValueError("mu_max must exceed mu_min")
        return self

    @classmethod
    def from_settings(cls) -> MGridConfig:
        s = get_settings()
        return cls(mu_min=s.MTABLE_MU_MIN, mu_max=s.MTABLE_MU_MAX, n_nodes=s.MTABLE_NODES)

    def nodes(self) -> FloatArray:
        return np.geomspace(self.mu_min, self.mu_max, self.n_nodes)

    def digest(self, loss: LossSpec) -> str:
        spec = f"{loss.kind}|{loss.c!r}|{self.mu_min!r}|{self.mu_max!r}|{self.n_nodes}"
        return hashlib.sha256(spec.encode("utf-8")).hexdigest()


# m(mu) -----------------------------------------------------------------------


def _expected_rho(gammas: FloatArray, t: FloatArray, w: FloatArray, loss: LossSpec) -> FloatArray:
    out = np.empty(gammas.shape[0])
    for start in range(0, gammas.shape[0], _GAMMA_CHUNK):
        block = gammas[start : start + _GAMMA_CHUNK]
        out[start : start + _GAMMA_CHUNK] = loss.rho(t[None, :] - block[:, None]) @ w
    return out


def m_value(mu: float, loss: LossSpec, model: PoissonLogModel = POISSON) -> float:
    """argmin_gamma E_mu rho(t(y) - gamma); smallest minimiser on ties."""
    if not np.isfinite(mu) or mu < 0:
        raise DomainError("mu must be finite and >= 0", details={"mu": mu})
    if mu == 0.0:
        return 0.0
    if loss.kind == "square":
        return model.expected_t(mu)

    ks = np.arange(support_lower(mu), support_upper(mu) + 1, dtype=float)
    w = np.exp(model.logpmf(ks, mu))
    t = model.transform(ks)

    lo = max(0.0, float(t[0]) - loss.c)
    hi = float(t[-1])
    grid = np.arange(lo, hi + 0.5 * GAMMA_STEP, GAMMA_STEP)
    values = _expected_rho(grid, t, w, loss)
    best = int(np.argmin(values))

    near = np.flatnonzero(values <= values[best] + 1e-12)
    if near.size and np.abs(grid[near] - grid[best]).max() > 2 * GAMMA_STEP:
        logger.warning("m_value_tie", mu=mu, gammas=grid[near[:5]].tolist())

    def objective(gamma: float) -> float:
        return float(loss.rho(t - gamma) @ w)

    a = max(lo, grid[best] - GAMMA_STEP)
    b = min(hi, grid[best] + GAMMA_STEP)
    gamma, value = float(grid[best]), float(values[best])
    if b > a:
        res = minimize_scalar(objective, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
        if res.fun <= value:
            gamma, value = float(res.x), float(res.fun)

    # Newton polish on the first-order condition sum psi(t - gamma) p = 0
    for _ in range(3):
        slope = float(loss.psi(t - gamma) @ w)
        curvature = float(loss.psi_prime(t - gamma) @ w)
        if curvature <= 0.0:
            break
        candidate = gamma + slope / curvature
        if not a <= candidate <= b:
            break
        cand_value = objective(candidate)
        if cand_value > value + 1e-15:
            break
        gamma, value = candidate, cand_value
        if abs(slope) < 1e-13:
            break
    return gamma


# table -----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MTable:
    loss: LossSpec
    grid: MGridConfig
    mu_grid: FloatArray
    m_values: FloatArray
    _spline: PchipInterpolator = field(init=False, repr=False, compare=False)
    _slope: PPoly = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        spline = PchipInterpolator(np.log(self.mu_grid), self.m_values, extrapolate=False)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_slope", spline.derivative())

    @property
    def digest(self) -> str:
        return self.grid.digest(self.loss)

    @property
    def _tail(self) -> tuple[float, float]:
        # d in m(mu) = 2 sqrt(mu) + d sqrt(mu_max / mu)
        root_max = float(np.sqrt(self.mu_grid[-1]))
        return root_max, float(self.m_values[-1]) - 2.0 * root_max

    def steep_intervals(self, factor: float = 10.0) -> list[tuple[float, float]]:
        """Grid intervals where m climbs faster than `factor` * (1 + sqrt(mu)) per unit of log mu.

        A smooth m grows like 2 sqrt(mu), so these mark a switch between two
        local minima of E rho, which PCHIP bridges inside a single interval.
        """
        slope = np.diff(self.m_values) / np.diff(np.log(self.mu_grid))
        mid = np.sqrt(self.mu_grid[:-1] * self.mu_grid[1:])
        idx = np.flatnonzero(slope > factor * (1.0 + np.sqrt(mid)))
        return [(float(self.mu_grid[i]), float(self.mu_grid[i + 1])) for i in idx]

    def s(self, eta: ArrayLike) -> FloatArray:
        """s(eta) = m(exp(eta))."""
        return self._evaluate(eta, derivative=False)

    def s_prime(self, eta: ArrayLike) -> FloatArray:
        return self._evaluate(eta, derivative=True)

    def m(self, mu: ArrayLike) -> FloatArray:
        mu_arr = np.asarray(mu, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(mu_arr > 0, self.s(np.log(np.maximum(mu_arr, 1e-300))), 0.0)

    def _evaluate(self, eta: ArrayLike, *, derivative: bool) -> FloatArray:
        shape = np.shape(eta)
        eta_arr = np.clip(np.atleast_1d(np.asarray(eta, dtype=float)), _ETA_MIN, _ETA_MAX)
        x0, x1 = np.log(self.mu_grid[0]), np.log(self.mu_grid[-1])
        out = np.empty_like(eta_arr)

        low = eta_arr < x0
        high = eta_arr > x1
        mid = ~(low | high)

        fn: PPoly = self._slope if derivative else self._spline
        out[mid] = fn(eta_arr[mid])
        # linear in mu below the grid: value and eta-derivative coincide
        out[low] = self.m_values[0] * np.exp(eta_arr[low] - x0)

        root_max, d = self._tail
        half = np.exp(0.5 * eta_arr[high])
        if derivative:
            out[high] = half - 0.5 * d * root_max / half
        else:
            out[high] = 2.0 * half + d * root_max / half
        return out.reshape(shape)


def build_m_table(
    loss: LossSpec,
    model: PoissonLogModel = POISSON,
    grid: MGridConfig | None = None,
    pool: WorkerPool = inline_pool,
) -> MTable:
    grid = grid or MGridConfig.from_settings()
    nodes = grid.nodes()
    values = np.asarray(pool.map_ordered(lambda mu: m_value(float(mu), loss, model), nodes))

    drops = np.diff(values)
    bad = np.flatnonzero(drops < -_MONOTONE_SLACK * np.maximum(1.0, np.abs(values[1:])))
    if bad.size:
        i = int(bad[0])
        raise TableBuildError(
            "m is not monotone on the grid",
            details={"mu_left": float(nodes[i]), "mu_right": float(nodes[i + 1]), "kind": loss.kind, "c": loss.c},
        )
    values = np.maximum.accumulate(values)
    table = MTable(loss=loss, grid=grid, mu_grid=nodes, m_values=values)
    steep = table.steep_intervals()
    if steep:
        logger.warning("m_table_jump", kind=loss.kind, c=loss.c, intervals=steep)
    logger.info("m_table_built", kind=loss.kind, c=loss.c, nodes=grid.n_nodes)
    return table


# cache file ------------------------------------------------------------------


def save_m_table(table: MTable, path: Path) -> None:
    header = "\n".join(
        [
            "robustglm m-table",
            f"kind={table.loss.kind} c={table.loss.c!r} mu_min={table.grid.mu_min!r} "
            f"mu_max={table.grid.mu_max!r} nodes={table.grid.n_nodes} sha256={table.digest}",
            "mu,m",
        ]
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack([table.mu_grid, table.m_values]), delimiter=",", fmt="%.17g", header=header)


def load_m_table(path: Path, loss: LossSpec, grid: MGridConfig) -> MTable:
    with path.open(encoding="utf-8") as fh:
        lines = [fh.readline() for _ in range(2)]
    fields = dict(item.split("=", 1) for item in lines[1].lstrip("# ").split())
    expected = grid.digest(loss)
    if fields.get("sha256") != expected:
        raise TableBuildError(
            "m-table cache does not match the requested loss/grid",
            details={"path": str(path), "found": fields.get("sha256"), "expected": expected},
        )
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape != (grid.n_nodes, 2) or not np.allclose(data[:, 0], grid.nodes(), rtol=1e-12, atol=0.0):
        raise TableBuildError("m-table cache grid is corrupt", details={"path": str(path)})
    return MTable(loss=loss, grid=grid, mu_grid=grid.nodes(), m_values=data[:, 1])


def get_m_table(
    loss: LossSpec,
    grid: MGridConfig | None = None,
    model: PoissonLogModel = POISSON,
    *,
    threads: int | None = None,
) -> MTable:
    """Process-wide table cache, backed by MTABLE_CACHE_DIR when configured.

    `threads` caps the pool used when the table has to be built (default:
    the THREADS setting); it does not take part in the cache key.
    """
    grid = grid or MGridConfig.from_settings()
    key = (loss, grid, model)
    with _TABLES_LOCK:
        table = _TABLES.get(key)
    if table is not None:
        return table
    table = _load_or_build(loss, grid, model, threads)
    with _TABLES_LOCK:
        return _TABLES.setdefault(key, table)


def _load_or_build(loss: LossSpec, grid: MGridConfig, model: PoissonLogModel, threads: int | None) -> MTable:
    settings = get_settings()
    path = None
    if settings.MTABLE_CACHE_DIR is not None:
        path = settings.MTABLE_CACHE_DIR / f"mtable-{grid.digest(loss)[:16]}.csv"
        if path.exists():
            return load_m_table(path, loss, grid)

    with WorkerPool(threads) as pool:
        table = build_m_table(loss, model, grid, pool)
    if path is not None:
        save_m_table(table, path)
    return table
