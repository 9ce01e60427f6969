"""Poisson distribution with log link.

Everything the estimators need from the response family lives here: the
probability mass function (log space), CDF, quantiles, the link pair and
the variance-stabilising transform t(y) = 2*sqrt(y) together with its
expectation E_mu t(y).

All functions are pure and safe to call from any thread.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import overload

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special, stats

from robustglm.core.exceptions import DomainError

FloatArray = NDArray[np.float64]

# above this mean expected_t switches to its asymptotic expansion
EXPECTED_T_CEILING = 1e5
# above this mean the scalar quantile starts from the normal approximation
QUANTILE_NORMAL_FROM = 1e4
# means are capped here before quantiles; integer steps stay exact in float64
MU_CAP = 1e15


def sqrt_transform(y: ArrayLike) -> FloatArray:
    return 2.0 * np.sqrt(np.asarray(y, dtype=float))


def support_upper(mu: float) -> int:
    """Last index kept by every truncated sum over k; tail mass below 1e-12."""
    return int(np.ceil(mu + 10.0 * np.sqrt(mu) + 50.0))


def support_lower(mu: float) -> int:
    return max(0, int(np.floor(mu - 10.0 * np.sqrt(mu) - 20.0)))


def _require_nonneg(name: str, value: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be finite and >= 0", details={name: np.atleast_1d(arr).tolist()[:5]})
    return arr


def _require_probability(q: float) -> float:
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie in (0, 1)", details={"q": q})
    return float(q)


@dataclass(frozen=True)
class PoissonLogModel:
    """Poisson family, log link, dispersion fixed at one."""

    transform: Callable[[ArrayLike], FloatArray] = field(default=sqrt_transform)
    name: str = "poisson"

    # link pair -------------------------------------------------------------

    @staticmethod
    def link(mu: ArrayLike) -> FloatArray:
        return np.log(np.asarray(mu, dtype=float))

    @staticmethod
    def inverse_link(eta: ArrayLike) -> FloatArray:
        return np.exp(np.asarray(eta, dtype=float))

    # distribution ----------------------------------------------------------

    @staticmethod
    def logpmf(k: ArrayLike, mu: ArrayLike) -> FloatArray:
        k_arr = np.asarray(k, dtype=float)
        mu_arr = np.asarray(mu, dtype=float)
        # xlogy(0, 0) == 0 keeps the point mass at zero exact
        return special.xlogy(k_arr, mu_arr) - mu_arr - special.gammaln(k_arr + 1.0)

    @overload
    def pmf(self, k: int, mu: float) -> float: ...
    @overload
    def pmf(self, k: ArrayLike, mu: ArrayLike) -> FloatArray | float: ...

    def pmf(self, k: ArrayLike, mu: ArrayLike) -> FloatArray | float:
        k_arr = _require_nonneg("k", k)
        mu_arr = _require_nonneg("mu", mu)
        if np.any(k_arr != np.floor(k_arr)):
            raise DomainError("k must be an integer")
        out = np.exp(self.logpmf(k_arr, mu_arr))
        return float(out) if out.ndim == 0 else out

    @staticmethod
    def cdf(k: ArrayLike, mu: ArrayLike) -> FloatArray:
        k_arr = np.floor(np.asarray(k, dtype=float))
        mu_arr = np.asarray(mu, dtype=float)
        safe_k = np.maximum(k_arr, 0.0)
        return np.where(k_arr < 0, 0.0, special.pdtr(safe_k, mu_arr))

    def quantile(self, q: float, mu: float) -> int:
        """Smallest k with cdf(k, mu) >= q."""
        q = _require_probability(q)
        mu = float(_require_nonneg("mu", mu))
        if mu == 0.0:
            return 0
        if mu > QUANTILE_NORMAL_FROM:
            return int(self.quantiles(q, np.array([mu]))[0])

        upper = support_upper(mu)
        ks = np.arange(upper + 1, dtype=float)
        cum = np.cumsum(np.exp(self.logpmf(ks, mu)))
        idx = int(np.searchsorted(cum, q, side="left"))
        if idx <= upper:
            return idx
        # q sits in the last 1e-12 of the tail; finish on the exact CDF
        return int(_refine_quantiles(q, np.array([mu]), np.array([float(upper)]))[0])

    def quantiles(self, q: float, mu: ArrayLike) -> NDArray[np.int64]:
        """Vectorised quantile: normal start with continuity correction, exact refinement."""
        q = _require_probability(q)
        mu_arr = np.minimum(_require_nonneg("mu", mu).astype(float), MU_CAP)
        z = stats.norm.ppf(q)
        start = np.ceil(mu_arr + z * np.sqrt(mu_arr) - 0.5)
        start = np.maximum(start, 0.0)
        return _refine_quantiles(q, mu_arr, start).astype(np.int64)

    # transform -------------------------------------------------------------

    def t(self, y: ArrayLike) -> FloatArray:
        return self.transform(_require_nonneg("y", y))

    def expected_t(self, mu: float) -> float:
        """E_mu t(y) by truncated summation, asymptotic above the table ceiling."""
        mu = float(_require_nonneg("mu", mu))
        if mu == 0.0:
            return float(self.transform(0.0))
        if mu > EXPECTED_T_CEILING and self.transform is sqrt_transform:
            root = np.sqrt(mu)
            return float(2.0 * root - 1.0 / (4.0 * root))
        ks = np.arange(support_lower(mu), support_upper(mu) + 1, dtype=float)
        weights = np.exp(self.logpmf(ks, mu))
        return float(np.dot(self.transform(ks), weights))


def _refine_quantiles(q: float, mu: FloatArray, start: FloatArray) -> FloatArray:
    k = np.array(start, dtype=float, copy=True)
    while True:
        down = (k > 0) & (special.pdtr(np.maximum(k - 1.0, 0.0), mu) >= q)
        if not down.any():
            break
        k[down] -= 1.0
    while True:
        up = special.pdtr(k, mu) < q
        if not up.any():
            break
        k[up] += 1.0
    return k


POISSON = PoissonLogModel()


def pois_pmf(k: int, mu: float) -> float:
    return float(POISSON.pmf(k, mu))


def pois_quantile(q: float, mu: float) -> int:
    return POISSON.quantile(q, mu)


def t_transform(y: ArrayLike) -> FloatArray | float:
    out = POISSON.t(y)
    return float(out) if np.ndim(out) == 0 else out


def expected_t(mu: float) -> float:
    return POISSON.expected_t(mu)
