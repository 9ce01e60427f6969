from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from robustglm.core import DomainError
from robustglm.features.families import POISSON, expected_t, pois_pmf, pois_quantile, t_transform


def test_pmf_matches_scipy():
    ks = np.arange(0, 30)
    np.testing.assert_allclose(POISSON.pmf(ks, 6.5), stats.poisson.pmf(ks, 6.5), rtol=1e-12)


def test_pmf_point_mass_at_zero():
    assert pois_pmf(0, 0.0) == 1.0
    assert pois_pmf(3, 0.0) == 0.0


@pytest.mark.parametrize(("k", "mu"), [(-1, 1.0), (1, -0.5), (1.5, 2.0)])
def test_pmf_domain(k, mu):
    with pytest.raises(DomainError):
        pois_pmf(k, mu)


def test_quantile_small_mean():
    # P(y <= 2 | mu = 1) = 0.9197, P(y <= 3) = 0.9810
    assert pois_quantile(0.975, 1.0) == 3
    assert pois_quantile(0.025, 1.0) == 0
    assert pois_quantile(0.5, 1.0) == 1
    assert pois_quantile(0.3, 0.0) == 0


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.2])
def test_quantile_rejects_bad_probability(q):
    with pytest.raises(DomainError):
        pois_quantile(q, 2.0)


def test_vectorised_quantiles_agree_with_scalar_and_scipy():
    mus = np.array([0.01, 0.5, 3.0, 41.0, 900.0, 2.5e4])
    for q in (0.025, 0.5, 0.975):
        vec = POISSON.quantiles(q, mus)
        assert vec.tolist() == [pois_quantile(q, m) for m in mus]
        assert vec.tolist() == stats.poisson.ppf(q, mus).astype(int).tolist()


def test_cdf_below_zero_is_zero():
    np.testing.assert_array_equal(POISSON.cdf(np.array([-2, -1]), 3.0), [0.0, 0.0])


def test_t_transform():
    assert t_transform(4) == 4.0
    np.testing.assert_allclose(t_transform(np.array([0, 1, 9])), [0.0, 2.0, 6.0])
    with pytest.raises(DomainError):
        t_transform(-1)


def test_expected_t_small_and_large_means():
    assert expected_t(0.0) == 0.0
    ks = np.arange(0, 200)
    direct = float(np.sum(2.0 * np.sqrt(ks) * stats.poisson.pmf(ks, 7.0)))
    assert expected_t(7.0) == pytest.approx(direct, abs=1e-12)
    # second-order expansion 2 sqrt(mu) - 1 / (4 sqrt(mu)) is accurate to ~1e-7 here
    mu = 1e4
    assert expected_t(mu) == pytest.approx(2 * np.sqrt(mu) - 1 / (4 * np.sqrt(mu)), abs=1e-5)


def test_expected_t_is_increasing():
    mus = np.geomspace(1e-3, 1e3, 60)
    values = np.array([expected_t(m) for m in mus])
    assert np.all(np.diff(values) > 0)


def test_link_pair_round_trip():
    eta = np.array([-3.0, 0.0, 2.5])
    np.testing.assert_allclose(POISSON.link(POISSON.inverse_link(eta)), eta)
