from __future__ import annotations

import numpy as np
import pytest

from robustglm.features.lst import lst_fit
from robustglm.features.mloss import bisquare
from robustglm.features.mt import ml_fit
from robustglm.features.psc_init import (
    Candidate,
    CandidateSet,
    candidate_set,
    initial_estimate,
    objective_L,
    restore_indices,
    stage1,
    stage2,
    trim_indices,
    within_bounds,
)
from robustglm.features.sensitivity import psc
from robustglm.features.simulator import SimScenario, contaminate, generate_dataset
from robustglm.shared.schemas import Dataset, InitConfig

BISQ = bisquare(2.0)


def test_trim_indices_at_unit_mean():
    y = np.array([0, 1, 2, 3, 4, 5, 1, 0])
    data = Dataset.from_arrays(np.empty((8, 0)), y)
    kept = trim_indices(data, np.zeros(1), 0.05)
    np.testing.assert_array_equal(kept, [0, 1, 2, 3, 6, 7])
    np.testing.assert_array_equal(trim_indices(data, np.zeros(1), 1e-12), np.arange(8))


def test_trimmed_fraction_on_clean_data(make_data):
    data = make_data(1000, [2.0, 0.5], seed=9)
    beta = np.array([2.0, 0.5])
    trimmed = data.n - trim_indices(data, beta, 0.05).size
    assert 20 <= trimmed <= 85


def test_half_sample_rules():
    assert InitConfig.n_delete(101) == 50
    assert InitConfig.min_kept(3) == 6
    assert InitConfig.min_kept(1) == 2
    with pytest.raises(ValueError):
        InitConfig(alpha=0.5)


def test_best_breaks_ties_by_position():
    cands = CandidateSet(
        [
            Candidate(np.zeros(2), 3.0, "full"),
            Candidate(np.ones(2), 1.0, "psc-small", 1),
            Candidate(2 * np.ones(2), 1.0, "psc-large", 1),
        ]
    )
    assert cands.best().provenance == "psc-small"


def test_objective_is_bounded_by_n(clean_data, bi_table):
    far = np.array([8.0, 0.0, 0.0])
    assert objective_L(far, clean_data, bi_table, BISQ) == pytest.approx(clean_data.n)


def test_first_candidate_set_has_3p_plus_1_members(clean_data, sq_table, bi_table):
    fit = lst_fit(clean_data, sq_table)
    dec = psc(clean_data, fit, sq_table)
    cands = candidate_set(clean_data, dec, fit, sq_table, bi_table, BISQ)
    assert len(cands) == 3 * clean_data.p + 1
    tags = [c.provenance for c in cands.candidates]
    assert tags[:4] == ["full", "psc-small", "psc-large", "psc-abs"]
    assert cands.candidates[0].objective == pytest.approx(objective_L(fit.beta, clean_data, bi_table, BISQ))


def test_stage1_never_worse_than_full_lst(clean_data, sq_table, bi_table):
    first = stage1(clean_data, InitConfig(), sq_table, bi_table, BISQ)
    full = lst_fit(clean_data, sq_table)
    assert first.objective <= objective_L(full.beta, clean_data, bi_table, BISQ) + 1e-12
    trace = first.telemetry["objective_trace"]
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:], strict=False))
    assert 1 <= first.iterations <= 10


def test_stage2_without_trimming_is_the_full_fit(clean_data, sq_table):
    full = lst_fit(clean_data, sq_table)
    second = stage2(clean_data, full.beta, InitConfig(alpha=1e-12), sq_table)
    np.testing.assert_array_equal(second.beta, full.beta)
    assert second.telemetry["trimmed"] == 0


def test_initial_estimate_is_deterministic(clean_data, sq_table, bi_table):
    a = initial_estimate(clean_data, InitConfig(), sq_table, bi_table, BISQ)
    b = initial_estimate(clean_data, InitConfig(), sq_table, bi_table, BISQ)
    np.testing.assert_array_equal(a[1].beta, b[1].beta)


def test_gross_outliers_are_not_restored(make_data, sq_table, bi_table):
    beta0 = np.array([0.0, 1.0, 0.0])
    x0 = np.array([1.0, 3.0, 0.0])
    data = contaminate(make_data(200, beta0, seed=4), 0.1, x0, int(20 * np.exp(3.0)))
    first, second = initial_estimate(data, InitConfig(), sq_table, bi_table, BISQ)
    assert set(range(20)) <= set(second.telemetry["excluded"])
    ml = ml_fit(data)
    assert np.linalg.norm(first.beta - beta0) < np.linalg.norm(ml.beta - beta0)


def _with_gross_rows(data, rows, value=500):
    y = data.y.copy()
    y[list(rows)] = value
    return data.with_response(y)


def test_stage2_trims_fewer_rows_than_coefficients(clean_data, sq_table):
    data = _with_gross_rows(clean_data, [5, 9])
    beta = np.array([0.5, 1.0, -0.5])
    second = stage2(data, beta, InitConfig(alpha=1e-6), sq_table)
    assert 1 <= second.telemetry["trimmed"] <= data.p
    assert {5, 9} <= set(second.telemetry["excluded"])
    assert second.converged


def test_restore_indices_works_row_by_row(clean_data):
    data = _with_gross_rows(clean_data, [5])
    beta = np.array([0.5, 1.0, -0.5])
    assert restore_indices(data, np.array([5]), beta, 1e-6).size == 0
    np.testing.assert_array_equal(restore_indices(data, np.array([0]), beta, 1e-6), [0])
    assert restore_indices(data, np.array([], dtype=np.int64), beta, 0.05).size == 0
    mask = within_bounds(data.X, data.y, beta, 1e-6)
    np.testing.assert_array_equal(np.flatnonzero(mask), trim_indices(data, beta, 1e-6))


@pytest.mark.slow
def test_initial_estimate_survives_model_one_outliers(sq_table, bi_table):
    sc = SimScenario(n=200, p=10, seed=1)
    for rep in range(15):
        data = contaminate(generate_dataset(sc, rep), sc.eps, sc.x0, 60)
        _, second = initial_estimate(data, InitConfig(), sq_table, bi_table, BISQ)
        assert np.all(np.isfinite(second.beta))


@pytest.mark.slow
def test_stage2_restore_is_idempotent_on_clean_data(make_data, sq_table, bi_table):
    cfg = InitConfig()
    stable = 0
    for seed in range(100):
        data = make_data(200, [0.5, 1.0, -0.5], seed=seed)
        first, second = initial_estimate(data, cfg, sq_table, bi_table, BISQ)
        removed = np.setdiff1d(np.arange(data.n), trim_indices(data, first.beta, cfg.alpha))
        still_out = set(removed) - set(restore_indices(data, removed, second.beta, cfg.alpha))
        stable += still_out == set(second.telemetry.get("excluded", []))
    assert stable >= 90


@pytest.mark.slow
def test_clean_candidates_stay_near_the_full_fit(make_data, sq_table, bi_table):
    close = 0
    for seed in range(100):
        data = make_data(200, [1.0, 0.5, -0.5, 0.25, 0.0], seed=seed)
        fit = lst_fit(data, sq_table)
        cands = candidate_set(data, psc(data, fit, sq_table), fit, sq_table, bi_table, BISQ)
        close += all(np.linalg.norm(c.beta - fit.beta) <= 0.5 for c in cands.candidates)
    assert close >= 95


def _gross_sample(make_data, seed):
    beta0 = np.array([0.0, 1.0, 0.0])
    x0 = np.array([1.0, 3.0, 0.0])
    return beta0, contaminate(make_data(200, beta0, seed=seed), 0.1, x0, int(20 * np.exp(3.0)))


@pytest.mark.slow
def test_best_candidate_beats_the_full_fit_under_outliers(make_data, sq_table, bi_table):
    wins = 0
    for seed in range(100):
        beta0, data = _gross_sample(make_data, seed)
        fit = lst_fit(data, sq_table)
        best = candidate_set(data, psc(data, fit, sq_table), fit, sq_table, bi_table, BISQ).best()
        wins += best.provenance != "full" and np.linalg.norm(best.beta - beta0) < np.linalg.norm(fit.beta - beta0)
    assert wins >= 90


@pytest.mark.slow
def test_stage1_beats_ml_under_outliers(make_data, sq_table, bi_table):
    wins = 0
    for seed in range(100):
        beta0, data = _gross_sample(make_data, seed)
        first = stage1(data, InitConfig(), sq_table, bi_table, BISQ)
        wins += np.linalg.norm(first.beta - beta0) <= np.linalg.norm(ml_fit(data).beta - beta0)
    assert wins >= 90
