from __future__ import annotations

import numpy as np
import pytest

from robustglm.features.lst import eta0, lst_fit, lst_onestep, lst_onestep_all, lst_residual_norm
from robustglm.shared.schemas import Dataset


def test_eta0():
    np.testing.assert_allclose(eta0(np.array([0, 1, 9])), np.log([0.1, 1.1, 9.1]))


def test_fit_satisfies_estimating_equation(clean_data, sq_table):
    fit = lst_fit(clean_data, sq_table, tol=1e-10)
    T = 2.0 * np.sqrt(clean_data.y)
    assert fit.converged
    assert fit.estimator == "lst"
    assert fit.eq_residual_norm <= 1e-6 * T.max()
    assert fit.eq_residual_norm == pytest.approx(
        lst_residual_norm(clean_data.X, T, clean_data.X @ fit.beta, sq_table)
    )


@pytest.mark.parametrize("seed", range(5))
def test_fixed_points_on_random_instances(make_data, sq_table, seed):
    data = make_data(200, [0.3, 0.8, -0.4, 0.2, 0.0], seed=100 + seed)
    fit = lst_fit(data, sq_table, tol=1e-10)
    assert fit.converged
    assert fit.eq_residual_norm <= 1e-6 * (2.0 * np.sqrt(data.y.max()))


def test_fit_is_close_to_truth(make_data, sq_table):
    beta0 = np.array([0.5, 1.0, -0.5])
    fit = lst_fit(make_data(2000, beta0, seed=3), sq_table)
    assert np.linalg.norm(fit.beta - beta0) < 0.15


def test_start_does_not_change_the_fixed_point(clean_data, sq_table):
    from_eta = lst_fit(clean_data, sq_table)
    from_zero = lst_fit(clean_data, sq_table, start=np.zeros(clean_data.p))
    np.testing.assert_allclose(from_zero.beta, from_eta.beta, atol=1e-6)


def test_objective_trace_is_recorded(clean_data, sq_table):
    fit = lst_fit(clean_data, sq_table)
    trace = fit.telemetry["objective_trace"]
    assert 1 <= len(trace) <= 5
    assert trace[-1] == pytest.approx(fit.objective, rel=1e-3)


def test_max_iter_reports_non_convergence(clean_data, sq_table):
    fit = lst_fit(clean_data, sq_table, max_iter=1)
    assert not fit.converged
    assert fit.iterations == 1


def test_onestep_from_anchor_at_fixed_point_stays(clean_data, sq_table):
    fit = lst_fit(clean_data, sq_table, tol=1e-12, max_iter=200)
    np.testing.assert_allclose(lst_onestep(clean_data, fit.beta, sq_table), fit.beta, atol=1e-8)


@pytest.mark.parametrize("mode", ["anchor", "eta0"])
def test_leave_one_out_downdate_matches_direct_refits(make_data, sq_table, mode):
    data = make_data(30, [0.4, 0.9], seed=5)
    anchor = lst_fit(data, sq_table).beta if mode == "anchor" else None
    fast = lst_onestep_all(data, anchor, sq_table)
    slow = np.vstack([lst_onestep(data.drop(j), anchor, sq_table) for j in range(data.n)])
    assert fast.shape == (data.n, data.p)
    np.testing.assert_allclose(fast, slow, atol=1e-8)


def test_leave_one_out_handles_a_leverage_one_row(sq_table):
    # the last row is the only one with a nonzero second covariate
    X = np.column_stack([np.ones(12), np.r_[np.zeros(11), 1.0]])
    y = np.array([1, 2, 0, 3, 1, 2, 2, 1, 0, 4, 2, 5])
    data = Dataset(X=X, y=y)
    anchor = np.array([0.4, 0.5])
    fast = lst_onestep_all(data, anchor, sq_table)
    np.testing.assert_allclose(fast[:11], np.vstack([lst_onestep(data.drop(j), anchor, sq_table) for j in range(11)]), atol=1e-8)
    # dropping the last row leaves a singular design; the ridge keeps the step finite
    assert np.all(np.isfinite(fast[11]))
