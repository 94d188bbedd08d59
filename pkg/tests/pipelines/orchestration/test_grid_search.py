import numpy as np
import pandas as pd
import pytest

from sigsurv.common.exceptions import CoxModelError
from sigsurv.pipelines.coxmodel.lasso import CoxFitConfig, lambda_max
from sigsurv.pipelines.coxmodel.model import fit_cox_lasso
from sigsurv.pipelines.orchestration.grid_search import cv_splits, grid_search_lambda
from tests.pipelines.coxmodel.test_lasso import simulate_cox


@pytest.fixture
def training_data():
    """Fixture providing 150 simulated training patients with 4 covariates."""
    return simulate_cox(150, [1.0, -0.8, 0.0, 0.0], seed=31)


# ---- folds ----


def test_cv_splits_partition_and_stratify(training_data):
    _, _, delta = training_data

    splits = cv_splits(delta, 5, seed=2)

    validation = np.concatenate([va for _, va in splits])
    assert sorted(validation.tolist()) == list(range(150))
    for train_idx, val_idx in splits:
        assert not set(train_idx) & set(val_idx)
        assert abs(delta[val_idx].mean() - delta.mean()) < 0.1


def test_cv_splits_are_seeded(training_data):
    _, _, delta = training_data

    first = cv_splits(delta, 5, seed=2)
    again = cv_splits(delta, 5, seed=2)
    other = cv_splits(delta, 5, seed=3)

    assert all(np.array_equal(a[1], b[1]) for a, b in zip(first, again, strict=True))
    assert not all(np.array_equal(a[1], b[1]) for a, b in zip(first, other, strict=True))


def test_too_few_events_for_folds():
    with pytest.raises(CoxModelError, match="too few events"):
        cv_splits(np.array([1, 1, 0, 0, 0, 0]), 3, seed=0)


# ---- search ----


def test_single_lambda_grid(training_data):
    X, T, delta = training_data

    result = grid_search_lambda(X, T, delta, [0.5], cv_folds=3, seed=0)

    assert result.best_lambda == 0.5
    assert len(result.table) == 1
    assert list(result.table.columns[:6]) == [
        "lambda", "mean_cindex", "sd_cindex", "mean_nonzero", "n_failed", "errors"
    ]
    assert [c for c in result.table.columns if c.startswith("cindex_fold_")] == [
        "cindex_fold_0", "cindex_fold_1", "cindex_fold_2"
    ]


def test_informative_grid_prefers_small_penalty(training_data):
    X, T, delta = training_data
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    top = 2.0 * lambda_max(Z, T, delta)

    result = grid_search_lambda(X, T, delta, [0.1, top], cv_folds=3, seed=0)

    assert result.best_lambda == 0.1
    assert result.table.loc[1, "mean_cindex"] == 0.5
    assert result.table.loc[1, "mean_nonzero"] == 0


def test_ties_go_to_larger_lambda(training_data):
    X, T, delta = training_data
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    top = 2.0 * lambda_max(Z, T, delta)

    # every penalty above lambda_max gives the empty model, scored 0.5 on every fold
    result = grid_search_lambda(X, T, delta, [top, 2 * top, 3 * top], cv_folds=3, seed=0)

    assert result.best_lambda == 3 * top


def test_table_does_not_depend_on_worker_count(training_data):
    X, T, delta = training_data
    grid = [0.1, 1.0, 10.0]

    serial = grid_search_lambda(X, T, delta, grid, cv_folds=3, seed=5, n_jobs=1)
    parallel = grid_search_lambda(X, T, delta, grid, cv_folds=3, seed=5, n_jobs=2)

    pd.testing.assert_frame_equal(serial.table, parallel.table)
    assert serial.best_lambda == parallel.best_lambda


def test_fold_features_builder_sees_fold_indices(training_data):
    X, T, delta = training_data
    calls = []

    def fold_features(train_idx, val_idx):
        calls.append((len(train_idx), len(val_idx)))
        return X[train_idx], X[val_idx]

    with_builder = grid_search_lambda(None, T, delta, [0.5], cv_folds=3, seed=1, fold_features=fold_features)
    direct = grid_search_lambda(X, T, delta, [0.5], cv_folds=3, seed=1)

    assert len(calls) == 3
    assert all(n_train + n_val == 150 for n_train, n_val in calls)
    pd.testing.assert_frame_equal(with_builder.table, direct.table)


def test_failed_fits_are_reported(training_data):
    X, T, delta = training_data

    def constant_features(train_idx, val_idx):
        return np.ones((len(train_idx), 2)), np.ones((len(val_idx), 2))

    with pytest.raises(CoxModelError, match="every lambda had a failed fit"):
        grid_search_lambda(None, T, delta, [0.5, 1.0], cv_folds=3, seed=0, fold_features=constant_features)


def test_grid_search_input_validation(training_data):
    X, T, delta = training_data
    with pytest.raises(CoxModelError, match="empty"):
        grid_search_lambda(X, T, delta, [], cv_folds=3, seed=0)
    with pytest.raises(ValueError, match="fold_features"):
        grid_search_lambda(None, T, delta, [0.5], cv_folds=3, seed=0)


def test_selected_penalty_keeps_support_sparse():
    true_beta = [1.2, -1.0] + [0.0] * 8
    X, T, delta = simulate_cox(1000, true_beta, seed=41)
    Z = (X - X.mean(axis=0)) / X.std(axis=0)
    grid = lambda_max(Z, T, delta) * np.array([0.9, 0.6, 0.4, 0.25, 0.15])

    result = grid_search_lambda(X, T, delta, grid, cv_folds=3, seed=0)
    model = fit_cox_lasso(X, T, delta, CoxFitConfig(lam=result.best_lambda))

    assert 1 <= model.n_nonzero <= 2 * np.count_nonzero(true_beta)
    assert model.beta[0] > 0
