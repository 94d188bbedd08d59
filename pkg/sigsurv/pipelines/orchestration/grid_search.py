import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.model_selection import StratifiedKFold

from sigsurv.common.exceptions import CoxModelError, SigSurvError
from sigsurv.common.utils.seeding import CV_STREAM, substream_int
from sigsurv.pipelines.coxmodel.lasso import CoxFitConfig, CoxSolverConfig
from sigsurv.pipelines.coxmodel.model import fit_cox_lasso, risk_score
from sigsurv.pipelines.metrics.discrimination import concordance_index

logger = logging.getLogger(__name__)

FoldFeatures = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class GridSearchResult:
    best_lambda: float
    table: pd.DataFrame


def cv_splits(delta: np.ndarray, cv_folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified validation folds drawn from the ``cv`` substream of ``seed``."""
    delta = np.asarray(delta)
    if np.sum(delta == 1) < cv_folds:
        raise CoxModelError(f"too few events for {cv_folds} cross-validation folds: {int(np.sum(delta == 1))}")
    splitter = StratifiedKFold(n_splits=cv_folds, shuffle=True, random_state=substream_int(seed, CV_STREAM))
    return [(np.sort(tr), np.sort(va)) for tr, va in splitter.split(np.zeros(delta.shape[0]), delta)]


def _fit_and_score(
    lam: float,
    fold: int,
    X_train: np.ndarray,
    X_val: np.ndarray,
    T: np.ndarray,
    delta: np.ndarray,
    train_idx: np.ndarray,
    val_idx: np.ndarray,
    solver: CoxSolverConfig,
) -> tuple[float, int, float, int, str | None]:
    cfg = CoxFitConfig(lam=lam, **solver.model_dump())
    try:
        model = fit_cox_lasso(X_train, T[train_idx], delta[train_idx], cfg)
        score = concordance_index(T[val_idx], delta[val_idx], risk_score(model, X_val))
        return lam, fold, score, model.n_nonzero, None
    except SigSurvError as err:
        return lam, fold, float("nan"), 0, f"{type(err).__name__}: {err}"


def grid_search_lambda(
    X: np.ndarray | None,
    T: np.ndarray,
    delta: np.ndarray,
    lambdas: Sequence[float],
    cv_folds: int,
    seed: int,
    solver: CoxSolverConfig | None = None,
    *,
    fold_features: FoldFeatures | None = None,
    n_jobs: int = 1,
) -> GridSearchResult:
    """
    Choose the penalty maximizing the mean held-out C-index over stratified CV folds.

    Every (lambda, fold) fit is an independent task; results are merged in grid and fold
    order so the table does not depend on ``n_jobs``. A lambda with any failed fold is
    reported but cannot be selected. Ties go to the larger lambda.

    Args:
        X (np.ndarray | None): Training features; may be ``None`` when ``fold_features`` is given.
        T (np.ndarray): Training durations.
        delta (np.ndarray): Training event indicators.
        lambdas (Sequence[float]): Candidate penalties.
        cv_folds (int): Number of validation folds.
        seed (int): Master seed; folds come from its ``cv`` substream.
        solver (CoxSolverConfig | None): Solver settings shared by every fit.
        fold_features (FoldFeatures | None): Builds ``(X_train, X_val)`` from the fold's row
            indices, for feature maps that must be refit inside each fold.
        n_jobs (int): joblib workers.

    Returns:
        GridSearchResult: Best penalty and one table row per penalty.

    Raises:
        CoxModelError: If the grid is empty or every penalty had a failed fit.
    """
    if len(lambdas) == 0:
        raise CoxModelError("lambda grid is empty")
    if X is None and fold_features is None:
        raise ValueError("either X or fold_features is required")
    solver = solver or CoxSolverConfig()
    T = np.asarray(T, dtype=float)
    delta = np.asarray(delta).astype(int)

    splits = cv_splits(delta, cv_folds, seed)
    fold_data = []
    for train_idx, val_idx in splits:
        if fold_features is not None:
            fold_data.append(fold_features(train_idx, val_idx))
        else:
            assert X is not None
            fold_data.append((X[train_idx], X[val_idx]))

    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_and_score)(float(lam), k, fold_data[k][0], fold_data[k][1], T, delta, tr, va, solver)
        for lam in lambdas
        for k, (tr, va) in enumerate(splits)
    )

    rows = []
    for i, lam in enumerate(lambdas):
        chunk = results[i * cv_folds:(i + 1) * cv_folds]
        scores = np.array([r[2] for r in chunk])
        errors = [f"fold {r[1]}: {r[4]}" for r in chunk if r[4] is not None]
        if errors:
            logger.warning(f"lambda={lam:g}: {len(errors)} of {cv_folds} fits failed: {errors[0]}")
        row = {
            "lambda": float(lam),
            "mean_cindex": float(np.mean(scores)) if not errors else float("nan"),
            "sd_cindex": float(np.std(scores, ddof=1)) if not errors else float("nan"),
            "mean_nonzero": float(np.mean([r[3] for r in chunk])),
            "n_failed": len(errors),
            "errors": " | ".join(errors),
        }
        row.update({f"cindex_fold_{k}": float(s) for k, s in enumerate(scores)})
        rows.append(row)
    table = pd.DataFrame(rows)

    eligible = table[table["n_failed"] == 0]
    if eligible.empty:
        raise CoxModelError(f"every lambda had a failed fit; first failure: {table['errors'].iloc[0]}")
    best_score = eligible["mean_cindex"].max()
    best_lambda = float(eligible.loc[eligible["mean_cindex"] == best_score, "lambda"].max())

    logger.info(f"Grid search over {len(lambdas)} lambdas x {cv_folds} folds: "
                f"best lambda={best_lambda:g} with mean C-index={best_score:.4f}")
    return GridSearchResult(best_lambda=best_lambda, table=table)
