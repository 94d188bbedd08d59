import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from sigsurv.common.exceptions import CoxModelError, DegenerateDesignError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.coxmodel.lasso import CoxFitConfig, check_survival_data, proximal_gradient

logger = logging.getLogger(__name__)

ZERO_VARIANCE_RTOL = 1e-12


@dataclass(frozen=True)
class Standardization:
    """Per-column centering and scaling applied before the fit."""

    mean: np.ndarray
    scale: np.ndarray


@dataclass(frozen=True)
class CoxModel:
    """
    Fitted LASSO-Cox model.

    Attributes:
        beta (np.ndarray): Coefficients in original feature units, one per feature name.
        lam (float): Penalty the model was fitted with.
        baseline (StepFunction): Breslow cumulative baseline hazard H0, starting at 0.
        feature_names (tuple[str, ...]): Column words the coefficients refer to.
        standardization (Standardization | None): Column statistics used during the fit.
        kkt_violation (float): Largest absolute KKT violation of the returned solution, in fitting units.
        iterations (int): Solver iterations.
    """

    beta: np.ndarray
    lam: float
    baseline: StepFunction
    feature_names: tuple[str, ...]
    standardization: Standardization | None = None
    kkt_violation: float = 0.0
    iterations: int = 0

    def __post_init__(self) -> None:
        beta = np.array(self.beta, dtype=float)
        if beta.shape != (len(self.feature_names),):
            raise CoxModelError(f"beta has shape {beta.shape}, expected ({len(self.feature_names)},)")
        if not np.all(np.isfinite(beta)):
            raise CoxModelError("beta has non-finite entries")
        if self.baseline.initial != 0 or np.any(self.baseline.jumps() < 0):
            raise CoxModelError("baseline cumulative hazard must start at 0 and be non-decreasing")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_nonzero(self) -> int:
        return int(np.count_nonzero(self.beta))


def _standardize(X: np.ndarray) -> tuple[np.ndarray, Standardization, np.ndarray]:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    varying = scale > ZERO_VARIANCE_RTOL * np.maximum(1.0, np.abs(mean))
    safe_scale = np.where(varying, scale, 1.0)
    return (X - mean) / safe_scale, Standardization(mean=mean, scale=safe_scale), varying


def fit_cox_lasso(
    X: np.ndarray,
    T: np.ndarray,
    delta: np.ndarray,
    cfg: CoxFitConfig,
    feature_names: Sequence[str] | None = None,
) -> CoxModel:
    """
    Fit ``argmin_beta -log PL(beta) + lambda * ||beta||_1`` and the Breslow baseline.

    Zero-variance columns are dropped with a warning and get a zero coefficient. With
    ``cfg.standardize`` the penalty acts on unit-variance columns and the returned
    coefficients are mapped back to original units.

    Args:
        X (np.ndarray): Design matrix, shape (n, k).
        T (np.ndarray): Durations, positive.
        delta (np.ndarray): Event indicators.
        cfg (CoxFitConfig): Penalty and solver settings.
        feature_names (Sequence[str] | None): Column names; defaults to ``x0, x1, ...``.

    Returns:
        CoxModel: The fitted model, with its KKT residual and iteration count.

    Raises:
        CoxModelError: On invalid inputs or no events.
        DegenerateDesignError: If no column varies.
        ConvergenceError: If the solver hits ``cfg.max_iters``.
    """
    X, T, delta = check_survival_data(X, T, delta)
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{k}" for k in range(X.shape[1]))
    if len(names) != X.shape[1]:
        raise CoxModelError(f"{len(names)} feature names for {X.shape[1]} columns")

    Z, standardization, varying = _standardize(X)
    if not np.any(varying):
        raise DegenerateDesignError("every feature column has zero variance")
    if not np.all(varying):
        dropped = [names[k] for k in np.flatnonzero(~varying)]
        logger.warning(f"Dropping {len(dropped)} zero-variance columns: {dropped[:10]}")

    design = Z[:, varying] if cfg.standardize else X[:, varying]
    result = proximal_gradient(design, T, delta, cfg.lam, cfg)

    beta = np.zeros(X.shape[1])
    beta[varying] = result.beta / standardization.scale[varying] if cfg.standardize else result.beta

    model = CoxModel(
        beta=beta,
        lam=cfg.lam,
        baseline=breslow_baseline(beta, X, T, delta),
        feature_names=names,
        standardization=standardization if cfg.standardize else None,
        kkt_violation=result.kkt_violation,
        iterations=result.iterations,
    )
    logger.info(
        f"Fitted Cox-LASSO: lambda={cfg.lam:g} (lambda_max={result.lambda_max:.4g}), "
        f"nonzero={model.n_nonzero}/{len(beta)}, iterations={result.iterations}, kkt={result.kkt_violation:.2e}"
    )
    return model


def breslow_baseline(beta: np.ndarray, X: np.ndarray, T: np.ndarray, delta: np.ndarray) -> StepFunction:
    """
    Breslow cumulative baseline hazard.

    ``H0(t) = sum_{event times u <= t} d_u / sum_{j: T_j >= u} exp(x_j beta)`` with ``d_u``
    the number of events at ``u``. Without events, ``H0`` is identically 0.
    """
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    delta = np.asarray(delta).astype(int)
    eta = X @ np.asarray(beta, dtype=float)

    event_times, event_counts = np.unique(T[delta == 1], return_counts=True)
    if event_times.size == 0:
        return StepFunction(times=np.empty(0), values=np.empty(0), initial=0.0)

    order = np.argsort(-T, kind="stable")
    neg_sorted = -T[order]
    log_risk = np.logaddexp.accumulate(eta[order])
    positions = np.searchsorted(neg_sorted, -event_times, side="right") - 1
    increments = event_counts * np.exp(-log_risk[positions])

    return StepFunction(times=event_times, values=np.cumsum(increments), initial=0.0)


def _as_rows(model: CoxModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != model.beta.shape[0] or features.ndim not in (1, 2):
        raise CoxModelError(f"dimension mismatch: model has {model.beta.shape[0]} features, got {features.shape}")
    return features


def risk_score(model: CoxModel, features: np.ndarray) -> np.ndarray:
    """Linear predictor ``eta = x . beta`` for one row (scalar result) or a matrix of rows."""
    return _as_rows(model, features) @ model.beta


def predict_survival(model: CoxModel, features: np.ndarray, t: float) -> np.ndarray:
    """``S(t | x) = exp(-H0(t) * exp(eta))``, with H0 evaluated right-continuously."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    cumulative = model.baseline(t)
    return np.exp(-cumulative * np.exp(risk_score(model, features)))


def predict_survival_curve(model: CoxModel, features: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """Survival probabilities of every row at every time, shape (n_rows, n_times)."""
    rows = np.atleast_2d(_as_rows(model, features))
    times_arr = np.asarray(times, dtype=float)
    if np.any(times_arr < 0):
        raise ValueError("times must be non-negative")
    return np.exp(-np.outer(np.exp(rows @ model.beta), model.baseline(times_arr)))
