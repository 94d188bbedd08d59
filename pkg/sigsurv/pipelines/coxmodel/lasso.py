"""LASSO-penalized Cox partial likelihood and its proximal-gradient solver."""

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sigsurv.common.exceptions import ConvergenceError, CoxModelError

logger = logging.getLogger(__name__)

LOG_EVERY = 500


class CoxSolverConfig(BaseModel):
    """
    Solver settings shared by every fit of a run.

    Attributes:
        max_iters (int): Iteration cap of the proximal-gradient loop.
        tol (float): Relative objective change below which the loop may stop.
        kkt_tol (float): Absolute KKT tolerance on nonzero coefficients, relative to lambda on zero ones.
        standardize (bool): Fit on unit-variance columns, report coefficients in original units.
        accelerated (bool): Use the monotone accelerated variant instead of plain proximal gradient.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    max_iters: int = Field(10_000, gt=0)
    tol: float = Field(1e-9, gt=0)
    kkt_tol: float = Field(1e-6, gt=0)
    standardize: bool = True
    accelerated: bool = True


class CoxFitConfig(CoxSolverConfig):
    """Solver settings plus the penalty ``lambda`` (applied without a 1/n factor)."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    lam: float = Field(0.0, ge=0, alias="lambda")


@dataclass(frozen=True)
class RiskSets:
    """
    Patients sorted by decreasing duration.

    For sorted position i, the risk set ``{j: T_j >= T_i}`` is the prefix ``[0, last[i]]``,
    so tied durations share one risk set (Breslow).
    """

    order: np.ndarray
    last: np.ndarray
    events: np.ndarray

    @classmethod
    def build(cls, T: np.ndarray, delta: np.ndarray) -> "RiskSets":
        order = np.argsort(-T, kind="stable")
        neg_sorted = -T[order]
        last = np.searchsorted(neg_sorted, neg_sorted, side="right") - 1
        return cls(order=order, last=last, events=delta[order].astype(float))


def check_survival_data(X: np.ndarray, T: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    delta = np.asarray(delta)
    if X.ndim != 2 or X.shape[0] != T.shape[0] or T.shape != delta.shape:
        raise CoxModelError(f"inconsistent shapes: X {X.shape}, T {T.shape}, delta {delta.shape}")
    if not np.all(np.isfinite(X)):
        raise CoxModelError("design matrix has non-finite entries")
    if np.any(~np.isfinite(T)) or np.any(T <= 0):
        raise CoxModelError("durations must be finite and positive")
    if not np.all(np.isin(delta, (0, 1))):
        raise CoxModelError("event indicators must be 0 or 1")
    if not np.any(delta == 1):
        raise CoxModelError("no events: the partial likelihood is undefined")
    return X, T, delta.astype(int)


def _smooth_value_sorted(eta_s: np.ndarray, risk: RiskSets) -> tuple[float, np.ndarray]:
    """Value and per-patient log risk-set sums for a linear predictor already in risk-set order."""
    log_risk = np.logaddexp.accumulate(eta_s)[risk.last]
    value = -float(risk.events @ (eta_s - log_risk))
    if not np.isfinite(value):
        raise CoxModelError("non-finite partial likelihood")
    return value, log_risk


def _smooth_value_and_grad(X_sorted: np.ndarray, beta: np.ndarray, risk: RiskSets) -> tuple[float, np.ndarray]:
    eta_s = X_sorted @ beta
    value, log_risk = _smooth_value_sorted(eta_s, risk)

    # log of sum over events i whose risk set contains j of 1 / sum_{k in R_i} exp(eta_k)
    log_contrib = np.full(eta_s.shape, -np.inf)
    is_event = risk.events == 1
    np.logaddexp.at(log_contrib, risk.last[is_event], -log_risk[is_event])
    log_exposure = np.logaddexp.accumulate(log_contrib[::-1])[::-1]
    # each term is exp(eta_j - log_risk_i) <= 1 because j is in R_i
    fitted = np.exp(eta_s + log_exposure)

    grad = -(X_sorted.T @ (risk.events - fitted))
    if not np.all(np.isfinite(grad)):
        raise CoxModelError("non-finite partial likelihood gradient")
    return value, grad


def neg_log_partial_likelihood(beta: np.ndarray, X: np.ndarray, T: np.ndarray, delta: np.ndarray) -> float:
    """Smooth part ``-sum_{i: delta_i=1} [x_i beta - log sum_{j in R_i} exp(x_j beta)]``."""
    X, T, delta = check_survival_data(X, T, delta)
    risk = RiskSets.build(T, delta)
    return _smooth_value_sorted(X[risk.order] @ np.asarray(beta, dtype=float), risk)[0]


def neg_log_partial_likelihood_grad(beta: np.ndarray, X: np.ndarray, T: np.ndarray, delta: np.ndarray) -> np.ndarray:
    X, T, delta = check_survival_data(X, T, delta)
    risk = RiskSets.build(T, delta)
    return _smooth_value_and_grad(X[risk.order], np.asarray(beta, dtype=float), risk)[1]


def neg_penalized_loglik(beta: np.ndarray, X: np.ndarray, T: np.ndarray, delta: np.ndarray, lam: float) -> float:
    """
    Objective of the LASSO-Cox problem, ``-log PL(beta) + lam * ||beta||_1``.

    Risk sets are ``R_i = {j: T_j >= T_i}``; log-sum-exp terms are evaluated stably.

    Raises:
        CoxModelError: If there is no event, inputs are invalid or an intermediate is non-finite.
    """
    if lam < 0:
        raise CoxModelError(f"lambda must be non-negative, got {lam}")
    beta = np.asarray(beta, dtype=float)
    return neg_log_partial_likelihood(beta, X, T, delta) + lam * float(np.abs(beta).sum())


def lambda_max(X: np.ndarray, T: np.ndarray, delta: np.ndarray) -> float:
    """Smallest penalty giving the all-zero solution: ``||grad at beta=0||_inf`` of the given design."""
    return float(np.max(np.abs(neg_log_partial_likelihood_grad(np.zeros(np.shape(X)[1]), X, T, delta)), initial=0.0))


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0)


def kkt_violation(beta: np.ndarray, grad: np.ndarray, lam: float) -> float:
    """
    Largest absolute violation of the LASSO optimality conditions.

    Zero coefficients need ``|grad_k| <= lam``; nonzero ones need ``grad_k + lam * sign(beta_k) = 0``.
    """
    zero = beta == 0
    violation = np.where(
        zero,
        np.maximum(np.abs(grad) - lam, 0.0),
        np.abs(grad + lam * np.sign(beta)),
    )
    return float(np.max(violation, initial=0.0))


def kkt_satisfied(beta: np.ndarray, grad: np.ndarray, lam: float, tol: float) -> bool:
    """
    Optimality certificate of a returned solution.

    Zero coefficients must have ``|grad_k| <= lam * (1 + tol)`` and nonzero ones
    ``|grad_k + lam * sign(beta_k)| <= tol``.
    """
    zero = beta == 0
    zero_ok = np.all(np.abs(grad[zero]) <= lam * (1.0 + tol))
    nonzero_ok = np.all(np.abs(grad[~zero] + lam * np.sign(beta[~zero])) <= tol)
    return bool(zero_ok and nonzero_ok)


@dataclass(frozen=True)
class SolverResult:
    beta: np.ndarray
    objective: float
    iterations: int
    kkt_violation: float
    lambda_max: float
    history: np.ndarray


def proximal_gradient(X: np.ndarray, T: np.ndarray, delta: np.ndarray, lam: float,
                      cfg: CoxSolverConfig) -> SolverResult:
    """
    Minimize the LASSO-Cox objective from ``beta = 0`` by proximal gradient with backtracking.

    With ``cfg.accelerated`` the monotone accelerated scheme is used: the extrapolated point
    only moves the iterate when the objective does not increase, and the momentum restarts
    after such a rejection. Either way the objective values in ``history`` are non-increasing.

    Stops once the relative objective change is below ``cfg.tol`` and the KKT conditions
    hold to ``cfg.kkt_tol`` (see ``kkt_satisfied``).

    Raises:
        ConvergenceError: If ``cfg.max_iters`` is reached first.
    """
    X, T, delta = check_survival_data(X, T, delta)
    risk = RiskSets.build(T, delta)
    X_sorted = X[risk.order]
    p = X.shape[1]

    f0, grad0 = _smooth_value_and_grad(X_sorted, np.zeros(p), risk)
    lam_max = float(np.max(np.abs(grad0), initial=0.0))

    x = np.zeros(p)
    grad_x = grad0
    obj_x = f0
    if kkt_satisfied(x, grad_x, lam, cfg.kkt_tol):
        return SolverResult(beta=x, objective=obj_x, iterations=0, kkt_violation=kkt_violation(x, grad_x, lam),
                            lambda_max=lam_max, history=np.array([obj_x]))

    y, f_y, grad_y = x, f0, grad0
    t = 1.0
    lipschitz = 1.0
    history = [obj_x]

    for iteration in range(1, cfg.max_iters + 1):
        while True:
            z = soft_threshold(y - grad_y / lipschitz, lam / lipschitz)
            step = z - y
            f_z = _smooth_value_sorted(X_sorted @ z, risk)[0]
            if f_z <= f_y + grad_y @ step + 0.5 * lipschitz * (step @ step) + 1e-12 * abs(f_y):
                break
            lipschitz *= 2.0

        obj_z = f_z + lam * float(np.abs(z).sum())
        x_prev = x
        obj_prev = obj_x
        if obj_z <= obj_x:
            x, obj_x = z, obj_z
        history.append(obj_x)

        if cfg.accelerated and obj_z <= obj_prev:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev)
            t = t_next
        else:
            # plain step, or momentum restart after a rejected extrapolation
            y, t = x, 1.0

        f_y, grad_y = _smooth_value_and_grad(X_sorted, y, risk)

        if iteration % LOG_EVERY == 0:
            logger.debug(f"iteration {iteration}: objective={obj_x:.10g}, step=1/{lipschitz:.3g}")

        relative_change = abs(obj_prev - obj_x) / max(1.0, abs(obj_prev))
        if relative_change < cfg.tol:
            grad_x = grad_y if y is x else _smooth_value_and_grad(X_sorted, x, risk)[1]
            if kkt_satisfied(x, grad_x, lam, cfg.kkt_tol):
                return SolverResult(beta=x, objective=obj_x, iterations=iteration,
                                    kkt_violation=kkt_violation(x, grad_x, lam), lambda_max=lam_max,
                                    history=np.array(history))

    grad_x = _smooth_value_and_grad(X_sorted, x, risk)[1]
    raise ConvergenceError(f"proximal gradient did not converge at lambda={lam}",
                           kkt_violation=kkt_violation(x, grad_x, lam), iterations=cfg.max_iters)
