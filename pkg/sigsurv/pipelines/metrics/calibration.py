import logging
from collections.abc import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from sigsurv.common.exceptions import MetricError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.metrics.discrimination import evaluation_grid
from sigsurv.pipelines.metrics.nonparametric import censoring_survival, check_survival_arrays

logger = logging.getLogger(__name__)

SurvivalFn = Callable[[float], np.ndarray]


def brier_score(
    T: np.ndarray,
    delta: np.ndarray,
    surv_prob_at_t: np.ndarray,
    t: float,
    G_hat: StepFunction | None = None,
) -> float:
    """
    Inverse-probability-of-censoring weighted Brier score at ``t``.

    ``BS(t) = (1/n) sum_i [ S_i(t)^2 1{T_i <= t, delta_i = 1} / G(T_i-)
    + (1 - S_i(t))^2 1{T_i > t} / G(t) ]``. Patients censored before ``t`` contribute 0.
    Terms whose weight would divide by ``G = 0`` are dropped and counted in a warning.

    Args:
        T (np.ndarray): Durations.
        delta (np.ndarray): Event indicators.
        surv_prob_at_t (np.ndarray): Predicted survival probability of each patient at ``t``.
        t (float): Evaluation time.
        G_hat (StepFunction | None): Censoring survival curve; estimated from ``(T, delta)``
            when omitted.

    Returns:
        float: BS(t) in [0, 1].
    """
    T, delta, surv = check_survival_arrays(T, delta, surv_prob_at_t)
    if np.any((surv < 0) | (surv > 1)):
        raise MetricError("predicted survival probabilities must lie in [0, 1]")
    if G_hat is None:
        G_hat = censoring_survival(T, delta)

    had_event = (T <= t) & (delta == 1)
    survived = T > t

    g_event = G_hat.left_limit(T)
    g_t = float(G_hat(t))

    terms = np.zeros_like(T)
    event_ok = had_event & (g_event > 0)
    terms[event_ok] = surv[event_ok] ** 2 / g_event[event_ok]
    if g_t > 0:
        terms[survived] = (1.0 - surv[survived]) ** 2 / g_t

    dropped = int(np.sum(had_event & ~event_ok) + (np.sum(survived) if g_t <= 0 else 0))
    if dropped:
        logger.warning(f"Brier score at t={t}: dropped {dropped} terms with zero censoring survival")

    return float(terms.sum() / T.shape[0])


def brier_curve(
    T: np.ndarray,
    delta: np.ndarray,
    surv_fn: SurvivalFn,
    times: Sequence[float],
    G_hat: StepFunction | None = None,
) -> list[tuple[float, float]]:
    """BS(t) at each time; ``surv_fn(t)`` returns every patient's predicted survival at ``t``."""
    if G_hat is None:
        G_hat = censoring_survival(T, delta)
    return [(float(t), brier_score(T, delta, surv_fn(float(t)), float(t), G_hat)) for t in times]


def integrated_brier(
    T: np.ndarray,
    delta: np.ndarray,
    surv_fn: SurvivalFn,
    tau1: float,
    tau2: float,
    grid: Sequence[float] | None = None,
    G_hat: StepFunction | None = None,
) -> float:
    """
    ``(tau2 - tau1)^-1`` times the trapezoidal integral of BS(t) over ``[tau1, tau2]``.

    The default grid is the observed event times in ``(tau1, tau2)`` padded with both ends.
    """
    if not tau1 < tau2:
        raise MetricError(f"tau1 must be below tau2, got {tau1} >= {tau2}")

    inner = evaluation_grid(T, delta, tau1, tau2) if grid is None else np.asarray(grid, dtype=float)
    inner = inner[(inner > tau1) & (inner < tau2)]
    points = np.unique(np.concatenate([[tau1], inner, [tau2]]))

    scores = [bs for _, bs in brier_curve(T, delta, surv_fn, points, G_hat)]
    return float(trapezoid(scores, points) / (tau2 - tau1))
