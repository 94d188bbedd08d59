import logging
from collections.abc import Sequence

import numpy as np
from scipy import stats

from sigsurv.common.exceptions import MetricError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.metrics.nonparametric import check_survival_arrays

logger = logging.getLogger(__name__)


def _pair_matrices(T: np.ndarray, delta: np.ndarray, eta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    ``comparable[i, j]`` is 1 when j had an observed event strictly before ``T_i``;
    ``credit[i, j]`` is 1 if ``eta_j > eta_i``, 0.5 on a tie, 0 otherwise, on comparable pairs.
    """
    comparable = (T[None, :] < T[:, None]) & (delta[None, :] == 1)
    credit = (eta[None, :] > eta[:, None]) + 0.5 * (eta[None, :] == eta[:, None])
    return comparable.astype(float), comparable * credit


def concordance_index(T: np.ndarray, delta: np.ndarray, eta: np.ndarray) -> float:
    """
    Harrell's C-index of risk scores ``eta`` (higher risk should mean earlier event).

    A pair (i, j) is comparable when ``T_j < T_i`` and j had an event; it is concordant when
    ``eta_j > eta_i``. Ties in ``eta`` earn half credit.

    Raises:
        MetricError: If no pair is comparable.
    """
    T, delta, eta = check_survival_arrays(T, delta, eta)
    comparable, credit = _pair_matrices(T, delta, eta)
    denominator = comparable.sum()
    if denominator == 0:
        raise MetricError("no comparable pairs")
    return float(credit.sum() / denominator)


def jackknife_ci(T: np.ndarray, delta: np.ndarray, eta: np.ndarray, alpha: float = 0.05) -> tuple[float, float]:
    """
    Normal-approximation confidence interval of the C-index from leave-one-patient-out
    pseudo-values, clipped to [0, 1].

    Args:
        T (np.ndarray): Durations.
        delta (np.ndarray): Event indicators.
        eta (np.ndarray): Risk scores.
        alpha (float): Miscoverage level; 0.05 gives a 95% interval.

    Returns:
        tuple[float, float]: Lower and upper bounds.

    Raises:
        MetricError: If leaving some patient out removes every comparable pair.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    T, delta, eta = check_survival_arrays(T, delta, eta)
    n = T.shape[0]
    comparable, credit = _pair_matrices(T, delta, eta)

    total_den = comparable.sum()
    total_num = credit.sum()
    if total_den == 0:
        raise MetricError("no comparable pairs")

    # pairs involving patient k are row k plus column k (the diagonal is never comparable)
    den_loo = total_den - comparable.sum(axis=0) - comparable.sum(axis=1)
    num_loo = total_num - credit.sum(axis=0) - credit.sum(axis=1)
    if np.any(den_loo == 0):
        raise MetricError("a leave-one-out sample has no comparable pairs")

    estimate = total_num / total_den
    pseudo = n * estimate - (n - 1) * (num_loo / den_loo)
    std_error = float(np.sqrt(np.var(pseudo, ddof=1) / n)) if n > 1 else 0.0
    z = stats.norm.ppf(1.0 - alpha / 2.0)
    return max(0.0, float(estimate - z * std_error)), min(1.0, float(estimate + z * std_error))


def td_auc(
    T: np.ndarray,
    delta: np.ndarray,
    eta: np.ndarray,
    t: float,
    G_hat: StepFunction | None = None,
) -> float:
    """
    Cumulative/dynamic AUC at time ``t``.

    Cases are patients with an observed event by ``t`` (``delta_j = 1`` and ``T_j <= t``);
    controls are patients still at risk after ``t`` (``T_i > t``). Each case weighs 1, or
    ``1 / G_hat(T_j-)`` when a censoring survival curve is given. Ties in ``eta`` earn half credit.

    Raises:
        MetricError: If there is no case or no control at ``t``, or all case weights vanish.
    """
    T, delta, eta = check_survival_arrays(T, delta, eta)
    cases = (delta == 1) & (T <= t)
    controls = T > t
    if not cases.any() or not controls.any():
        raise MetricError(f"td-AUC not evaluable at t={t}: {int(cases.sum())} cases, {int(controls.sum())} controls")

    weights = np.ones(int(cases.sum()))
    if G_hat is not None:
        g = G_hat.left_limit(T[cases])
        weights = np.divide(1.0, g, out=np.zeros_like(g), where=g > 0)
        if not np.any(weights > 0):
            raise MetricError(f"td-AUC not evaluable at t={t}: censoring survival is 0 at every case")

    eta_cases, eta_controls = eta[cases], eta[controls]
    credit = (eta_cases[:, None] > eta_controls[None, :]) + 0.5 * (eta_cases[:, None] == eta_controls[None, :])
    return float(weights @ credit.sum(axis=1) / (weights.sum() * eta_controls.shape[0]))


def evaluation_grid(T: np.ndarray, delta: np.ndarray, tau1: float, tau2: float) -> np.ndarray:
    """Unique observed event times in ``(tau1, tau2]``."""
    T = np.asarray(T, dtype=float)
    event_times = np.unique(T[np.asarray(delta) == 1])
    return event_times[(event_times > tau1) & (event_times <= tau2)]


def mean_auc(
    T: np.ndarray,
    delta: np.ndarray,
    eta: np.ndarray,
    tau1: float,
    tau2: float,
    grid: Sequence[float] | None = None,
    *,
    weight_curve: StepFunction,
    G_hat: StepFunction | None = None,
) -> float:
    """
    Mean td-AUC over ``(tau1, tau2]`` as a Stieltjes sum against a survival curve.

    ``(W(tau1) - W(tau2))^-1 * sum_t AUC(t) * (W(t-) - W(t))`` over the jump times of
    ``weight_curve`` in the window; with an explicit ``grid`` the increments are taken
    between consecutive grid points starting from ``tau1``. Times where the AUC is not
    evaluable are skipped and the remaining weights renormalized.

    Raises:
        MetricError: If the window carries no mass of ``weight_curve`` or no time is evaluable.
    """
    if not tau1 < tau2:
        raise MetricError(f"tau1 must be below tau2, got {tau1} >= {tau2}")

    if grid is None:
        times = weight_curve.times[(weight_curve.times > tau1) & (weight_curve.times <= tau2)]
        increments = weight_curve.left_limit(times) - weight_curve(times)
    else:
        times = np.asarray(sorted(g for g in grid if tau1 < g <= tau2), dtype=float)
        previous = np.concatenate([[tau1], times[:-1]])
        increments = weight_curve(previous) - weight_curve(times)

    mass = float(weight_curve(tau1) - weight_curve(tau2))
    if mass <= 0 or not np.any(increments > 0):
        raise MetricError(f"no mass of the weighting curve in ({tau1}, {tau2}]")

    total, used = 0.0, 0.0
    skipped = 0
    for t, w in zip(times, increments, strict=True):
        if w <= 0:
            continue
        try:
            total += w * td_auc(T, delta, eta, float(t), G_hat)
            used += w
        except MetricError:
            skipped += 1

    if used == 0:
        raise MetricError(f"td-AUC is not evaluable anywhere in ({tau1}, {tau2}]")
    if skipped:
        logger.warning(f"Skipped {skipped} non-evaluable times in mean AUC; renormalized over the rest")
    return total / used
