import numpy as np

from sigsurv.common.exceptions import MetricError
from sigsurv.common.utils.step_function import StepFunction


def check_survival_arrays(T: np.ndarray, delta: np.ndarray, *others: np.ndarray) -> tuple[np.ndarray, ...]:
    """Coerce durations, indicators and any per-patient arrays, checking lengths and values."""
    T = np.asarray(T, dtype=float)
    delta = np.asarray(delta)
    if T.ndim != 1 or T.shape != delta.shape:
        raise MetricError(f"durations and indicators must be 1-D of equal length, got {T.shape}, {delta.shape}")
    if np.any(~np.isfinite(T)) or np.any(T <= 0):
        raise MetricError("durations must be finite and positive")
    if not np.all(np.isin(delta, (0, 1))):
        raise MetricError("event indicators must be 0 or 1")

    coerced = [np.asarray(x, dtype=float) for x in others]
    for x in coerced:
        if x.shape[0] != T.shape[0]:
            raise MetricError(f"expected {T.shape[0]} values per patient, got {x.shape[0]}")
    return (T, delta.astype(int), *coerced)


def compute_counts(T: np.ndarray, delta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Unique times with the number of events, the number at risk and the number censored at each.
    """
    times, inverse = np.unique(T, return_inverse=True)
    n_events = np.bincount(inverse, weights=delta, minlength=times.size).astype(int)
    n_total = np.bincount(inverse, minlength=times.size)
    n_at_risk = np.cumsum(n_total[::-1])[::-1]
    return times, n_events, n_at_risk, n_total - n_events


def kaplan_meier(T: np.ndarray, delta: np.ndarray) -> StepFunction:
    """
    Product-limit estimate of the survival function of the event coded 1 in ``delta``.

    Pass ``1 - delta`` to estimate the censoring survival function G.

    Returns:
        StepFunction: Right-continuous curve with ``initial = 1``.
    """
    T, delta = check_survival_arrays(T, delta)
    times, n_events, n_at_risk, _ = compute_counts(T, delta)
    survival = np.cumprod(1.0 - n_events / n_at_risk)
    return StepFunction(times=times, values=survival, initial=1.0)


def censoring_survival(T: np.ndarray, delta: np.ndarray) -> StepFunction:
    """Kaplan–Meier estimate G of the censoring distribution."""
    return kaplan_meier(T, 1 - np.asarray(delta))
