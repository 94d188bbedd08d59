import logging

import numpy as np
import pytest
from scipy.integrate import trapezoid

from sigsurv.common.exceptions import MetricError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.metrics.calibration import brier_curve, brier_score, integrated_brier

T = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
UNCENSORED = np.ones(6, dtype=int)


def test_coin_flip_predictions_score_a_quarter():
    for t in (0.5, 2.0, 3.5, 6.0):
        assert brier_score(T, UNCENSORED, np.full(6, 0.5), t) == pytest.approx(0.25)


def test_perfect_predictions_score_zero():
    t = 3.0
    surv = (T > t).astype(float)

    assert brier_score(T, UNCENSORED, surv, t) == 0.0


def test_censored_patients_are_reweighted():
    delta = np.array([1, 0, 1, 1, 0, 1])
    G = StepFunction(times=np.array([2.0, 5.0]), values=np.array([0.8, 0.4]), initial=1.0)
    surv = np.array([0.1, 0.9, 0.3, 0.6, 0.5, 0.7])
    t = 3.5

    # events by t: patients 0 (G(1-)=1) and 2 (G(3-)=0.8); at risk after t: 3, 4, 5 with G(3.5)=0.8
    expected = (0.1**2 / 1.0 + 0.3**2 / 0.8 + (0.4**2 + 0.5**2 + 0.3**2) / 0.8) / 6
    assert brier_score(T, delta, surv, t, G) == pytest.approx(expected)


def test_zero_censoring_survival_drops_terms(caplog):
    G = StepFunction(times=np.array([2.0]), values=np.array([0.0]), initial=1.0)

    with caplog.at_level(logging.WARNING):
        score = brier_score(T, UNCENSORED, np.full(6, 0.5), 3.0, G)

    # only the events at t=1 and t=2 keep a positive weight
    assert score == pytest.approx(0.5 / 6)
    assert "dropped" in caplog.text


def test_probabilities_outside_unit_interval():
    with pytest.raises(MetricError, match=r"\[0, 1\]"):
        brier_score(T, UNCENSORED, np.full(6, 1.5), 2.0)


def test_brier_curve_evaluates_surv_fn_per_time():
    calls = []

    def surv_fn(t):
        calls.append(t)
        return np.full(6, 0.5)

    curve = brier_curve(T, UNCENSORED, surv_fn, [1.0, 2.0])

    assert calls == [1.0, 2.0]
    assert curve == [(1.0, pytest.approx(0.25)), (2.0, pytest.approx(0.25))]


def test_integrated_brier_of_constant_score():
    assert integrated_brier(T, UNCENSORED, lambda t: np.full(6, 0.5), 0.5, 5.5) == pytest.approx(0.25)


def test_integrated_brier_uses_trapezoids_on_given_grid():
    def surv_fn(t):
        return np.exp(-t / 3.0) * np.ones(6)

    grid = [1.0, 2.5, 4.0]
    points = [0.5, 1.0, 2.5, 4.0, 5.5]
    scores = [brier_score(T, UNCENSORED, surv_fn(p), p) for p in points]
    expected = trapezoid(scores, points) / 5.0

    assert integrated_brier(T, UNCENSORED, surv_fn, 0.5, 5.5, grid=grid) == pytest.approx(expected)


def test_integrated_brier_window():
    with pytest.raises(MetricError, match="tau1 must be below tau2"):
        integrated_brier(T, UNCENSORED, lambda t: np.full(6, 0.5), 3.0, 1.0)


def test_integrated_brier_is_stable_under_grid_refinement():
    rng = np.random.default_rng(12)
    eta = rng.normal(size=200)
    event_times = rng.exponential(5.0 * np.exp(-eta))
    censor_times = rng.exponential(12.0, size=200)
    T_obs = np.minimum(event_times, censor_times) + 1e-6
    delta = (event_times <= censor_times).astype(int)
    tau2 = float(np.quantile(T_obs, 0.7))

    def surv_fn(t: float) -> np.ndarray:
        return np.exp(-t / 5.0 * np.exp(eta))

    coarse = integrated_brier(T_obs, delta, surv_fn, 0.0, tau2, grid=np.linspace(0.0, tau2, 4001))
    fine = integrated_brier(T_obs, delta, surv_fn, 0.0, tau2, grid=np.linspace(0.0, tau2, 8001))

    assert abs(coarse - fine) < 1e-3
