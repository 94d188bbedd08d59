import numpy as np
import pytest

from sigsurv.common.exceptions import MetricError
from sigsurv.pipelines.metrics.association import CorrelationResult
from sigsurv.pipelines.metrics.report import EvaluationReport, evaluate_predictions
from tests.pipelines.coxmodel.test_lasso import simulate_cox


@pytest.fixture
def predictions():
    """Fixture providing true exponential hazards of 300 simulated patients."""
    X, T, delta = simulate_cox(300, [1.0, -0.5], seed=13)
    eta = X @ np.array([1.0, -0.5])

    def surv_fn(t):
        return np.exp(-t * np.exp(eta))

    return T, delta, eta, surv_fn


def test_report_of_true_hazards(predictions):
    T, delta, eta, surv_fn = predictions

    report = evaluate_predictions(T, delta, eta, surv_fn, tau1=0.05, tau2=1.5, ibs_horizons=[0.5, 1.0])

    assert report.n_patients == 300
    assert report.n_events == int(delta.sum())
    assert report.c_index > 0.65
    assert report.c_index_ci95[0] <= report.c_index <= report.c_index_ci95[1]
    assert 0.5 < report.mean_auc <= 1.0
    assert set(report.ibs_by_horizon) == {0.5, 1.0}
    assert all(0 <= v < 0.25 for v in report.ibs_by_horizon.values())
    assert report.correlation is not None and report.correlation.pearson < 0
    assert report.quartile_summary is not None
    assert all(0.05 < t <= 1.5 for t, _ in report.td_auc)


@pytest.mark.parametrize("auc_weighting", ["none", "ipcw"])
@pytest.mark.parametrize("mean_auc_weights", ["survival", "censoring"])
def test_weighting_options(predictions, auc_weighting, mean_auc_weights):
    T, delta, eta, surv_fn = predictions

    report = evaluate_predictions(
        T, delta, eta, surv_fn,
        tau1=0.05, tau2=1.0, ibs_horizons=[1.0],
        auc_weighting=auc_weighting, mean_auc_weights=mean_auc_weights,
    )

    assert 0.5 < report.mean_auc <= 1.0


def test_report_serializations(predictions):
    T, delta, eta, surv_fn = predictions
    report = evaluate_predictions(T, delta, eta, surv_fn, tau1=0.05, tau2=1.0, ibs_horizons=[1.0])

    document = report.to_dict()
    assert document["ibs_by_horizon"] == {"1": report.ibs_by_horizon[1.0]}
    assert document["correlation"]["n"] == report.correlation.n

    metrics = report.summary_metrics()
    assert list(metrics) == ["c_index", "mean_auc", "ibs_1", "pearson", "spearman"]

    table = report.to_table()
    assert "C-index 95% CI" in table
    assert "Kruskal-Wallis" in table

    curves = report.curves()
    assert list(curves["td_auc"].columns) == ["t", "auc"]
    assert len(curves["quartiles"]) == 4


def test_unevaluable_ibs_horizon_is_left_out(predictions):
    T, delta, eta, surv_fn = predictions

    report = evaluate_predictions(T, delta, eta, surv_fn, tau1=0.05, tau2=1.0, ibs_horizons=[0.01, 1.0])

    assert list(report.ibs_by_horizon) == [1.0]


def test_report_rejects_interval_without_estimate():
    with pytest.raises(MetricError, match="does not contain"):
        EvaluationReport(
            n_patients=10,
            n_events=5,
            c_index=0.9,
            c_index_ci95=(0.5, 0.6),
            td_auc=[],
            mean_auc=0.7,
            brier=[],
            ibs_by_horizon={},
            correlation=CorrelationResult(pearson=-0.5, pearson_p=0.1, spearman=-0.4, spearman_p=0.2, n=5),
            quartile_summary=None,
        )
