from sigsurv.pipelines.metrics.association import (
    CorrelationResult,
    QuartileSummary,
    cindex_vs_report_count,
    risk_quartile_summary,
    risk_time_correlation,
    truncate_reports,
)
from sigsurv.pipelines.metrics.calibration import brier_curve, brier_score, integrated_brier
from sigsurv.pipelines.metrics.discrimination import concordance_index, jackknife_ci, mean_auc, td_auc
from sigsurv.pipelines.metrics.nonparametric import censoring_survival, kaplan_meier
from sigsurv.pipelines.metrics.report import EvaluationReport, evaluate_predictions

__all__ = [
    "CorrelationResult",
    "EvaluationReport",
    "QuartileSummary",
    "brier_curve",
    "brier_score",
    "censoring_survival",
    "cindex_vs_report_count",
    "concordance_index",
    "evaluate_predictions",
    "integrated_brier",
    "jackknife_ci",
    "kaplan_meier",
    "mean_auc",
    "risk_quartile_summary",
    "risk_time_correlation",
    "td_auc",
    "truncate_reports",
]
