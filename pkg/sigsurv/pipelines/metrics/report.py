import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
import pandas as pd

from sigsurv.common.exceptions import MetricError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.metrics.association import (
    CorrelationResult,
    QuartileSummary,
    risk_quartile_summary,
    risk_time_correlation,
)
from sigsurv.pipelines.metrics.calibration import SurvivalFn, brier_curve, integrated_brier
from sigsurv.pipelines.metrics.discrimination import (
    concordance_index,
    evaluation_grid,
    jackknife_ci,
    mean_auc,
    td_auc,
)
from sigsurv.pipelines.metrics.nonparametric import censoring_survival, kaplan_meier

logger = logging.getLogger(__name__)

AucWeighting = Literal["none", "ipcw"]
MeanAucWeights = Literal["survival", "censoring"]


@dataclass(frozen=True)
class EvaluationReport:
    """Discrimination, calibration and association metrics of one set of predictions."""

    n_patients: int
    n_events: int
    c_index: float
    c_index_ci95: tuple[float, float]
    td_auc: list[tuple[float, float]]
    mean_auc: float
    brier: list[tuple[float, float]]
    ibs_by_horizon: dict[float, float]
    correlation: CorrelationResult | None
    quartile_summary: QuartileSummary | None
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        lo, hi = self.c_index_ci95
        if not lo <= self.c_index <= hi:
            raise MetricError(f"CI [{lo}, {hi}] does not contain the C-index {self.c_index}")
        if any(not 0 <= auc <= 1 for _, auc in self.td_auc):
            raise MetricError("td-AUC values must lie in [0, 1]")
        if any(v < 0 for v in self.ibs_by_horizon.values()):
            raise MetricError("IBS values must be non-negative")

    def summary_metrics(self) -> dict[str, float]:
        """Scalar metrics, used for per-fold tables."""
        metrics = {"c_index": self.c_index, "mean_auc": self.mean_auc}
        for horizon, ibs in self.ibs_by_horizon.items():
            metrics[f"ibs_{horizon:g}"] = ibs
        metrics["pearson"] = self.correlation.pearson if self.correlation else float("nan")
        metrics["spearman"] = self.correlation.spearman if self.correlation else float("nan")
        return metrics

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_patients": self.n_patients,
            "n_events": self.n_events,
            "c_index": self.c_index,
            "c_index_ci95": list(self.c_index_ci95),
            "mean_auc": self.mean_auc,
            "ibs_by_horizon": {f"{h:g}": v for h, v in self.ibs_by_horizon.items()},
            "correlation": self.correlation.to_dict() if self.correlation else None,
            "quartile_summary": self.quartile_summary.to_dict() if self.quartile_summary else None,
            "td_auc": [[t, v] for t, v in self.td_auc],
            "brier": [[t, v] for t, v in self.brier],
            **self.extra,
        }

    def to_table(self) -> str:
        """Aligned human-readable table of the scalar metrics and quartile rows."""
        lo, hi = self.c_index_ci95
        rows = [
            ("patients", f"{self.n_patients}"),
            ("events", f"{self.n_events}"),
            ("C-index", f"{self.c_index:.4f}"),
            ("C-index 95% CI", f"[{lo:.4f}, {hi:.4f}]"),
            ("mean td-AUC", f"{self.mean_auc:.4f}"),
        ]
        rows += [(f"IBS ({h:g} days)", f"{v:.4f}") for h, v in self.ibs_by_horizon.items()]
        if self.correlation:
            rows.append(("Pearson(log T, risk)",
                         f"{self.correlation.pearson:.4f} (p={self.correlation.pearson_p:.2e})"))
            rows.append(("Spearman(log T, risk)",
                         f"{self.correlation.spearman:.4f} (p={self.correlation.spearman_p:.2e})"))
        text = pd.DataFrame(rows, columns=["metric", "value"]).to_string(index=False)

        if self.quartile_summary:
            quartiles = pd.DataFrame([vars(q) for q in self.quartile_summary.quartiles])
            text += "\n\n" + quartiles.to_string(index=False, float_format=lambda x: f"{x:.4f}")
            text += (f"\nKruskal-Wallis H={self.quartile_summary.kruskal_h:.3f} "
                     f"(p={self.quartile_summary.kruskal_p:.2e}), "
                     f"ANOVA F={self.quartile_summary.anova_f:.3f} (p={self.quartile_summary.anova_p:.2e})")
        return text + "\n"

    def curves(self) -> dict[str, pd.DataFrame]:
        curves = {
            "td_auc": pd.DataFrame(self.td_auc, columns=["t", "auc"]),
            "brier": pd.DataFrame(self.brier, columns=["t", "brier"]),
        }
        if self.quartile_summary:
            curves["quartiles"] = pd.DataFrame([vars(q) for q in self.quartile_summary.quartiles])
        return curves


def _optional(metric: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except MetricError as err:
        logger.warning(f"{metric} not evaluable: {err}")
        return None


def _optional_quiet(fn, *args):
    try:
        return fn(*args)
    except MetricError:
        return None


def evaluate_predictions(
    T: np.ndarray,
    delta: np.ndarray,
    eta: np.ndarray,
    surv_fn: SurvivalFn,
    *,
    tau1: float,
    tau2: float,
    ibs_horizons: Sequence[float],
    censoring_curve: StepFunction | None = None,
    auc_weighting: AucWeighting = "none",
    mean_auc_weights: MeanAucWeights = "survival",
    alpha: float = 0.05,
) -> EvaluationReport:
    """
    Build the full evaluation report of risk scores and survival predictions.

    Args:
        T (np.ndarray): Test durations.
        delta (np.ndarray): Test event indicators.
        eta (np.ndarray): Risk scores.
        surv_fn (SurvivalFn): ``surv_fn(t)`` gives every test patient's survival at ``t``.
        tau1 (float): Start of the evaluation window.
        tau2 (float): End of the evaluation window.
        ibs_horizons (Sequence[float]): Upper ends of the IBS windows ``[tau1, h]``.
        censoring_curve (StepFunction | None): Censoring survival G for IPCW weights; when
            omitted it is estimated on the test data.
        auc_weighting (str): ``none`` for the plain case/control ratio, ``ipcw`` to weight cases.
        mean_auc_weights (str): Integrate the AUC against the event (``survival``) or the
            censoring Kaplan–Meier curve.
        alpha (float): Miscoverage of the C-index interval.

    Raises:
        MetricError: If the C-index or mean AUC is not evaluable.
    """
    T = np.asarray(T, dtype=float)
    delta = np.asarray(delta).astype(int)
    eta = np.asarray(eta, dtype=float)
    G_hat = censoring_curve if censoring_curve is not None else censoring_survival(T, delta)
    auc_G = G_hat if auc_weighting == "ipcw" else None

    c_index = concordance_index(T, delta, eta)
    ci = _optional("C-index CI", jackknife_ci, T, delta, eta, alpha) or (c_index, c_index)

    grid = evaluation_grid(T, delta, tau1, tau2)
    auc_curve = []
    for t in grid:
        value = _optional_quiet(td_auc, T, delta, eta, float(t), auc_G)
        if value is not None:
            auc_curve.append((float(t), value))

    weight_curve = kaplan_meier(T, delta) if mean_auc_weights == "survival" else kaplan_meier(T, 1 - delta)
    mean = mean_auc(T, delta, eta, tau1, tau2, weight_curve=weight_curve, G_hat=auc_G)

    brier = brier_curve(T, delta, surv_fn, grid, G_hat)
    ibs = {}
    for horizon in ibs_horizons:
        value = _optional(f"IBS up to {horizon}", integrated_brier, T, delta, surv_fn, tau1, horizon, None, G_hat)
        if value is not None:
            ibs[float(horizon)] = value

    report = EvaluationReport(
        n_patients=int(T.shape[0]),
        n_events=int(delta.sum()),
        c_index=c_index,
        c_index_ci95=(min(ci[0], c_index), max(ci[1], c_index)),
        td_auc=auc_curve,
        mean_auc=mean,
        brier=brier,
        ibs_by_horizon=ibs,
        correlation=_optional("risk-time correlation", risk_time_correlation, T, delta, eta),
        quartile_summary=_optional("quartile summary", risk_quartile_summary, T, delta, eta),
    )
    logger.info(f"Evaluated {report.n_patients} patients: C-index={c_index:.4f} "
                f"[{report.c_index_ci95[0]:.4f}, {report.c_index_ci95[1]:.4f}], mean AUC={mean:.4f}")
    return report
