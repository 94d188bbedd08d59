import logging
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from sigsurv.common.exceptions import MetricError
from sigsurv.pipelines.ingest.schemas import Cohort
from sigsurv.pipelines.metrics.discrimination import concordance_index
from sigsurv.pipelines.metrics.nonparametric import check_survival_arrays

logger = logging.getLogger(__name__)

N_QUARTILES = 4


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    pearson_p: float
    spearman: float
    spearman_p: float
    n: int

    def to_dict(self) -> dict[str, float | int]:
        return asdict(self)


def risk_time_correlation(T: np.ndarray, delta: np.ndarray, eta: np.ndarray) -> CorrelationResult:
    """
    Pearson and Spearman correlations between ``log T`` and risk scores, over patients with
    an observed event. Spearman uses average ranks on ties.

    Raises:
        MetricError: With fewer than 3 events or constant scores or durations.
    """
    T, delta, eta = check_survival_arrays(T, delta, eta)
    events = delta == 1
    if events.sum() < 3:
        raise MetricError(f"correlation needs at least 3 uncensored patients, got {int(events.sum())}")

    log_t, risk = np.log(T[events]), eta[events]
    if np.ptp(log_t) == 0 or np.ptp(risk) == 0:
        raise MetricError("correlation is undefined for constant durations or risk scores")

    pearson = stats.pearsonr(log_t, risk)
    spearman = stats.spearmanr(log_t, risk)
    return CorrelationResult(
        pearson=float(pearson[0]),
        pearson_p=float(pearson[1]),
        spearman=float(spearman[0]),
        spearman_p=float(spearman[1]),
        n=int(events.sum()),
    )


@dataclass(frozen=True)
class QuartileStats:
    quartile: int
    n: int
    n_events: int
    median_log_t: float
    q25_log_t: float
    q75_log_t: float


@dataclass(frozen=True)
class QuartileSummary:
    """
    Distribution of log durations per predicted-risk quartile (quartile 1 = lowest risk),
    with Kruskal–Wallis and one-way ANOVA tests across quartiles.
    """

    quartiles: tuple[QuartileStats, ...]
    kruskal_h: float
    kruskal_p: float
    anova_f: float
    anova_p: float

    def to_dict(self) -> dict[str, object]:
        return {
            "quartiles": [asdict(q) for q in self.quartiles],
            "kruskal_h": self.kruskal_h,
            "kruskal_p": self.kruskal_p,
            "anova_f": self.anova_f,
            "anova_p": self.anova_p,
        }


def assign_quartiles(eta: np.ndarray) -> np.ndarray:
    """
    Quartile index 0..3 of each score, ``floor(4 * rank / n)`` with ranks from a stable sort,
    so tied scores are split in input order.
    """
    eta = np.asarray(eta, dtype=float)
    ranks = np.empty(eta.shape[0], dtype=int)
    ranks[np.argsort(eta, kind="stable")] = np.arange(eta.shape[0])
    return (N_QUARTILES * ranks) // eta.shape[0]


def risk_quartile_summary(T: np.ndarray, delta: np.ndarray, eta: np.ndarray) -> QuartileSummary:
    """
    Median and interquartile range of ``log T`` within each risk quartile, over all patients,
    plus the Kruskal–Wallis H and ANOVA F statistics of ``log T`` across quartiles.

    Raises:
        MetricError: With fewer than 4 patients.
    """
    T, delta, eta = check_survival_arrays(T, delta, eta)
    if T.shape[0] < N_QUARTILES:
        raise MetricError(f"quartile summary needs at least {N_QUARTILES} patients, got {T.shape[0]}")

    quartile = assign_quartiles(eta)
    log_t = np.log(T)
    groups = [log_t[quartile == q] for q in range(N_QUARTILES)]

    rows = []
    for q, group in enumerate(groups):
        q25, median, q75 = np.percentile(group, [25, 50, 75])
        rows.append(QuartileStats(
            quartile=q + 1,
            n=int(group.shape[0]),
            n_events=int(delta[quartile == q].sum()),
            median_log_t=float(median),
            q25_log_t=float(q25),
            q75_log_t=float(q75),
        ))

    try:
        kruskal = stats.kruskal(*groups)
        kruskal_h, kruskal_p = float(kruskal[0]), float(kruskal[1])
    except ValueError:
        logger.warning("Kruskal-Wallis test undefined (all log durations identical)")
        kruskal_h, kruskal_p = float("nan"), float("nan")
    anova = stats.f_oneway(*groups)

    return QuartileSummary(
        quartiles=tuple(rows),
        kruskal_h=kruskal_h,
        kruskal_p=kruskal_p,
        anova_f=float(anova[0]),
        anova_p=float(anova[1]),
    )


def truncate_reports(cohort: Cohort, k: int) -> Cohort:
    """Keep each patient's first ``min(k, N_i)`` reports."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    return cohort.with_patients(p if len(p.reports) <= k else p.with_reports(p.reports[:k]) for p in cohort)


def cindex_vs_report_count(
    cohort: Cohort,
    score_cohort: Callable[[Cohort], np.ndarray],
    k_values: Iterable[int],
) -> list[tuple[int, float]]:
    """
    C-index of a fitted pipeline when only the first k reports of each patient are known.

    Args:
        cohort (Cohort): Test cohort, before feature extraction.
        score_cohort (Callable[[Cohort], np.ndarray]): Maps a cohort to one risk score per
            patient with every fitted stage frozen.
        k_values (Iterable[int]): Report counts to evaluate.

    Returns:
        list[tuple[int, float]]: ``(k, C-index)`` in increasing k.
    """
    curve = []
    for k in sorted(set(k_values)):
        eta = score_cohort(truncate_reports(cohort, k))
        curve.append((k, concordance_index(cohort.durations, cohort.events, eta)))
        logger.info(f"C-index with the first {k} reports: {curve[-1][1]:.4f}")
    return curve
