"""
Synthetic cohorts with a known proportional-hazards truth.

Each patient follows a latent straight line ``z(u) = a + b * u`` in ``latent_dim``
dimensions, observed at fractions ``u`` of the follow-up and lifted to R^p by a fixed
random orthonormal map. The true log-hazard mixes the static level ``a`` and the slope
``b`` according to ``trend_strength``; signatures only see increments, so the slope is
the part they can recover.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import brentq

from sigsurv.common.utils.seeding import SIMULATE_STREAM, substream_rng
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, PatientRecord, ReportEvent, SurvivalOutcome
from sigsurv.pipelines.metrics.discrimination import concordance_index

logger = logging.getLogger(__name__)

GLOBAL_COUNTER = 0
PATIENT_COUNTER = 1


class SynthConfig(BaseModel):
    """
    Generator settings. Every draw is a function of ``seed``.

    Attributes:
        n_patients (int): Cohort size.
        p (int): Ambient embedding dimension.
        latent_dim (int): Dimension of the latent trajectories.
        reports_per_patient (tuple[int, int]): Inclusive range of the number of reports.
        trend_strength (float): Share of the log-hazard carried by the slope, in [0, 1].
        hazard_scale (float): Standard deviation scale of the true log-hazard.
        intercept_scale (float): Spread of the static latent level.
        report_noise (float): Latent noise added to each report.
        ambient_noise (float): Isotropic noise added after the lift to R^p.
        baseline_hazard_rate (float): Baseline event rate per day (Weibull scale for ``weibull``).
        event_distribution (str): ``exponential`` or ``weibull`` event times.
        weibull_shape (float): Shape k of the Weibull baseline, ``H0(t) = rate * t^k``.
        censoring_rate (float): Target fraction of censored patients, in [0, 1).
        seed (int): Master seed.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_patients: int = Field(2000, gt=0)
    p: int = Field(50, gt=0)
    latent_dim: int = Field(4, gt=0)
    reports_per_patient: tuple[int, int] = (3, 12)
    trend_strength: float = Field(0.8, ge=0, le=1)
    hazard_scale: float = Field(2.0, gt=0)
    intercept_scale: float = Field(2.0, gt=0)
    report_noise: float = Field(0.25, ge=0)
    ambient_noise: float = Field(0.05, ge=0)
    baseline_hazard_rate: float = Field(3e-4, gt=0)
    event_distribution: Literal["exponential", "weibull"] = "exponential"
    weibull_shape: float = Field(1.5, gt=0)
    censoring_rate: float = Field(0.3, ge=0, lt=1)
    seed: int = 0

    @field_validator("reports_per_patient")
    @classmethod
    def check_report_range(cls, v: tuple[int, int]) -> tuple[int, int]:
        low, high = v
        if low < 1 or high < low:
            raise ValueError(f"reports_per_patient must satisfy 1 <= min <= max, got {v}")
        return v

    @model_validator(mode="after")
    def check_latent_dim(self) -> "SynthConfig":
        if self.latent_dim > self.p:
            raise ValueError(f"latent_dim={self.latent_dim} cannot exceed p={self.p}")
        return self


@dataclass(frozen=True)
class _LatentPatient:
    intercept: np.ndarray
    slope: np.ndarray
    log_hazard: float
    event_time: float
    censor_draw: float
    n_reports: int
    fractions: np.ndarray
    report_noise: np.ndarray
    ambient_noise: np.ndarray


def _draw_patient(cfg: SynthConfig, index: int, level_dir: np.ndarray, trend_dir: np.ndarray) -> _LatentPatient:
    rng = substream_rng(cfg.seed, SIMULATE_STREAM, PATIENT_COUNTER, index)

    intercept = rng.normal(0.0, cfg.intercept_scale, cfg.latent_dim)
    slope = rng.normal(0.0, 1.0, cfg.latent_dim)
    log_hazard = cfg.hazard_scale * (
        (1.0 - cfg.trend_strength) * float(level_dir @ intercept) / cfg.intercept_scale
        + cfg.trend_strength * float(trend_dir @ slope)
    )

    # inverse cumulative hazard of rate * t^k * exp(eta)
    shape = cfg.weibull_shape if cfg.event_distribution == "weibull" else 1.0
    event_time = (rng.standard_exponential() / (cfg.baseline_hazard_rate * np.exp(log_hazard))) ** (1.0 / shape)

    n_reports = int(rng.integers(cfg.reports_per_patient[0], cfg.reports_per_patient[1] + 1))
    fractions = np.concatenate([[0.0], np.sort(rng.uniform(0.0, 1.0, n_reports - 1))])

    return _LatentPatient(
        intercept=intercept,
        slope=slope,
        log_hazard=log_hazard,
        event_time=float(event_time),
        censor_draw=float(rng.standard_exponential()),
        n_reports=n_reports,
        fractions=fractions,
        report_noise=rng.normal(0.0, cfg.report_noise, (n_reports, cfg.latent_dim)),
        ambient_noise=rng.normal(0.0, cfg.ambient_noise, (n_reports, cfg.p)),
    )


def calibrate_censoring_hazard(event_times: np.ndarray, target: float) -> float:
    """
    Rate ``c`` of exponential censoring whose expected censored fraction over the given event
    times, ``mean(1 - exp(-c * E_i))``, equals ``target``. Returns 0 for a zero target.
    """
    if target <= 0:
        return 0.0

    def excess(c: float) -> float:
        return float(np.mean(-np.expm1(-c * event_times))) - target

    upper = 1.0 / float(np.mean(event_times))
    while excess(upper) < 0:
        upper *= 2.0
    return float(brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-12))


def generate_cohort(cfg: SynthConfig) -> tuple[Cohort, np.ndarray]:
    """
    Draw a synthetic vector-mode cohort and its true log-hazards.

    Every patient's draws come from its own counter-based substream of the master seed, so
    the result does not depend on generation order.

    Returns:
        tuple[Cohort, np.ndarray]: The cohort (reports at ``t = u * T`` days) and the true
        log-hazard of each patient in cohort order.
    """
    global_rng = substream_rng(cfg.seed, SIMULATE_STREAM, GLOBAL_COUNTER)
    lift, _ = np.linalg.qr(global_rng.normal(size=(cfg.p, cfg.latent_dim)))
    level_dir = global_rng.normal(size=cfg.latent_dim)
    level_dir /= np.linalg.norm(level_dir)
    trend_dir = global_rng.normal(size=cfg.latent_dim)
    trend_dir /= np.linalg.norm(trend_dir)

    latent = [_draw_patient(cfg, i, level_dir, trend_dir) for i in range(cfg.n_patients)]
    event_times = np.array([lp.event_time for lp in latent])
    censor_rate = calibrate_censoring_hazard(event_times, cfg.censoring_rate)

    patients: list[PatientRecord] = []
    for i, lp in enumerate(latent):
        censor_time = lp.censor_draw / censor_rate if censor_rate > 0 else np.inf
        duration = min(lp.event_time, censor_time)
        event = int(lp.event_time <= censor_time)

        trajectory = lp.intercept + np.outer(lp.fractions, lp.slope) + lp.report_noise
        embeddings = trajectory @ lift.T + lp.ambient_noise
        patient_id = f"P{i:05d}"
        times = lp.fractions * duration
        reports = tuple(
            ReportEvent(patient_id=patient_id, t=float(t), embedding=e) for t, e in zip(times, embeddings, strict=True)
        )
        outcome = SurvivalOutcome(patient_id=patient_id, duration=duration, event=event)
        patients.append(PatientRecord(outcome=outcome, reports=reports))

    cohort = Cohort(patients=tuple(patients), embedding_dim=cfg.p, mode=InputMode.VECTOR)
    truth = np.array([lp.log_hazard for lp in latent])
    logger.info(
        f"Simulated {len(cohort)} patients, {cohort.n_reports} reports, p={cfg.p}: "
        f"censored fraction={1 - cohort.events.mean():.3f} (target {cfg.censoring_rate}), "
        f"trend_strength={cfg.trend_strength}"
    )
    return cohort, truth


def oracle_cindex(ground_truth: np.ndarray, T: np.ndarray, delta: np.ndarray) -> float:
    """C-index of the true log-hazards, the ceiling a fitted model can approach."""
    return concordance_index(T, delta, ground_truth)
