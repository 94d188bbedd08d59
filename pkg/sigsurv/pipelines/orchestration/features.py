import logging
from typing import Literal

import numpy as np

from sigsurv.common.config.run_config import RunConfig
from sigsurv.pipelines.compression.transform import CompressionMap, fit_pca, project_cohort
from sigsurv.pipelines.ingest.schemas import Cohort
from sigsurv.pipelines.signature.features import FeatureMatrix, signature_features

logger = logging.getLogger(__name__)

FeatureKind = Literal["signature", "last", "mean"]
FEATURE_KINDS: tuple[FeatureKind, ...] = ("signature", "last", "mean")


def baseline_features(cohort: Cohort, kind: FeatureKind) -> FeatureMatrix:
    """
    Static features with exactly ``embedding_dim`` columns: the last retained report's
    coordinates (``last``) or the per-patient mean (``mean``).
    """
    if kind == "last":
        rows = [patient.reports[-1].embedding for patient in cohort]
    elif kind == "mean":
        rows = [patient.embedding_matrix().mean(axis=0) for patient in cohort]
    else:
        raise ValueError(f"unknown baseline kind '{kind}'")
    values = np.vstack(rows) if rows else np.empty((0, cohort.embedding_dim))
    return FeatureMatrix(
        patient_ids=tuple(cohort.patient_ids),
        columns=tuple(f"pc_{k + 1}" for k in range(cohort.embedding_dim)),
        values=values,
    )


def build_features(projected: Cohort, kind: FeatureKind, cfg: RunConfig) -> FeatureMatrix:
    """Feature matrix of a projected cohort for the configured feature kind."""
    if kind == "signature":
        return signature_features(
            projected,
            level=cfg.signature_level,
            time_scale=cfg.time_scale,
            drop_time_words=cfg.drop_time_words,
            single_report_epsilon=cfg.single_report_epsilon,
            n_jobs=cfg.n_jobs,
        )
    return baseline_features(projected, kind)


def fit_compression(train: Cohort, cfg: RunConfig) -> CompressionMap:
    return fit_pca(train.all_embeddings(), cfg.p_bar, whiten=cfg.whiten)


def cohort_features(
    cohort: Cohort, compression_map: CompressionMap, kind: FeatureKind, cfg: RunConfig
) -> FeatureMatrix:
    """Project with a frozen map, then extract features."""
    return build_features(project_cohort(compression_map, cohort), kind, cfg)
