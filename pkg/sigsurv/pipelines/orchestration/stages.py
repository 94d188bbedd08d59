"""
File-based pipeline stages.

Each stage reads only the artifacts of earlier stages from the run directory and writes its
own, so any stage can be rerun on its own and reproduces its outputs bit for bit.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.common.config.run_config import RunConfig
from sigsurv.common.exceptions import ConfigError, SigSurvError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.compression.extract import read_compression_map
from sigsurv.pipelines.compression.load import write_compression_map
from sigsurv.pipelines.compression.transform import project_cohort
from sigsurv.pipelines.coxmodel.extract import read_cox_model
from sigsurv.pipelines.coxmodel.lasso import CoxFitConfig
from sigsurv.pipelines.coxmodel.load import write_cox_model
from sigsurv.pipelines.coxmodel.model import (
    CoxModel,
    fit_cox_lasso,
    predict_survival,
    predict_survival_curve,
    risk_score,
)
from sigsurv.pipelines.embedding.extract import load_frequencies, load_word_embeddings
from sigsurv.pipelines.embedding.sif import embed_cohort
from sigsurv.pipelines.ingest.extract import load_cohort
from sigsurv.pipelines.ingest.load import write_embeddings, write_outcomes
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode
from sigsurv.pipelines.ingest.transform import apply_split, mask_tail, split_assignment, split_cohort
from sigsurv.pipelines.metrics.association import cindex_vs_report_count
from sigsurv.pipelines.metrics.nonparametric import censoring_survival
from sigsurv.pipelines.metrics.report import EvaluationReport, evaluate_predictions
from sigsurv.pipelines.orchestration.features import FeatureKind, build_features, cohort_features, fit_compression
from sigsurv.pipelines.orchestration.grid_search import FoldFeatures, grid_search_lambda
from sigsurv.pipelines.orchestration.manifest import RunManifest
from sigsurv.pipelines.signature.features import FeatureMatrix
from sigsurv.pipelines.signature.load import read_feature_matrix, write_feature_matrix

logger = logging.getLogger(__name__)

MASKED_EMBEDDINGS = "cohort/embeddings.csv"
MASKED_OUTCOMES = "cohort/outcomes.csv"
EMBEDDED_EMBEDDINGS = "embedded/embeddings.csv"
SPLIT_KEY = "split.json"
COMPRESSION_KEY = "compression.json"
FEATURES_KEY = "features.csv"
CV_TABLE_KEY = "cv_table.csv"
MODEL_KEY = "cox_model.json"
EVALUATION_KEY = "evaluation.json"
EVALUATION_TABLE_KEY = "evaluation.txt"
FOLD_METRICS_KEY = "fold_metrics.csv"
FOLD_SUMMARY_KEY = "fold_summary.csv"
REPORT_COUNT_KEY = "curves/cindex_vs_report_count.csv"
PREDICTIONS_KEY = "predictions.csv"


@dataclass
class RunContext:
    """Configuration, run directory and manifest shared by the stages of one run."""

    cfg: RunConfig
    store: ArtifactStore
    manifest: RunManifest
    feature_kind: FeatureKind = "signature"

    @classmethod
    def open(cls, cfg: RunConfig, feature_kind: FeatureKind = "signature", *, resume: bool = True) -> "RunContext":
        store = ArtifactStore(cfg.out_dir)
        if resume:
            manifest = RunManifest.resume(store, cfg, feature_kind)
        else:
            manifest = RunManifest(store, cfg, feature_kind)
        return cls(cfg=cfg, store=store, manifest=manifest, feature_kind=feature_kind)

    def save_table(self, df: pd.DataFrame, key: str, stage: str) -> None:
        self.store.save_df_as_table(df, key)
        self.manifest.record_artifact(key, stage)


def _require(path: Path | None, name: str) -> Path:
    if path is None:
        raise ConfigError(f"'{name}' must be set in the run configuration")
    return path


def _vector_cohort_key(cfg: RunConfig) -> str:
    return EMBEDDED_EMBEDDINGS if cfg.input_mode == InputMode.TOKEN else MASKED_EMBEDDINGS


def read_split(ctx: RunContext, cohort: Cohort) -> tuple[Cohort, list[Cohort]]:
    document = ctx.store.load_json(SPLIT_KEY)
    return apply_split(cohort, document["assignment"])


def read_vector_cohort(ctx: RunContext) -> Cohort:
    """Masked cohort with one embedding per report, as the embed stage left it."""
    return load_cohort(ctx.store.path(_vector_cohort_key(ctx.cfg)), ctx.store.path(MASKED_OUTCOMES), InputMode.VECTOR)


def ingest(ctx: RunContext) -> None:
    """Load the input cohort, mask the last days of follow-up, and draw the train/test split."""
    cfg = ctx.cfg
    with ctx.manifest.stage("ingest"):
        embeddings_path = _require(cfg.embeddings_path, "embeddings_path")
        outcomes_path = _require(cfg.outcomes_path, "outcomes_path")
        ctx.manifest.record_input("embeddings", embeddings_path)
        ctx.manifest.record_input("outcomes", outcomes_path)

        cohort = load_cohort(embeddings_path, outcomes_path, cfg.input_mode)
        masked = mask_tail(cohort, cfg.mask_horizon_days)
        train, folds = split_cohort(masked.cohort, cfg.test_fraction, cfg.n_test_folds, cfg.seed)

        write_embeddings(masked.cohort, ctx.store.path(MASKED_EMBEDDINGS))
        write_outcomes(masked.cohort, ctx.store.path(MASKED_OUTCOMES))
        ctx.store.save_dict_as_json(
            {"assignment": split_assignment(train, folds), "excluded_by_mask": list(masked.excluded)}, SPLIT_KEY
        )
        for key in (MASKED_EMBEDDINGS, MASKED_OUTCOMES, SPLIT_KEY):
            ctx.manifest.record_artifact(key, "ingest")


def embed(ctx: RunContext) -> None:
    """Turn token-mode reports into SIF sentence embeddings; vector inputs skip this stage."""
    cfg = ctx.cfg
    with ctx.manifest.stage("embed"):
        if cfg.input_mode != InputMode.TOKEN:
            logger.info("Input is in vector mode; nothing to embed")
            ctx.manifest.mark_skipped("embed")
            return

        table_path = _require(cfg.word_embeddings_path, "word_embeddings_path")
        freqs_path = _require(cfg.frequencies_path, "frequencies_path")
        ctx.manifest.record_input("word_embeddings", table_path)
        ctx.manifest.record_input("frequencies", freqs_path)

        cohort = load_cohort(ctx.store.path(MASKED_EMBEDDINGS), ctx.store.path(MASKED_OUTCOMES), InputMode.TOKEN)
        embedded = embed_cohort(cohort, load_word_embeddings(table_path), load_frequencies(freqs_path), cfg.sif)
        write_embeddings(embedded, ctx.store.path(EMBEDDED_EMBEDDINGS))
        ctx.manifest.record_artifact(EMBEDDED_EMBEDDINGS, "embed")


def compress(ctx: RunContext) -> None:
    """Fit the PCA map on the training patients' reports only."""
    with ctx.manifest.stage("compress"):
        train, _ = read_split(ctx, read_vector_cohort(ctx))
        compression_map = fit_compression(train, ctx.cfg)
        ctx.manifest.record_lineage("fit_pca", train.patient_ids)
        write_compression_map(compression_map, ctx.store, COMPRESSION_KEY)
        ctx.manifest.record_artifact(COMPRESSION_KEY, "compress")


def signify(ctx: RunContext) -> None:
    """Project every patient with the frozen map and extract the configured features."""
    with ctx.manifest.stage("signify"):
        compression_map = read_compression_map(ctx.store.path(COMPRESSION_KEY))
        matrix = cohort_features(read_vector_cohort(ctx), compression_map, ctx.feature_kind, ctx.cfg)
        write_feature_matrix(matrix, ctx.store, FEATURES_KEY)
        ctx.manifest.record_artifact(FEATURES_KEY, "signify")


def _per_fold_features(ctx: RunContext, train: Cohort) -> FoldFeatures:
    """Feature builder for grid search that refits the PCA map inside every CV fold."""
    ids = train.patient_ids

    def build(train_idx: np.ndarray, val_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fold_train = train.subset([ids[i] for i in train_idx])
        fold_val = train.subset([ids[i] for i in val_idx])
        compression_map = fit_compression(fold_train, ctx.cfg)
        return (
            cohort_features(fold_train, compression_map, ctx.feature_kind, ctx.cfg).values,
            cohort_features(fold_val, compression_map, ctx.feature_kind, ctx.cfg).values,
        )

    return build


def fit(ctx: RunContext) -> CoxModel:
    """Choose lambda by cross-validation on the training split, then refit on all of it."""
    cfg = ctx.cfg
    with ctx.manifest.stage("fit"):
        cohort = read_vector_cohort(ctx)
        train, _ = read_split(ctx, cohort)
        features = read_feature_matrix(ctx.store.path(FEATURES_KEY)).rows_for(train.patient_ids)

        fold_features = _per_fold_features(ctx, train) if cfg.refit_pca_per_fold else None
        search = grid_search_lambda(
            features.values,
            train.durations,
            train.events,
            cfg.lambda_grid.values(),
            cfg.cv_folds,
            cfg.seed,
            cfg.cox,
            fold_features=fold_features,
            n_jobs=cfg.n_jobs,
        )
        ctx.manifest.record_lineage("grid_search_lambda", train.patient_ids)
        ctx.save_table(search.table, CV_TABLE_KEY, "fit")

        fit_cfg = CoxFitConfig(lam=search.best_lambda, **cfg.cox.model_dump())
        model = fit_cox_lasso(features.values, train.durations, train.events, fit_cfg, feature_names=features.columns)
        ctx.manifest.record_lineage("fit_cox_lasso", train.patient_ids)
        write_cox_model(model, ctx.store, MODEL_KEY)
        ctx.manifest.record_artifact(MODEL_KEY, "fit")
    return model


class ModelSurvival:
    """``t -> S(t | x)`` for a fixed set of feature rows."""

    def __init__(self, model: CoxModel, features: np.ndarray):
        self.model = model
        self.features = features

    def __call__(self, t: float) -> np.ndarray:
        return predict_survival(self.model, self.features, t)


def _evaluate(
    cfg: RunConfig, cohort: Cohort, features: FeatureMatrix, model: CoxModel, censoring: StepFunction
) -> EvaluationReport:
    X = features.rows_for(cohort.patient_ids).values
    return evaluate_predictions(
        cohort.durations,
        cohort.events,
        risk_score(model, X),
        ModelSurvival(model, X),
        tau1=cfg.tau1,
        tau2=cfg.tau2,
        ibs_horizons=cfg.ibs_horizons,
        censoring_curve=censoring,
        auc_weighting=cfg.auc_weighting,
        mean_auc_weights=cfg.mean_auc_weights,
    )


def _fold_row(
    cfg: RunConfig, k: int, fold: Cohort, features: FeatureMatrix, model: CoxModel, censoring: StepFunction
) -> dict[str, float]:
    try:
        metrics = _evaluate(cfg, fold, features, model, censoring).summary_metrics()
    except SigSurvError as err:
        logger.warning(f"Test fold {k} not evaluable: {err}")
        metrics = {"c_index": float("nan")}
    return {"fold": k, "n_patients": len(fold), "n_events": int(fold.events.sum()), **metrics}


def fold_summary(fold_metrics: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation of every metric across the test folds."""
    metrics = fold_metrics.drop(columns=["fold", "n_patients", "n_events"])
    return pd.DataFrame({"metric": metrics.columns, "mean": metrics.mean().values, "sd": metrics.std(ddof=1).values})


def evaluate(ctx: RunContext) -> EvaluationReport:
    """
    Score the held-out patients: the pooled report over every test fold, per-fold metrics
    with their mean and standard deviation, and the C-index against the number of known reports.

    The censoring curve used for IPCW weights is estimated on the training split.
    """
    cfg = ctx.cfg
    with ctx.manifest.stage("evaluate"):
        cohort = read_vector_cohort(ctx)
        train, folds = read_split(ctx, cohort)
        test_ids = [pid for fold in folds for pid in fold.patient_ids]
        ctx.manifest.check_leakage(train.patient_ids, test_ids)

        features = read_feature_matrix(ctx.store.path(FEATURES_KEY))
        model = read_cox_model(ctx.store.path(MODEL_KEY))
        compression_map = read_compression_map(ctx.store.path(COMPRESSION_KEY))
        censoring = censoring_survival(train.durations, train.events)

        test = cohort.subset(test_ids)
        pooled = _evaluate(cfg, test, features, model, censoring)

        rows = Parallel(n_jobs=cfg.n_jobs)(
            delayed(_fold_row)(cfg, k, fold, features, model, censoring) for k, fold in enumerate(folds)
        )
        fold_metrics = pd.DataFrame(rows)
        summary = fold_summary(fold_metrics)
        ctx.save_table(fold_metrics, FOLD_METRICS_KEY, "evaluate")
        ctx.save_table(summary, FOLD_SUMMARY_KEY, "evaluate")

        def score(truncated: Cohort) -> np.ndarray:
            projected = project_cohort(compression_map, truncated)
            return risk_score(model, build_features(projected, ctx.feature_kind, cfg).values)

        max_reports = max(len(p.reports) for p in test)
        curve = cindex_vs_report_count(test, score, [*cfg.report_counts, max_reports])
        ctx.save_table(pd.DataFrame(curve, columns=["k", "c_index"]), REPORT_COUNT_KEY, "evaluate")

        report = replace(
            pooled,
            extra={
                "feature_kind": ctx.feature_kind,
                "config_hash": ctx.manifest.config_hash,
                "best_lambda": model.lam,
                "n_nonzero": model.n_nonzero,
                "fold_summary": {
                    row.metric: {"mean": row.mean, "sd": row.sd} for row in summary.itertuples(index=False)
                },
                "cindex_vs_report_count": [[k, c] for k, c in curve],
            },
        )
        for name, df in report.curves().items():
            ctx.save_table(df, f"curves/{name}.csv", "evaluate")

        ctx.store.save_dict_as_json(report.to_dict(), EVALUATION_KEY)
        ctx.manifest.record_artifact(EVALUATION_KEY, "evaluate")
        table = report.to_table() + "\nPer-fold mean (sd)\n" + summary.to_string(index=False) + "\n"
        ctx.store.save_text(table, EVALUATION_TABLE_KEY)
        ctx.manifest.record_artifact(EVALUATION_TABLE_KEY, "evaluate")
    return report


def predict(ctx: RunContext, horizons: tuple[float, ...] = ()) -> pd.DataFrame:
    """
    Risk scores of every patient in the run, with their split label and optional survival
    probabilities at ``horizons``. Written to ``predictions.csv``; not tracked as a stage.
    """
    features = read_feature_matrix(ctx.store.path(FEATURES_KEY))
    model = read_cox_model(ctx.store.path(MODEL_KEY))
    assignment = ctx.store.load_json(SPLIT_KEY)["assignment"]

    df = pd.DataFrame({
        "patient_id": list(features.patient_ids),
        "split": [str(assignment.get(pid, "")) for pid in features.patient_ids],
        "risk_score": risk_score(model, features.values),
    })
    if horizons:
        survival = predict_survival_curve(model, features.values, horizons)
        for j, horizon in enumerate(horizons):
            df[f"survival_{horizon:g}"] = survival[:, j]

    ctx.store.save_df_as_table(df, PREDICTIONS_KEY)
    logger.info(f"Predicted {len(df)} patients")
    return df
