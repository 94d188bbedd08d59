import logging

from sigsurv.common.config.run_config import RunConfig
from sigsurv.pipelines.metrics.report import EvaluationReport
from sigsurv.pipelines.orchestration import stages
from sigsurv.pipelines.orchestration.features import FeatureKind

logger = logging.getLogger(__name__)

BASELINE_DIR_PREFIX = "baseline_"


def run_pipeline(cfg: RunConfig, feature_kind: FeatureKind = "signature") -> EvaluationReport:
    """
    Run every stage in order: ingest, embed, compress, signify, fit, evaluate.

    Args:
        cfg (RunConfig): Run configuration; artifacts go to ``cfg.out_dir``.
        feature_kind (str): ``signature`` for the full pipeline, ``last`` or ``mean`` for the
            static baselines sharing the same Cox-LASSO stack.

    Returns:
        EvaluationReport: Pooled test-set report; per-fold means and standard deviations are
        under ``extra["fold_summary"]``.

    Raises:
        StageError: Tagged with the name of the stage that failed.
    """
    logger.info(f"Starting {feature_kind} run in {cfg.out_dir} (config {cfg.config_hash()[:12]}, seed {cfg.seed})")
    ctx = stages.RunContext.open(cfg, feature_kind, resume=False)

    stages.ingest(ctx)
    stages.embed(ctx)
    stages.compress(ctx)
    stages.signify(ctx)
    stages.fit(ctx)
    report = stages.evaluate(ctx)

    logger.info(f"Run finished: test C-index={report.c_index:.4f}, manifest {ctx.manifest.digest()[:12]}")
    return report


def run_baseline(cfg: RunConfig, kind: FeatureKind) -> EvaluationReport:
    """Same stack with static features, written under ``<out_dir>/baseline_<kind>``."""
    if kind == "signature":
        raise ValueError("baseline kind must be 'last' or 'mean'")
    baseline_cfg = cfg.model_copy(update={"out_dir": cfg.out_dir / f"{BASELINE_DIR_PREFIX}{kind}"})
    return run_pipeline(baseline_cfg, kind)


def baseline_last_report(cfg: RunConfig) -> EvaluationReport:
    return run_baseline(cfg, "last")


def baseline_mean_embedding(cfg: RunConfig) -> EvaluationReport:
    return run_baseline(cfg, "mean")
