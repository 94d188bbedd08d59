from sigsurv.pipelines.orchestration.grid_search import GridSearchResult, grid_search_lambda
from sigsurv.pipelines.orchestration.manifest import RunManifest
from sigsurv.pipelines.orchestration.pipeline import (
    baseline_last_report,
    baseline_mean_embedding,
    run_baseline,
    run_pipeline,
)

__all__ = [
    "GridSearchResult",
    "RunManifest",
    "baseline_last_report",
    "baseline_mean_embedding",
    "grid_search_lambda",
    "run_baseline",
    "run_pipeline",
]
