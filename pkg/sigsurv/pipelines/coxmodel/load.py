from pathlib import Path
from typing import Any

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.pipelines.coxmodel.model import CoxModel

FORMAT_VERSION = 1


def cox_model_document(model: CoxModel) -> dict[str, Any]:
    standardization = None
    if model.standardization is not None:
        standardization = {
            "mean": model.standardization.mean.tolist(),
            "scale": model.standardization.scale.tolist(),
        }
    return {
        "format_version": FORMAT_VERSION,
        "lambda": model.lam,
        "feature_names": list(model.feature_names),
        "beta": {name: float(b) for name, b in zip(model.feature_names, model.beta, strict=True) if b != 0},
        "standardization": standardization,
        "baseline": [[t, h] for t, h in model.baseline.to_pairs()],
        "kkt_violation": model.kkt_violation,
        "iterations": model.iterations,
    }


def write_cox_model(model: CoxModel, store: ArtifactStore, key: str) -> Path:
    """Save the model as JSON; only nonzero coefficients are listed, keyed by feature name."""
    return store.save_dict_as_json(cox_model_document(model), key)
