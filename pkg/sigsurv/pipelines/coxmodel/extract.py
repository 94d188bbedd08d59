import logging
from pathlib import Path

import numpy as np

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.common.exceptions import CoxModelError
from sigsurv.common.utils.step_function import StepFunction
from sigsurv.pipelines.coxmodel.load import FORMAT_VERSION
from sigsurv.pipelines.coxmodel.model import CoxModel, Standardization

logger = logging.getLogger(__name__)


def read_cox_model(path: Path | str) -> CoxModel:
    """
    Load a model written by ``write_cox_model``.

    Raises:
        CoxModelError: On an unknown format version, missing fields, or coefficients for
            unknown feature names.
    """
    path = Path(path)
    document = ArtifactStore(path.parent).load_json(path.name)
    if document.get("format_version") != FORMAT_VERSION:
        raise CoxModelError(f"{path}: unsupported format_version {document.get('format_version')!r}")

    try:
        names = list(document["feature_names"])
        position = {name: k for k, name in enumerate(names)}
        beta = np.zeros(len(names))
        for name, value in document["beta"].items():
            if name not in position:
                raise CoxModelError(f"{path}: coefficient for unknown feature '{name}'")
            beta[position[name]] = value

        pairs = np.array(document["baseline"], dtype=float).reshape(-1, 2)
        standardization = None
        if document["standardization"] is not None:
            standardization = Standardization(
                mean=np.array(document["standardization"]["mean"], dtype=float),
                scale=np.array(document["standardization"]["scale"], dtype=float),
            )

        model = CoxModel(
            beta=beta,
            lam=float(document["lambda"]),
            baseline=StepFunction(times=pairs[:, 0], values=pairs[:, 1], initial=0.0),
            feature_names=tuple(names),
            standardization=standardization,
            kkt_violation=float(document["kkt_violation"]),
            iterations=int(document["iterations"]),
        )
    except KeyError as err:
        raise CoxModelError(f"{path}: missing field {err}") from err

    logger.info(f"Loaded Cox model {path}: {model.n_nonzero} nonzero of {len(names)} coefficients")
    return model
