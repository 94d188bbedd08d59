import logging
from pathlib import Path

import numpy as np

from sigsurv.pipelines.ingest.extract import DELIMITER
from sigsurv.pipelines.ingest.load import write_cohort
from sigsurv.pipelines.ingest.schemas import Cohort

logger = logging.getLogger(__name__)

EMBEDDINGS_FILE = "embeddings.csv"
OUTCOMES_FILE = "outcomes.csv"
GROUND_TRUTH_FILE = "ground_truth.csv"
GROUND_TRUTH_HEADER = ("patient_id", "true_log_hazard")


def write_ground_truth(cohort: Cohort, truth: np.ndarray, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(DELIMITER.join(GROUND_TRUTH_HEADER) + "\n")
        for pid, value in zip(cohort.patient_ids, truth, strict=True):
            f.write(f"{pid}{DELIMITER}{float(value)!r}\n")
    return path


def write_synthetic(cohort: Cohort, truth: np.ndarray, out_dir: Path | str) -> dict[str, Path]:
    """Write the cohort in the ingest formats plus the true log-hazards."""
    out_dir = Path(out_dir)
    embeddings, outcomes = write_cohort(cohort, out_dir / EMBEDDINGS_FILE, out_dir / OUTCOMES_FILE)
    ground_truth = write_ground_truth(cohort, truth, out_dir / GROUND_TRUTH_FILE)
    logger.info(f"Wrote synthetic cohort to {out_dir}")
    return {"embeddings": embeddings, "outcomes": outcomes, "ground_truth": ground_truth}
