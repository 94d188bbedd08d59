import logging
from pathlib import Path

from sigsurv.pipelines.ingest.extract import DELIMITER, OUTCOMES_HEADER
from sigsurv.pipelines.ingest.schemas import Cohort, ReportEvent

logger = logging.getLogger(__name__)


def _format_number(value: float) -> str:
    # repr gives the shortest string that parses back to the same float
    return repr(float(value))


def _format_report(report: ReportEvent) -> str:
    head = f"{report.patient_id}{DELIMITER}{_format_number(report.t)}"
    if report.embedding is not None:
        return head + DELIMITER + DELIMITER.join(_format_number(x) for x in report.embedding)
    assert report.tokens is not None
    return head + DELIMITER + ";".join(f"{tok}:{cnt}" for tok, cnt in report.tokens)


def write_embeddings(cohort: Cohort, path: Path | str) -> Path:
    """Write every report of ``cohort`` in the embeddings-file grammar of its mode."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"p={cohort.embedding_dim},mode={cohort.mode.value}\n")
        for patient in cohort:
            for report in patient.reports:
                f.write(_format_report(report) + "\n")

    logger.info(f"Wrote {cohort.n_reports} reports of {len(cohort)} patients to {path}")
    return path


def write_outcomes(cohort: Cohort, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(DELIMITER.join(OUTCOMES_HEADER) + "\n")
        for patient in cohort:
            outcome = patient.outcome
            f.write(f"{outcome.patient_id}{DELIMITER}{_format_number(outcome.duration)}{DELIMITER}{outcome.event}\n")

    logger.info(f"Wrote {len(cohort)} outcomes to {path}")
    return path


def write_cohort(cohort: Cohort, embeddings_path: Path | str, outcomes_path: Path | str) -> tuple[Path, Path]:
    """
    Serialize a cohort to the embeddings/outcomes file pair read by ``load_cohort``.

    Loading the written pair gives back an identical cohort.
    """
    return write_embeddings(cohort, embeddings_path), write_outcomes(cohort, outcomes_path)
