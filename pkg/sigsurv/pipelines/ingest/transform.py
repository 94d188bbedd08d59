import logging
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from sklearn.model_selection import StratifiedKFold, train_test_split

from sigsurv.common.exceptions import IngestError
from sigsurv.common.utils.seeding import SPLIT_STREAM, substream_int
from sigsurv.pipelines.ingest.schemas import (
    Cohort,
    InputMode,
    PatientRecord,
    ReportEvent,
    SurvivalOutcome,
    describe_validation_error,
)

logger = logging.getLogger(__name__)

TRAIN_LABEL = "train"


def deduplicate_reports(reports: Sequence[ReportEvent]) -> list[ReportEvent]:
    """
    Drop exact duplicate reports of one patient and sort the rest by time.

    The dedup key is (patient_id, t, payload bytes). Two different payloads at the same time
    cannot be ordered and are rejected.

    Raises:
        IngestError: If two distinct reports share a timestamp.
    """
    seen: set[tuple[str, float, bytes]] = set()
    unique: list[ReportEvent] = []
    for report in reports:
        key = (report.patient_id, report.t, report.payload_key())
        if key in seen:
            continue
        seen.add(key)
        unique.append(report)

    unique.sort(key=lambda r: r.t)
    for previous, current in zip(unique, unique[1:]):
        if previous.t == current.t:
            raise IngestError(
                f"patient '{current.patient_id}' has two different reports at t={current.t}; "
                "report times must be distinct after duplicate removal"
            )
    return unique


def build_cohort(
    outcomes: Sequence[SurvivalOutcome],
    reports: Sequence[ReportEvent],
    *,
    embedding_dim: int,
    mode: InputMode,
    source: Path | None = None,
) -> Cohort:
    """
    Group reports by patient, deduplicate them, and attach outcomes.

    Patient order follows the outcomes file. Outcomes without reports are dropped with a
    warning; reports whose patient has no outcome are an error.
    """
    by_patient: dict[str, list[ReportEvent]] = defaultdict(list)
    for report in reports:
        by_patient[report.patient_id].append(report)

    known = {o.patient_id for o in outcomes}
    unknown = sorted(set(by_patient) - known)
    if unknown:
        raise IngestError(f"reports reference unknown patient_id(s): {', '.join(unknown[:10])}", path=source)

    patients: list[PatientRecord] = []
    n_duplicates = 0
    without_reports: list[str] = []
    for outcome in outcomes:
        raw = by_patient.get(outcome.patient_id, [])
        if not raw:
            without_reports.append(outcome.patient_id)
            continue
        unique = deduplicate_reports(raw)
        n_duplicates += len(raw) - len(unique)
        patients.append(PatientRecord(outcome=outcome, reports=tuple(unique)))

    if n_duplicates:
        logger.info(f"Dropped {n_duplicates} duplicate report rows")
    if without_reports:
        logger.warning(f"Dropped {len(without_reports)} patients without reports: {without_reports[:10]}")

    try:
        return Cohort(patients=tuple(patients), embedding_dim=embedding_dim, mode=mode)
    except ValidationError as err:
        raise IngestError(describe_validation_error(err), path=source) from err


@dataclass(frozen=True)
class MaskResult:
    """Masked cohort plus the ids of patients left without any report."""

    cohort: Cohort
    excluded: tuple[str, ...] = field(default_factory=tuple)

    @property
    def n_excluded(self) -> int:
        return len(self.excluded)


def mask_tail(cohort: Cohort, horizon_days: float = 100.0) -> MaskResult:
    """
    Hide the final ``horizon_days`` of each patient's follow-up.

    Reports with ``t > duration - horizon_days`` are dropped so that features never see the
    period right before the event or censoring. Patients with no report left are removed and
    listed in the result. Masking is idempotent.

    Args:
        cohort (Cohort): Cohort to mask.
        horizon_days (float): Length of the masked tail, in days. Default: 100.

    Returns:
        MaskResult: The masked cohort and the excluded patient ids.
    """
    if horizon_days < 0:
        raise ValueError(f"horizon_days must be non-negative, got {horizon_days}")

    kept: list[PatientRecord] = []
    excluded: list[str] = []
    n_dropped_reports = 0
    for patient in cohort:
        cutoff = patient.outcome.duration - horizon_days
        reports = [r for r in patient.reports if r.t <= cutoff]
        n_dropped_reports += len(patient.reports) - len(reports)
        if reports:
            kept.append(patient if len(reports) == len(patient.reports) else patient.with_reports(reports))
        else:
            excluded.append(patient.patient_id)

    logger.info(
        f"Masked last {horizon_days} days: dropped {n_dropped_reports} reports, "
        f"excluded {len(excluded)} of {len(cohort)} patients"
    )
    return MaskResult(cohort=cohort.with_patients(kept), excluded=tuple(excluded))


def split_cohort(
    cohort: Cohort, test_fraction: float, n_test_folds: int, seed: int
) -> tuple[Cohort, list[Cohort]]:
    """
    Stratified train/test split, with the test part cut into disjoint stratified folds.

    Stratification is on the event indicator. Both the split and the folds are drawn from
    the ``split`` substream of ``seed``; patient order inside each part follows the cohort.

    Args:
        cohort (Cohort): Cohort to split.
        test_fraction (float): Share of patients sent to the test part, in (0, 1).
        n_test_folds (int): Number of disjoint test folds.
        seed (int): Master seed.

    Returns:
        tuple[Cohort, list[Cohort]]: Training cohort and the list of test folds.

    Raises:
        ValueError: If the arguments are out of range or the cohort is too small.
        IngestError: If the test part has fewer events than folds.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if n_test_folds < 1:
        raise ValueError(f"n_test_folds must be positive, got {n_test_folds}")
    if len(cohort) < 2 * n_test_folds:
        raise ValueError(f"cohort of {len(cohort)} patients is too small for {n_test_folds} test folds")

    events = cohort.events
    n_events = int(events.sum())
    if n_events < 2 or (len(events) - n_events) == 1:
        raise IngestError(
            f"too few events to stratify: {n_events} events among {len(events)} patients "
            "(each event class needs at least 2 patients)"
        )

    random_state = substream_int(seed, SPLIT_STREAM)
    indices = np.arange(len(cohort))
    train_idx, test_idx = train_test_split(
        indices, test_size=test_fraction, stratify=events, random_state=random_state
    )
    train_idx, test_idx = np.sort(train_idx), np.sort(test_idx)

    test_events = events[test_idx]
    if test_events.sum() < n_test_folds:
        raise IngestError(
            f"too few events to stratify: {int(test_events.sum())} test events for {n_test_folds} folds"
        )

    ids = cohort.patient_ids
    train = cohort.subset([ids[i] for i in train_idx])

    if n_test_folds == 1:
        folds = [cohort.subset([ids[i] for i in test_idx])]
    else:
        splitter = StratifiedKFold(n_splits=n_test_folds, shuffle=True, random_state=random_state)
        folds = [
            cohort.subset([ids[i] for i in np.sort(test_idx[fold_positions])])
            for _, fold_positions in splitter.split(test_idx, test_events)
        ]

    logger.info(
        f"Split {len(cohort)} patients: train={len(train)}, test={len(test_idx)} in "
        f"{n_test_folds} folds of sizes {[len(f) for f in folds]}"
    )
    return train, folds


def split_assignment(train: Cohort, folds: Sequence[Cohort]) -> dict[str, str | int]:
    """Map each patient id to ``"train"`` or its 0-based test fold index."""
    assignment: dict[str, str | int] = {pid: TRAIN_LABEL for pid in train.patient_ids}
    for k, fold in enumerate(folds):
        for pid in fold.patient_ids:
            assignment[pid] = k
    return assignment


def apply_split(cohort: Cohort, assignment: Mapping[str, str | int]) -> tuple[Cohort, list[Cohort]]:
    """
    Rebuild the train cohort and test folds of ``cohort`` from a stored assignment.

    Patients missing from the assignment are ignored; assigned patients missing from the
    cohort (e.g. excluded by a later stage) are skipped.
    """
    train_ids = [pid for pid in cohort.patient_ids if assignment.get(pid) == TRAIN_LABEL]
    fold_labels = sorted({v for v in assignment.values() if v != TRAIN_LABEL}, key=int)
    folds = [
        cohort.subset([pid for pid in cohort.patient_ids if assignment.get(pid) == label])
        for label in fold_labels
    ]
    return cohort.subset(train_ids), folds
