import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from sigsurv.common.exceptions import SignatureError
from sigsurv.pipelines.ingest.schemas import Cohort, PatientRecord
from sigsurv.pipelines.signature.tensor import TimeScale, augment_path, path_signature, words

logger = logging.getLogger(__name__)

ID_COLUMN = "patient_id"
TIME_CHANNEL = 0


def word_name(word: tuple[int, ...]) -> str:
    return "S_" + ".".join(str(i) for i in word)


def feature_names(d: int, level: int, drop_time_words: bool = False) -> list[str]:
    """Column names of the exported features: levels 1..L in flat-layout order."""
    return [
        word_name(w) for w in words(d, level, include_empty=False)
        if not (drop_time_words and TIME_CHANNEL in w)
    ]


def _feature_mask(d: int, level: int, drop_time_words: bool) -> np.ndarray:
    return np.array([not (drop_time_words and TIME_CHANNEL in w) for w in words(d, level, include_empty=False)])


@dataclass(frozen=True)
class FeatureMatrix:
    """
    One row of signature coefficients per patient.

    Attributes:
        patient_ids (tuple[str, ...]): Row labels, in cohort order.
        columns (tuple[str, ...]): Index-word names such as ``S_0.1.1``.
        values (np.ndarray): Finite matrix of shape (n_patients, n_columns).
    """

    patient_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.patient_ids), len(self.columns)):
            raise SignatureError(
                f"values have shape {values.shape}, expected ({len(self.patient_ids)}, {len(self.columns)})"
            )
        if not np.all(np.isfinite(values)):
            raise SignatureError("feature matrix has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "patient_ids", tuple(self.patient_ids))
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def rows_for(self, patient_ids: Sequence[str]) -> "FeatureMatrix":
        position = {pid: i for i, pid in enumerate(self.patient_ids)}
        missing = [pid for pid in patient_ids if pid not in position]
        if missing:
            raise KeyError(f"patients not in feature matrix: {missing[:10]}")
        idx = [position[pid] for pid in patient_ids]
        return FeatureMatrix(patient_ids=tuple(patient_ids), columns=self.columns, values=self.values[idx])

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.values, columns=list(self.columns))
        df.insert(0, ID_COLUMN, list(self.patient_ids))
        return df

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "FeatureMatrix":
        if df.columns[0] != ID_COLUMN:
            raise SignatureError(f"first column must be '{ID_COLUMN}', got '{df.columns[0]}'")
        return cls(
            patient_ids=tuple(df[ID_COLUMN].astype(str)),
            columns=tuple(df.columns[1:]),
            values=df.iloc[:, 1:].to_numpy(dtype=float),
        )


def _patient_row(
    patient: PatientRecord, level: int, time_scale: TimeScale, epsilon: float
) -> tuple[str, np.ndarray | None, str | None]:
    try:
        path = augment_path(patient.times, patient.embedding_matrix(), time_scale, epsilon)
        coeffs = path_signature(path, level).coeffs[1:]
        if not np.all(np.isfinite(coeffs)):
            raise SignatureError("non-finite signature coefficients")
        return patient.patient_id, coeffs, None
    except (SignatureError, ValueError) as err:
        return patient.patient_id, None, str(err)


def signature_features(
    cohort: Cohort,
    level: int = 3,
    time_scale: TimeScale = "unit_interval",
    *,
    drop_time_words: bool = False,
    single_report_epsilon: float = 1e-3,
    n_jobs: int = 1,
) -> FeatureMatrix:
    """
    Truncated signature features of every patient's time-augmented trajectory.

    The level-0 coefficient is dropped; columns follow the flat level-major lexicographic
    layout over ``d = embedding_dim + 1`` channels, channel 0 being time. Rows come back
    in cohort order whatever ``n_jobs`` is.

    Args:
        cohort (Cohort): Projected vector-mode cohort.
        level (int): Truncation level L.
        time_scale (str): ``unit_interval`` (default) or ``days``.
        drop_time_words (bool): Leave out every word containing the time channel.
        single_report_epsilon (float): Offset used to duplicate a lone report.
        n_jobs (int): joblib workers for the per-patient computation.

    Returns:
        FeatureMatrix: One row per patient.

    Raises:
        SignatureError: Listing every patient whose signature could not be computed.
    """
    d = cohort.embedding_dim + 1
    results = Parallel(n_jobs=n_jobs)(
        delayed(_patient_row)(patient, level, time_scale, single_report_epsilon) for patient in cohort
    )

    failures = {pid: reason for pid, _, reason in results if reason is not None}
    if failures:
        raise SignatureError(f"signature extraction failed for {len(failures)} patients", failures)

    mask = _feature_mask(d, level, drop_time_words)
    values = np.vstack([row[mask] for _, row, _ in results]) if results else np.empty((0, int(mask.sum())))
    matrix = FeatureMatrix(
        patient_ids=tuple(cohort.patient_ids),
        columns=tuple(feature_names(d, level, drop_time_words)),
        values=values,
    )
    logger.info(f"Computed signature features: {matrix.shape[0]} patients x {matrix.shape[1]} columns "
                f"(d={d}, level={level}, time_scale={time_scale})")
    return matrix
