import logging
from collections.abc import Iterable, Iterator, Sequence
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

logger = logging.getLogger(__name__)


class InputMode(str, Enum):
    VECTOR = "vector"
    TOKEN = "token"


class SurvivalOutcome(BaseModel):
    """
    Observed survival outcome of one patient.

    ``duration`` is the time in study T_i in days and ``event`` the indicator δ_i
    (1 when the event was observed, 0 when the patient was censored).
    """

    model_config = ConfigDict(strict=False, extra="forbid", frozen=True)

    patient_id: str = Field(..., min_length=1)
    duration: float = Field(..., gt=0, allow_inf_nan=False, description="Days in study")
    event: int = Field(..., ge=0, le=1, description="Event indicator")

    @field_validator("patient_id")
    @classmethod
    def strip_patient_id(cls, v: str) -> str:
        v = v.strip()
        if not v:
            raise ValueError("patient_id cannot be blank.")
        return v


def describe_validation_error(err: ValidationError) -> str:
    """One-line ``field: reason`` summary of a pydantic validation error."""
    return "; ".join(
        f"{'.'.join(map(str, e['loc'])) or 'record'}: {e['msg']}" for e in err.errors(include_url=False)
    )


class ReportEvent(BaseModel):
    """
    One timestamped report of a patient.

    Exactly one of ``embedding`` (vector mode) and ``tokens`` (token mode) is populated.
    ``t`` counts days since the patient's first report.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    patient_id: str = Field(..., min_length=1)
    t: float
    embedding: np.ndarray | None = None
    tokens: tuple[tuple[str, int], ...] | None = None

    @field_validator("t")
    @classmethod
    def check_time(cls, v: float) -> float:
        if not np.isfinite(v) or v < 0:
            raise ValueError(f"Report time must be a finite non-negative number, got {v}")
        return v

    @field_validator("embedding", mode="before")
    @classmethod
    def freeze_embedding(cls, v: object) -> np.ndarray | None:
        if v is None:
            return None
        vector = np.array(v, dtype=float)
        if vector.ndim != 1 or not np.all(np.isfinite(vector)):
            raise ValueError("Embedding must be a finite 1-D vector")
        vector.setflags(write=False)
        return vector

    @model_validator(mode="after")
    def check_single_payload(self) -> "ReportEvent":
        if (self.embedding is None) == (self.tokens is None):
            raise ValueError("Exactly one of embedding and tokens must be populated")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReportEvent):
            return NotImplemented
        same_embedding = (
            self.embedding is None and other.embedding is None
        ) or (
            self.embedding is not None
            and other.embedding is not None
            and np.array_equal(self.embedding, other.embedding)
        )
        return (
            self.patient_id == other.patient_id
            and self.t == other.t
            and self.tokens == other.tokens
            and same_embedding
        )

    @property
    def mode(self) -> InputMode:
        return InputMode.VECTOR if self.embedding is not None else InputMode.TOKEN

    def payload_key(self) -> bytes:
        """Bytes identifying the report content, used for deduplication."""
        if self.embedding is not None:
            return self.embedding.tobytes()
        assert self.tokens is not None
        return ";".join(f"{tok}:{cnt}" for tok, cnt in self.tokens).encode("utf-8")

    def with_embedding(self, embedding: np.ndarray) -> "ReportEvent":
        return ReportEvent(patient_id=self.patient_id, t=self.t, embedding=embedding)


class PatientRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    outcome: SurvivalOutcome
    reports: tuple[ReportEvent, ...]

    @model_validator(mode="after")
    def check_report_owner(self) -> "PatientRecord":
        strangers = {r.patient_id for r in self.reports} - {self.outcome.patient_id}
        if strangers:
            raise ValueError(f"Patient '{self.outcome.patient_id}' holds reports of {sorted(strangers)}")
        return self

    @property
    def patient_id(self) -> str:
        return self.outcome.patient_id

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.reports], dtype=float)

    def embedding_matrix(self) -> np.ndarray:
        """Reports stacked row-wise, shape (n_reports, embedding_dim)."""
        return np.vstack([r.embedding for r in self.reports if r.embedding is not None])

    def with_reports(self, reports: Iterable[ReportEvent]) -> "PatientRecord":
        return PatientRecord(outcome=self.outcome, reports=tuple(reports))


class Cohort(BaseModel):
    """
    Validated collection of patients with ordered reports.

    Invariants: unique patient ids, at least one report per patient, report times strictly
    increasing, and every embedding of length ``embedding_dim`` in vector mode.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    patients: tuple[PatientRecord, ...]
    embedding_dim: int = Field(..., ge=0)
    mode: InputMode = InputMode.VECTOR

    _index: dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def check_patients(self) -> "Cohort":
        seen: set[str] = set()
        for patient in self.patients:
            pid = patient.patient_id
            if pid in seen:
                raise ValueError(f"Duplicate patient id '{pid}' in cohort")
            seen.add(pid)

            if not patient.reports:
                raise ValueError(f"Patient '{pid}' has no reports")
            if np.any(np.diff(patient.times) <= 0):
                raise ValueError(f"Reports of patient '{pid}' are not strictly increasing in t")

            for report in patient.reports:
                if report.mode is not self.mode:
                    raise ValueError(f"Patient '{pid}' has a {report.mode.value}-mode report in a "
                                     f"{self.mode.value}-mode cohort")
                if report.embedding is not None and report.embedding.shape[0] != self.embedding_dim:
                    raise ValueError(
                        f"Patient '{pid}' report at t={report.t} has dimension "
                        f"{report.embedding.shape[0]}, expected {self.embedding_dim}"
                    )
        return self

    def model_post_init(self, __context: object) -> None:
        self._index = {patient.patient_id: position for position, patient in enumerate(self.patients)}

    def __len__(self) -> int:
        return len(self.patients)

    def __iter__(self) -> Iterator[PatientRecord]:  # type: ignore[override]
        return iter(self.patients)

    @property
    def patient_ids(self) -> list[str]:
        return [p.patient_id for p in self.patients]

    @property
    def durations(self) -> np.ndarray:
        return np.array([p.outcome.duration for p in self.patients], dtype=float)

    @property
    def events(self) -> np.ndarray:
        return np.array([p.outcome.event for p in self.patients], dtype=int)

    @property
    def n_reports(self) -> int:
        return sum(len(p.reports) for p in self.patients)

    def get(self, patient_id: str) -> PatientRecord:
        return self.patients[self._index[patient_id]]

    def subset(self, patient_ids: Sequence[str]) -> "Cohort":
        """Cohort restricted to ``patient_ids``, in the given order."""
        return self.with_patients([self.get(pid) for pid in patient_ids])

    def with_patients(self, patients: Iterable[PatientRecord], embedding_dim: int | None = None,
                      mode: InputMode | None = None) -> "Cohort":
        return Cohort(
            patients=tuple(patients),
            embedding_dim=self.embedding_dim if embedding_dim is None else embedding_dim,
            mode=self.mode if mode is None else mode,
        )

    def all_embeddings(self) -> np.ndarray:
        """Every report embedding of the cohort, stacked in patient then time order."""
        if self.mode is not InputMode.VECTOR:
            raise ValueError("Cohort is in token mode; embed it before reading embeddings")
        return np.vstack([p.embedding_matrix() for p in self.patients])
