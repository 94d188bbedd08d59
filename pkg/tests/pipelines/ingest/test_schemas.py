import numpy as np
import pytest
from pydantic import ValidationError

from sigsurv.pipelines.ingest.schemas import (
    Cohort,
    InputMode,
    PatientRecord,
    ReportEvent,
    SurvivalOutcome,
    describe_validation_error,
)


@pytest.fixture
def outcome():
    return SurvivalOutcome(patient_id="a", duration=100, event=1)


@pytest.fixture
def reports():
    """Fixture providing two vector-mode reports of patient a."""
    return (
        ReportEvent(patient_id="a", t=0.0, embedding=[1.0, 2.0]),
        ReportEvent(patient_id="a", t=4.0, embedding=[3.0, 4.0]),
    )


# ---- reports ----


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"t": 0.0}, "Exactly one of embedding and tokens"),
        ({"t": 0.0, "embedding": [1.0], "tokens": (("x", 1),)}, "Exactly one of embedding and tokens"),
        ({"t": -1.0, "embedding": [1.0]}, "finite non-negative"),
        ({"t": float("nan"), "embedding": [1.0]}, "finite non-negative"),
        ({"t": 0.0, "embedding": [[1.0, 2.0]]}, "finite 1-D vector"),
        ({"t": 0.0, "embedding": [1.0, np.inf]}, "finite 1-D vector"),
        ({"t": 0.0, "embedding": [1.0], "source": "pacs"}, "Extra inputs are not permitted"),
    ],
)
def test_report_validation(kwargs, message):
    with pytest.raises(ValidationError, match=message):
        ReportEvent(patient_id="a", **kwargs)


def test_report_is_immutable(reports):
    report = reports[0]

    with pytest.raises(ValidationError, match="frozen"):
        report.t = 2.0
    with pytest.raises(ValueError, match="read-only"):
        report.embedding[0] = 9.0


def test_report_coerces_payloads():
    vector_report = ReportEvent(patient_id="a", t=1, embedding=[1, 2])
    token_report = ReportEvent(patient_id="a", t=1, tokens=[["x", "2"]])

    assert isinstance(vector_report.embedding, np.ndarray)
    assert vector_report.embedding.dtype == float
    assert token_report.tokens == (("x", 2),)
    assert (vector_report.mode, token_report.mode) == (InputMode.VECTOR, InputMode.TOKEN)


def test_reports_compare_by_content(reports):
    same = ReportEvent(patient_id="a", t=0.0, embedding=np.array([1.0, 2.0]))

    assert reports[0] == same
    assert reports[0] != reports[1]
    assert reports[0].payload_key() == same.payload_key()


def test_with_embedding_switches_to_vector_mode():
    token_report = ReportEvent(patient_id="a", t=3.0, tokens=(("x", 1),))

    embedded = token_report.with_embedding(np.array([0.5, 0.5]))

    assert embedded.tokens is None
    assert embedded.mode is InputMode.VECTOR
    assert embedded.t == 3.0
    with pytest.raises(ValidationError, match="finite 1-D vector"):
        token_report.with_embedding(np.array([np.nan]))


# ---- patients ----


def test_patient_rejects_reports_of_another_patient(outcome):
    foreign = ReportEvent(patient_id="b", t=0.0, embedding=[1.0])

    with pytest.raises(ValidationError, match=r"holds reports of \['b'\]"):
        PatientRecord(outcome=outcome, reports=(foreign,))


def test_patient_accepts_report_lists(outcome, reports):
    patient = PatientRecord(outcome=outcome, reports=list(reports))

    assert isinstance(patient.reports, tuple)
    np.testing.assert_array_equal(patient.times, [0.0, 4.0])
    np.testing.assert_array_equal(patient.embedding_matrix(), [[1.0, 2.0], [3.0, 4.0]])


# ---- cohorts ----


def test_cohort_lookup_and_subset(small_cohort):
    last = small_cohort.patient_ids[-1]

    assert small_cohort.get(last).patient_id == last
    subset = small_cohort.subset([last, small_cohort.patient_ids[0]])
    assert subset.patient_ids == [last, small_cohort.patient_ids[0]]
    assert subset.get(last) == small_cohort.get(last)
    assert len(subset) == 2


def test_cohort_mode_is_coerced(outcome):
    report = ReportEvent(patient_id="a", t=0.0, tokens=(("x", 1),))

    cohort = Cohort(patients=(PatientRecord(outcome=outcome, reports=(report,)),), embedding_dim=0, mode="token")

    assert cohort.mode is InputMode.TOKEN


@pytest.mark.parametrize(
    "layout, mode, dim, message",
    [
        ([("a", [0.0]), ("a", [1.0])], InputMode.VECTOR, 2, "Duplicate patient id 'a'"),
        ([("a", [])], InputMode.VECTOR, 2, "has no reports"),
        ([("a", [4.0, 0.0])], InputMode.VECTOR, 2, "not strictly increasing"),
        ([("a", [0.0])], InputMode.VECTOR, 3, "has dimension 2, expected 3"),
        ([("a", [0.0])], InputMode.TOKEN, 2, "vector-mode report in a token-mode cohort"),
    ],
)
def test_cohort_invariants(layout, mode, dim, message):
    patients = [
        PatientRecord(
            outcome=SurvivalOutcome(patient_id=pid, duration=50, event=0),
            reports=tuple(ReportEvent(patient_id=pid, t=t, embedding=[t, 1.0]) for t in times),
        )
        for pid, times in layout
    ]

    with pytest.raises(ValidationError, match=message) as exc_info:
        Cohort(patients=patients, embedding_dim=dim, mode=mode)

    assert message in describe_validation_error(exc_info.value)


def test_cohort_is_immutable(small_cohort):
    with pytest.raises(ValidationError, match="frozen"):
        small_cohort.embedding_dim = 7
