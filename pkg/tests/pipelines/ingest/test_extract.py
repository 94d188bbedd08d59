import numpy as np
import pytest

from sigsurv.common.exceptions import IngestError
from sigsurv.pipelines.ingest.extract import load_cohort, parse_token_payload, read_outcomes
from sigsurv.pipelines.ingest.schemas import InputMode


@pytest.fixture
def outcomes_file(tmp_path):
    """Fixture providing a valid outcomes file for patients a, b and c."""
    path = tmp_path / "outcomes.csv"
    path.write_text("patient_id,duration_days,event\na,500,1\nb,300.5,0\nc,80,1\n", encoding="utf-8")
    return path


@pytest.fixture
def embeddings_file(tmp_path):
    """Fixture providing a vector-mode file with one exact duplicate row and unsorted times."""
    path = tmp_path / "embeddings.csv"
    path.write_text(
        "p=2,mode=vector\n"
        "a,100,0.5,1.5\n"
        "a,0,1.0,2.0\n"
        "a,100,0.5,1.5\n"
        "b,0,-1,0\n"
        "\n",
        encoding="utf-8",
    )
    return path


def test_load_cohort_sorts_deduplicates_and_drops_patients_without_reports(embeddings_file, outcomes_file, caplog):
    cohort = load_cohort(embeddings_file, outcomes_file, InputMode.VECTOR)

    assert cohort.patient_ids == ["a", "b"]
    assert cohort.embedding_dim == 2
    np.testing.assert_array_equal(cohort.get("a").times, [0.0, 100.0])
    np.testing.assert_array_equal(cohort.get("a").embedding_matrix(), [[1.0, 2.0], [0.5, 1.5]])
    np.testing.assert_array_equal(cohort.durations, [500.0, 300.5])
    np.testing.assert_array_equal(cohort.events, [1, 0])
    assert "without reports" in caplog.text


def test_load_cohort_rejects_mode_mismatch(embeddings_file, outcomes_file):
    with pytest.raises(IngestError, match="declares mode 'vector'"):
        load_cohort(embeddings_file, outcomes_file, "token")


@pytest.mark.parametrize(
    "body, line_number, message",
    [
        ("a,0,1.0\n", 2, "dimension mismatch"),
        ("a,-1,1.0,2.0\n", 2, "non-negative"),
        ("a,0,1.0,abc\n", 2, "e_2 is not a number"),
        ("a,0,1.0,2.0\nzz,0,1,1\n", None, "unknown patient_id"),
        ("a,0,1.0,2.0\na,0,3.0,4.0\n", None, "two different reports at t=0.0"),
    ],
)
def test_load_cohort_reports_malformed_lines(tmp_path, outcomes_file, body, line_number, message):
    path = tmp_path / "bad.csv"
    path.write_text("p=2,mode=vector\n" + body, encoding="utf-8")

    with pytest.raises(IngestError, match=message) as exc_info:
        load_cohort(path, outcomes_file, InputMode.VECTOR)

    assert exc_info.value.line_number == line_number


def test_bad_header_is_rejected(tmp_path, outcomes_file):
    path = tmp_path / "bad.csv"
    path.write_text("dim=2\n", encoding="utf-8")

    with pytest.raises(IngestError, match="header must read"):
        load_cohort(path, outcomes_file, InputMode.VECTOR)


def test_token_mode_cohort(tmp_path, outcomes_file):
    path = tmp_path / "tokens.csv"
    path.write_text("p=3,mode=token\na,0,tumor:2;stable:1\nb,5,growth:1\n", encoding="utf-8")

    cohort = load_cohort(path, outcomes_file, InputMode.TOKEN)

    assert cohort.mode is InputMode.TOKEN
    assert cohort.get("a").reports[0].tokens == (("tumor", 2), ("stable", 1))


@pytest.mark.parametrize(
    "body, message",
    [
        ("a,0,tumor:2\nb,5,gro,wth:1\n", "exactly 3 fields"),
        ("a,0,tumor:2\nb,5,gro:wth:1\n", "reserved character"),
        ("a,0,tumor:2\nb,5,growth;1\n", "token:count"),
    ],
)
def test_token_lines_with_reserved_characters_are_rejected(tmp_path, outcomes_file, body, message):
    path = tmp_path / "tokens.csv"
    path.write_text("p=3,mode=token\n" + body, encoding="utf-8")

    with pytest.raises(IngestError, match=message) as exc_info:
        load_cohort(path, outcomes_file, InputMode.TOKEN)

    assert exc_info.value.line_number == 3


@pytest.mark.parametrize(
    "payload, message",
    [
        ("tumor", "token:count"),
        ("tumor:x", "not an integer"),
        ("tumor:0", "must be positive"),
        (":2", "token is empty"),
        ("tu:mor:2", "reserved character"),
        ("tu,mor:2", "reserved character"),
    ],
)
def test_parse_token_payload_errors(payload, message):
    with pytest.raises(ValueError, match=message):
        parse_token_payload(payload)


@pytest.mark.parametrize(
    "content, message",
    [
        ("patient_id,duration,event\na,1,1\n", "header must read"),
        ("patient_id,duration_days,event\na,0,1\n", "duration"),
        ("patient_id,duration_days,event\na,10,2\n", "event"),
        ("patient_id,duration_days,event\na,10,1\na,12,0\n", "duplicate patient 'a'"),
        ("patient_id,duration_days,event\na,10\n", "expected 3 fields"),
    ],
)
def test_read_outcomes_errors(tmp_path, content, message):
    path = tmp_path / "outcomes.csv"
    path.write_text(content, encoding="utf-8")

    with pytest.raises(IngestError, match=message):
        read_outcomes(path)
