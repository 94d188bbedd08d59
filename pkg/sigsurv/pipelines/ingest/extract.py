import logging
import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from sigsurv.common.exceptions import IngestError
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, ReportEvent, SurvivalOutcome, describe_validation_error
from sigsurv.pipelines.ingest.transform import build_cohort

logger = logging.getLogger(__name__)

DELIMITER = ","
OUTCOMES_HEADER = ("patient_id", "duration_days", "event")
TOKEN_RESERVED = ":;,"
_EMBEDDINGS_HEADER = re.compile(r"^p=(?P<p>\d+),mode=(?P<mode>vector|token)$")


@dataclass
class ParseResult:
    """Rows that parsed cleanly plus (line number, reason) for every rejected line."""

    rows: list = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    def raise_on_failure(self, path: Path, what: str) -> None:
        total = len(self.rows) + len(self.failures)
        logger.info(f"Parsed {what} {path}: total={total}, valid={len(self.rows)}, failed={len(self.failures)}")
        if self.failures:
            for line_number, reason in self.failures:
                logger.debug(f"{path}:{line_number}: {reason}")
            line_number, reason = self.failures[0]
            more = f" ({len(self.failures) - 1} further malformed lines)" if len(self.failures) > 1 else ""
            raise IngestError(f"{reason}{more}", path=path, line_number=line_number)


def numbered_lines(path: Path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if line.strip():
                yield line_number, line


def parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ValueError(f"{name} is not a number: '{text}'") from e
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got '{text}'")
    return value


def check_token(token: str) -> str:
    if not token:
        raise ValueError("token is empty")
    reserved = sorted(set(token) & set(TOKEN_RESERVED))
    if reserved:
        raise ValueError(f"token '{token}' contains reserved character(s) {''.join(reserved)!r}")
    return token


def parse_token_payload(payload: str) -> tuple[tuple[str, int], ...]:
    """Parse ``token:count;token:count;...`` keeping the written order."""
    tokens: list[tuple[str, int]] = []
    for item in payload.split(";"):
        if not item:
            continue
        token, sep, count_text = item.rpartition(":")
        if not sep:
            raise ValueError(f"token entry '{item}' is not of the form token:count")
        check_token(token)
        try:
            count = int(count_text)
        except ValueError as e:
            raise ValueError(f"token count is not an integer in '{item}'") from e
        if count <= 0:
            raise ValueError(f"token count must be positive in '{item}'")
        tokens.append((token, count))
    return tuple(tokens)


def read_embeddings_header(path: Path) -> tuple[int, InputMode]:
    """Return (p, mode) declared by the first line of an embeddings file."""
    for line_number, line in numbered_lines(path):
        match = _EMBEDDINGS_HEADER.match(line.strip())
        if match is None:
            raise IngestError(
                f"header must read 'p=<int>,mode=<vector|token>', got '{line}'", path=path, line_number=line_number
            )
        return int(match["p"]), InputMode(match["mode"])
    raise IngestError("file is empty", path=path)


def read_report_rows(path: Path, mode: InputMode) -> tuple[int, list[ReportEvent]]:
    """
    Read every report line of an embeddings file.

    Args:
        path (Path): Embeddings file.
        mode (InputMode): Expected input mode; must match the file header.

    Returns:
        tuple[int, list[ReportEvent]]: Declared dimension p and the reports in file order.

    Raises:
        IngestError: On a header/mode mismatch or any malformed line (first one reported).
    """
    p, declared_mode = read_embeddings_header(path)
    if declared_mode is not mode:
        raise IngestError(f"file declares mode '{declared_mode.value}' but '{mode.value}' was requested",
                          path=path, line_number=1)

    result = ParseResult()
    lines = numbered_lines(path)
    next(lines)

    for line_number, line in lines:
        fields = line.split(DELIMITER)
        try:
            if len(fields) < 3:
                raise ValueError(f"expected at least 3 fields, got {len(fields)}")
            patient_id = fields[0].strip()
            if not patient_id:
                raise ValueError("patient_id is empty")
            t = parse_float(fields[1], "t_days")
            if t < 0:
                raise ValueError(f"t_days must be non-negative, got {t}")

            if mode is InputMode.VECTOR:
                if len(fields) - 2 != p:
                    raise ValueError(f"dimension mismatch: expected {p} values, got {len(fields) - 2}")
                vector = np.array([parse_float(x, f"e_{k + 1}") for k, x in enumerate(fields[2:])])
                result.rows.append(ReportEvent(patient_id=patient_id, t=t, embedding=vector))
            else:
                if len(fields) != 3:
                    raise ValueError(f"token lines have exactly 3 fields, got {len(fields)}")
                result.rows.append(ReportEvent(patient_id=patient_id, t=t, tokens=parse_token_payload(fields[2])))

        except ValidationError as err:
            result.failures.append((line_number, describe_validation_error(err)))
        except ValueError as err:
            result.failures.append((line_number, str(err)))

    result.raise_on_failure(path, "reports")
    return p, result.rows


def read_outcomes(path: Path) -> list[SurvivalOutcome]:
    """
    Read and validate an outcomes file.

    Raises:
        IngestError: On a wrong header, malformed line, or duplicate patient id.
    """
    result = ParseResult()
    lines = numbered_lines(path)

    header = next(lines, None)
    if header is None:
        raise IngestError("file is empty", path=path)
    if tuple(x.strip() for x in header[1].split(DELIMITER)) != OUTCOMES_HEADER:
        raise IngestError(f"header must read '{','.join(OUTCOMES_HEADER)}'", path=path, line_number=header[0])

    seen: dict[str, int] = {}
    for line_number, line in lines:
        fields = line.split(DELIMITER)
        if len(fields) != 3:
            result.failures.append((line_number, f"expected 3 fields, got {len(fields)}"))
            continue
        try:
            outcome = SurvivalOutcome(patient_id=fields[0], duration=fields[1].strip(), event=fields[2].strip())
        except ValidationError as err:
            result.failures.append((line_number, describe_validation_error(err)))
            continue

        if outcome.patient_id in seen:
            raise IngestError(
                f"duplicate patient '{outcome.patient_id}' (first seen on line {seen[outcome.patient_id]})",
                path=path,
                line_number=line_number,
            )
        seen[outcome.patient_id] = line_number
        result.rows.append(outcome)

    result.raise_on_failure(path, "outcomes")
    return result.rows


def load_cohort(embeddings_path: Path | str, outcomes_path: Path | str, mode: InputMode | str) -> Cohort:
    """
    Load, validate and deduplicate a cohort from an embeddings file and an outcomes file.

    Byte-identical report rows are collapsed; reports are sorted by time. Patients listed in
    the outcomes file without any report are dropped with a warning.

    Args:
        embeddings_path (Path | str): Embeddings file (vector or token mode).
        outcomes_path (Path | str): Outcomes file.
        mode (InputMode | str): Input mode the embeddings file must declare.

    Returns:
        Cohort: Validated cohort in the requested mode.

    Raises:
        IngestError: Malformed lines, dimension mismatches, reports for unknown patients,
            duplicate patients, or conflicting reports at the same time.
    """
    embeddings_path, outcomes_path = Path(embeddings_path), Path(outcomes_path)
    mode = InputMode(mode)

    outcomes = read_outcomes(outcomes_path)
    p, reports = read_report_rows(embeddings_path, mode)

    cohort = build_cohort(outcomes, reports, embedding_dim=p, mode=mode, source=embeddings_path)
    logger.info(f"Loaded cohort: {len(cohort)} patients, {cohort.n_reports} reports, p={p}, mode={mode.value}")
    return cohort

