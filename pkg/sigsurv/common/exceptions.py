from collections.abc import Mapping
from pathlib import Path


class SigSurvError(Exception):
    """Base class for every error raised by the pipeline."""


class ConfigError(SigSurvError, ValueError):
    """Run configuration could not be read or failed validation."""


class IngestError(SigSurvError, ValueError):
    """
    A cohort input file violated its grammar or the cohort invariants.

    Attributes:
        path (Path | None): File the problem was found in.
        line_number (int | None): 1-based line number, when the problem is line-local.
        reason (str): Human-readable description.
    """

    def __init__(self, reason: str, *, path: Path | str | None = None, line_number: int | None = None):
        self.path = Path(path) if path is not None else None
        self.line_number = line_number
        self.reason = reason

        location = ""
        if self.path is not None:
            location = f"{self.path}:{line_number}: " if line_number is not None else f"{self.path}: "
        super().__init__(f"{location}{reason}")


class EmbeddingError(SigSurvError, ValueError):
    """A report could not be turned into a sentence embedding."""

    def __init__(self, reason: str, *, patient_id: str | None = None, t: float | None = None):
        self.patient_id = patient_id
        self.t = t
        self.reason = reason

        context = f"patient '{patient_id}' report at t={t}: " if patient_id is not None else ""
        super().__init__(f"{context}{reason}")


class CompressionError(SigSurvError, ValueError):
    pass


class SignatureError(SigSurvError, ValueError):
    """Signature extraction failed; ``failures`` maps patient id to reason."""

    def __init__(self, reason: str, failures: Mapping[str, str] | None = None):
        self.failures = dict(failures or {})
        if self.failures:
            shown = ", ".join(f"{pid} ({why})" for pid, why in list(self.failures.items())[:5])
            more = f" and {len(self.failures) - 5} more" if len(self.failures) > 5 else ""
            reason = f"{reason}: {shown}{more}"
        super().__init__(reason)


class CoxModelError(SigSurvError, ValueError):
    pass


class DegenerateDesignError(CoxModelError):
    pass


class ConvergenceError(CoxModelError):
    def __init__(self, reason: str, *, kkt_violation: float, iterations: int):
        self.kkt_violation = kkt_violation
        self.iterations = iterations
        super().__init__(f"{reason} (KKT violation={kkt_violation:.3e} after {iterations} iterations)")


class MetricError(SigSurvError, ValueError):
    """A metric is not evaluable on the given data."""


class LeakageError(SigSurvError):
    """Held-out patients reached a fitting stage."""


class StageError(SigSurvError):
    """A pipeline stage aborted; wraps the underlying cause."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
