import numpy as np
import pytest

from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, PatientRecord, ReportEvent, SurvivalOutcome


def build_vector_cohort(layout: dict[str, tuple[float, int, list[tuple[float, list[float]]]]]) -> Cohort:
    """Cohort from ``{patient_id: (duration, event, [(t, embedding), ...])}``."""
    patients = []
    dim = None
    for pid, (duration, event, reports) in layout.items():
        events = tuple(ReportEvent(patient_id=pid, t=t, embedding=np.array(e, dtype=float)) for t, e in reports)
        dim = len(reports[0][1])
        outcome = SurvivalOutcome(patient_id=pid, duration=duration, event=event)
        patients.append(PatientRecord(outcome=outcome, reports=events))
    return Cohort(patients=tuple(patients), embedding_dim=dim or 0, mode=InputMode.VECTOR)


def random_vector_cohort(n: int, p: int, seed: int = 0, max_reports: int = 6, event_rate: float = 0.6) -> Cohort:
    """Random cohort with 1 to ``max_reports`` reports per patient inside its follow-up."""
    rng = np.random.default_rng(seed)
    layout = {}
    for i in range(n):
        duration = float(rng.uniform(200.0, 3000.0))
        n_reports = int(rng.integers(1, max_reports + 1))
        times = np.sort(rng.choice(np.arange(0, int(duration)), size=n_reports, replace=False)).astype(float)
        times -= times[0]
        reports = [(float(t), list(rng.normal(size=p))) for t in times]
        layout[f"P{i:03d}"] = (duration, int(rng.uniform() < event_rate), reports)
    return build_vector_cohort(layout)


@pytest.fixture
def small_cohort():
    """Fixture providing a hand-built 3-patient cohort in 2 dimensions."""
    return build_vector_cohort(
        {
            "A": (400.0, 1, [(0.0, [1.0, 0.0]), (100.0, [2.0, 1.0]), (350.0, [3.0, 1.0])]),
            "B": (250.0, 0, [(0.0, [0.0, 1.0]), (200.0, [1.0, 1.0])]),
            "C": (90.0, 1, [(0.0, [5.0, 5.0])]),
        }
    )
