from sigsurv.pipelines.ingest.extract import load_cohort
from sigsurv.pipelines.ingest.load import write_cohort
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, PatientRecord, ReportEvent, SurvivalOutcome
from sigsurv.pipelines.ingest.transform import MaskResult, mask_tail, split_cohort

__all__ = [
    "Cohort",
    "InputMode",
    "MaskResult",
    "PatientRecord",
    "ReportEvent",
    "SurvivalOutcome",
    "load_cohort",
    "mask_tail",
    "split_cohort",
    "write_cohort",
]
