from sigsurv.pipelines.synthetic.generator import (
    SynthConfig,
    calibrate_censoring_hazard,
    generate_cohort,
    oracle_cindex,
)
from sigsurv.pipelines.synthetic.load import write_synthetic

__all__ = ["SynthConfig", "calibrate_censoring_hazard", "generate_cohort", "oracle_cindex", "write_synthetic"]
