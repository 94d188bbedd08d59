from sigsurv.pipelines.compression.extract import read_compression_map
from sigsurv.pipelines.compression.load import write_compression_map
from sigsurv.pipelines.compression.transform import CompressionMap, fit_pca, project, project_cohort

__all__ = ["CompressionMap", "fit_pca", "project", "project_cohort", "read_compression_map", "write_compression_map"]
