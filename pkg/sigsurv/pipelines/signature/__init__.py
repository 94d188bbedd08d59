from sigsurv.pipelines.signature.features import FeatureMatrix, feature_names, signature_features
from sigsurv.pipelines.signature.load import read_feature_matrix, write_feature_matrix
from sigsurv.pipelines.signature.tensor import (
    AugmentedPath,
    SignatureTensor,
    augment_path,
    chen_product,
    count_coefficients,
    path_signature,
    segment_signature,
)

__all__ = [
    "AugmentedPath",
    "FeatureMatrix",
    "SignatureTensor",
    "augment_path",
    "chen_product",
    "count_coefficients",
    "feature_names",
    "path_signature",
    "read_feature_matrix",
    "segment_signature",
    "signature_features",
    "write_feature_matrix",
]
