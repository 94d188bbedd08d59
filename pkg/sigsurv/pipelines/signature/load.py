from pathlib import Path

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.pipelines.signature.features import FeatureMatrix


def write_feature_matrix(matrix: FeatureMatrix, store: ArtifactStore, key: str) -> Path:
    """Write a header row of word names, then ``patient_id,coefficients...`` per patient."""
    return store.save_df_as_table(matrix.to_frame(), key)


def read_feature_matrix(path: Path | str) -> FeatureMatrix:
    path = Path(path)
    df = ArtifactStore(path.parent).load_table(path.name, dtype={"patient_id": str})
    return FeatureMatrix.from_frame(df)
