import logging
from dataclasses import dataclass

import numpy as np
from sklearn.decomposition import PCA

from sigsurv.common.exceptions import CompressionError
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, PatientRecord

logger = logging.getLogger(__name__)

ORTHONORMAL_ATOL = 1e-10


@dataclass(frozen=True)
class CompressionMap:
    """
    Fitted linear map from p-dimensional embeddings to p_bar principal coordinates.

    Attributes:
        mean (np.ndarray): Training mean, shape (p,).
        components (np.ndarray): Orthonormal rows, shape (p_bar, p), by decreasing variance.
        explained_variance (np.ndarray): Variance along each row, non-increasing.
        whiten (bool): Divide projected coordinates by the square root of their variance.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    whiten: bool = False

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float)
        components = np.array(self.components, dtype=float)
        variance = np.array(self.explained_variance, dtype=float)

        if components.ndim != 2 or mean.shape != (components.shape[1],):
            raise CompressionError(f"Inconsistent shapes: mean {mean.shape}, components {components.shape}")
        if variance.shape != (components.shape[0],):
            raise CompressionError(f"explained_variance has shape {variance.shape}, expected ({components.shape[0]},)")
        if components.shape[0] > components.shape[1]:
            raise CompressionError(f"p_bar={components.shape[0]} exceeds p={components.shape[1]}")
        if np.any(np.diff(variance) > 0):
            raise CompressionError("explained_variance must be non-increasing")
        gram = components @ components.T
        if not np.allclose(gram, np.eye(components.shape[0]), rtol=0, atol=ORTHONORMAL_ATOL):
            raise CompressionError("component rows are not orthonormal")

        for arr in (mean, components, variance):
            arr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "explained_variance", variance)

    @property
    def p(self) -> int:
        return int(self.components.shape[1])

    @property
    def p_bar(self) -> int:
        return int(self.components.shape[0])


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip rows so that each row's largest-magnitude entry is positive."""
    pivots = components[np.arange(components.shape[0]), np.argmax(np.abs(components), axis=1)]
    return components * np.where(pivots < 0, -1.0, 1.0)[:, None]


def fit_pca(train_embeddings: np.ndarray, p_bar: int, whiten: bool = False) -> CompressionMap:
    """
    Fit the top-``p_bar`` principal components of the training embeddings.

    Uses a full (exact) SVD so the result is deterministic; each component's sign is fixed
    so that its largest-magnitude entry is positive.

    Args:
        train_embeddings (np.ndarray): Training vectors, shape (n, p).
        p_bar (int): Number of components kept.
        whiten (bool): Record that projections should be scaled to unit variance.

    Returns:
        CompressionMap: The fitted map.

    Raises:
        CompressionError: If there are fewer than ``p_bar + 1`` vectors, ``p_bar`` exceeds ``p``,
            or the data has zero variance.
    """
    X = np.asarray(train_embeddings, dtype=float)
    if X.ndim != 2:
        raise CompressionError(f"expected a 2-D matrix of embeddings, got shape {X.shape}")
    n, p = X.shape
    if p_bar < 1 or p_bar > p:
        raise CompressionError(f"p_bar must lie in [1, p={p}], got {p_bar}")
    if n < p_bar + 1:
        raise CompressionError(f"insufficient samples: {n} vectors for p_bar={p_bar} (need at least {p_bar + 1})")

    centered = X - X.mean(axis=0)
    if not np.any(centered):
        raise CompressionError("zero-variance input: every training embedding is identical")

    pca = PCA(n_components=p_bar, svd_solver="full")
    pca.fit(X)

    # exact-rank data leaves round-off in the trailing variances
    variance = np.maximum(pca.explained_variance_, 0.0)
    variance = np.minimum.accumulate(variance)

    compression_map = CompressionMap(
        mean=pca.mean_, components=_fix_signs(pca.components_), explained_variance=variance, whiten=whiten
    )
    captured = float(variance.sum() / np.var(X, axis=0, ddof=1).sum())
    logger.info(f"Fitted PCA on {n} vectors: p={p} -> p_bar={p_bar}, explained variance ratio={captured:.4f}")
    return compression_map


def project(compression_map: CompressionMap, v: np.ndarray) -> np.ndarray:
    """
    Map embeddings to principal coordinates, ``components @ (v - mean)``.

    Accepts one vector of shape (p,) or a matrix of shape (n, p).

    Raises:
        CompressionError: On a dimension mismatch.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != compression_map.p or v.ndim not in (1, 2):
        raise CompressionError(f"dimension mismatch: expected vectors of length {compression_map.p}, got {v.shape}")

    coords = (v - compression_map.mean) @ compression_map.components.T
    if compression_map.whiten:
        scale = np.sqrt(compression_map.explained_variance)
        coords = np.divide(coords, scale, out=np.zeros_like(coords), where=scale > 0)
    return coords


def project_cohort(compression_map: CompressionMap, cohort: Cohort) -> Cohort:
    """Project every report embedding of a vector-mode cohort; times and outcomes are kept."""
    if cohort.mode is not InputMode.VECTOR:
        raise CompressionError("project_cohort expects a vector-mode cohort")
    if cohort.embedding_dim != compression_map.p:
        raise CompressionError(
            f"dimension mismatch: cohort has p={cohort.embedding_dim}, map expects p={compression_map.p}"
        )

    patients: list[PatientRecord] = []
    for patient in cohort:
        coords = project(compression_map, patient.embedding_matrix())
        patients.append(patient.with_reports(r.with_embedding(c) for r, c in zip(patient.reports, coords, strict=True)))

    logger.info(f"Projected {cohort.n_reports} reports of {len(cohort)} patients to p_bar={compression_map.p_bar}")
    return cohort.with_patients(patients, embedding_dim=compression_map.p_bar)
