import logging
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.decomposition import TruncatedSVD

from sigsurv.common.exceptions import EmbeddingError
from sigsurv.pipelines.ingest.schemas import Cohort, InputMode, PatientRecord

logger = logging.getLogger(__name__)


class SifConfig(BaseModel):
    """
    Smooth Inverse Frequency settings.

    Attributes:
        a (float): Smoothing parameter of the weight ``a / (f(w) + a)``.
        remove_first_pc (bool): Subtract the projection on the first singular vector of all
            report embeddings of the cohort (the common component of the original method).
        count_mode (str): ``occurrences`` weights each token by its count and divides by the
            number of occurrences; ``unique`` counts each distinct token once.
        oov_policy (str): ``skip`` drops tokens missing from the table or the frequency
            list with a warning; ``fail`` raises.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: float = Field(1e-3, gt=0)
    remove_first_pc: bool = False
    count_mode: Literal["occurrences", "unique"] = "occurrences"
    oov_policy: Literal["skip", "fail"] = "skip"


@dataclass(frozen=True)
class WordEmbeddingTable:
    """Read-only lookup from token to word vector."""

    index: Mapping[str, int]
    vectors: np.ndarray

    @classmethod
    def from_rows(cls, tokens: Sequence[str], vectors: np.ndarray) -> "WordEmbeddingTable":
        matrix = np.array(vectors, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise ValueError(f"expected a ({len(tokens)}, p) matrix, got shape {matrix.shape}")
        matrix.setflags(write=False)
        return cls(index={tok: i for i, tok in enumerate(tokens)}, vectors=matrix)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __contains__(self, token: object) -> bool:
        return token in self.index

    def __getitem__(self, token: str) -> np.ndarray:
        return self.vectors[self.index[token]]


def sif_weight(frequency: float, a: float) -> float:
    return a / (frequency + a)


def sif_embed(
    tokens: Sequence[tuple[str, int]],
    table: WordEmbeddingTable,
    freqs: Mapping[str, float],
    cfg: SifConfig | None = None,
) -> np.ndarray:
    """
    Sentence embedding of one report.

    ``v_s = (1/|s|) * sum_{w in s} a / (f(w) + a) * v_w`` where, in ``occurrences`` mode, the
    sum runs over token occurrences and ``|s|`` is the number of occurrences.

    Args:
        tokens (Sequence[tuple[str, int]]): Bag of (token, count) pairs.
        table (WordEmbeddingTable): Word vectors.
        freqs (Mapping[str, float]): Corpus frequency of each token, in (0, 1].
        cfg (SifConfig | None): Settings; defaults to ``SifConfig()``.

    Returns:
        np.ndarray: Vector of dimension ``table.dim``.

    Raises:
        EmbeddingError: If a token is out of vocabulary under ``oov_policy="fail"``, or the
            report has no token left after filtering.
    """
    cfg = cfg or SifConfig()

    counts: Counter[str] = Counter()
    for token, count in tokens:
        counts[token] += count

    missing = [tok for tok in counts if tok not in table or tok not in freqs]
    if missing:
        if cfg.oov_policy == "fail":
            raise EmbeddingError(f"tokens missing from the embedding table or frequency list: {missing[:10]}")
        logger.warning(f"Skipping {len(missing)} out-of-vocabulary tokens: {missing[:10]}")

    kept = [tok for tok in counts if tok in table and tok in freqs]
    if not kept:
        raise EmbeddingError("report is empty after vocabulary filtering")

    multiplicity = np.array([1.0 if cfg.count_mode == "unique" else float(counts[tok]) for tok in kept])
    weights = np.array([sif_weight(freqs[tok], cfg.a) for tok in kept])
    vectors = table.vectors[[table.index[tok] for tok in kept]]

    return (multiplicity * weights) @ vectors / multiplicity.sum()


def remove_common_component(embeddings: np.ndarray) -> np.ndarray:
    """Subtract each row's projection on the first right singular vector of the matrix."""
    svd = TruncatedSVD(n_components=1, n_iter=7, random_state=0)
    svd.fit(embeddings)
    pc = svd.components_
    return embeddings - embeddings @ pc.T @ pc


def embed_cohort(
    cohort: Cohort,
    table: WordEmbeddingTable,
    freqs: Mapping[str, float],
    cfg: SifConfig | None = None,
) -> Cohort:
    """
    Replace the token bag of every report with its SIF sentence embedding.

    Timestamps and ordering are unchanged. With ``remove_first_pc`` the common component is
    estimated over every report of this cohort.

    Raises:
        ValueError: If the cohort is not in token mode.
        EmbeddingError: Per-report failures, with patient id and report time attached.
    """
    cfg = cfg or SifConfig()
    if cohort.mode is not InputMode.TOKEN:
        raise ValueError("embed_cohort expects a token-mode cohort")

    vectors: list[np.ndarray] = []
    for patient in cohort:
        for report in patient.reports:
            assert report.tokens is not None
            try:
                vectors.append(sif_embed(report.tokens, table, freqs, cfg))
            except EmbeddingError as err:
                raise EmbeddingError(err.reason, patient_id=patient.patient_id, t=report.t) from err

    matrix = np.vstack(vectors) if vectors else np.empty((0, table.dim))
    if cfg.remove_first_pc:
        if matrix.shape[0] < 2:
            logger.warning("Fewer than 2 reports; skipping common-component removal")
        else:
            matrix = remove_common_component(matrix)

    patients: list[PatientRecord] = []
    row = 0
    for patient in cohort:
        reports = []
        for report in patient.reports:
            reports.append(report.with_embedding(matrix[row]))
            row += 1
        patients.append(patient.with_reports(reports))

    logger.info(f"Embedded {row} reports of {len(cohort)} patients into dimension {table.dim}")
    return cohort.with_patients(patients, embedding_dim=table.dim, mode=InputMode.VECTOR)
