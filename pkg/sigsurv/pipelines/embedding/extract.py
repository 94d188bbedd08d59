import logging
from pathlib import Path

import numpy as np

from sigsurv.common.exceptions import IngestError
from sigsurv.pipelines.embedding.sif import WordEmbeddingTable
from sigsurv.pipelines.ingest.extract import DELIMITER, ParseResult, check_token, numbered_lines, parse_float

logger = logging.getLogger(__name__)


def load_word_embeddings(path: Path | str) -> WordEmbeddingTable:
    """
    Read a word-embedding table: a first line holding the integer ``p``, then one
    ``token,v_1,...,v_p`` line per token.

    Raises:
        IngestError: On a bad header, dimension mismatch, duplicate or empty token.
    """
    path = Path(path)
    lines = numbered_lines(path)
    header = next(lines, None)
    if header is None:
        raise IngestError("file is empty", path=path)
    try:
        p = int(header[1].strip())
    except ValueError as e:
        raise IngestError(f"header must be the integer dimension p, got '{header[1]}'",
                          path=path, line_number=header[0]) from e

    result = ParseResult()
    tokens: list[str] = []
    seen: set[str] = set()
    for line_number, line in lines:
        fields = line.split(DELIMITER)
        try:
            if len(fields) - 1 != p:
                raise ValueError(f"dimension mismatch: expected {p} values, got {len(fields) - 1}")
            token = check_token(fields[0])
            if token in seen:
                raise ValueError(f"duplicate token '{token}'")
            result.rows.append([parse_float(x, f"v_{k + 1}") for k, x in enumerate(fields[1:])])
            tokens.append(token)
            seen.add(token)
        except ValueError as err:
            result.failures.append((line_number, str(err)))

    result.raise_on_failure(path, "word embeddings")
    return WordEmbeddingTable.from_rows(tokens, np.array(result.rows, dtype=float).reshape(len(tokens), p))


def load_frequencies(path: Path | str) -> dict[str, float]:
    """Read ``token,corpus_frequency`` lines; frequencies must lie in (0, 1]."""
    path = Path(path)
    result = ParseResult()
    freqs: dict[str, float] = {}
    for line_number, line in numbered_lines(path):
        fields = line.split(DELIMITER)
        try:
            if len(fields) != 2:
                raise ValueError(f"expected 2 fields, got {len(fields)}")
            check_token(fields[0])
            value = parse_float(fields[1], "corpus_frequency")
            if not 0 < value <= 1:
                raise ValueError(f"frequency must lie in (0, 1], got {value}")
            if fields[0] in freqs:
                raise ValueError(f"duplicate token '{fields[0]}'")
            freqs[fields[0]] = value
            result.rows.append(fields[0])
        except ValueError as err:
            result.failures.append((line_number, str(err)))

    result.raise_on_failure(path, "frequencies")
    return freqs
