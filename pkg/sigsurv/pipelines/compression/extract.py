import logging
from pathlib import Path

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.common.exceptions import CompressionError
from sigsurv.pipelines.compression.load import FORMAT_VERSION, payload_checksum
from sigsurv.pipelines.compression.transform import CompressionMap

logger = logging.getLogger(__name__)


def read_compression_map(path: Path | str) -> CompressionMap:
    """
    Load a map written by ``write_compression_map``.

    Raises:
        CompressionError: On an unknown format version, a header that disagrees with the
            payload shapes, or a checksum mismatch.
    """
    path = Path(path)
    document = ArtifactStore(path.parent).load_json(path.name)

    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise CompressionError(f"{path}: unsupported format_version {version!r}")

    try:
        payload = {k: document[k] for k in ("mean", "components", "explained_variance", "whiten")}
        expected = document["checksum"]
        compression_map = CompressionMap(**payload)
    except KeyError as err:
        raise CompressionError(f"{path}: missing field {err}") from err

    if payload_checksum(payload) != expected:
        raise CompressionError(f"{path}: checksum mismatch, the file is corrupted or was edited")
    if (compression_map.p, compression_map.p_bar) != (document.get("p"), document.get("p_bar")):
        raise CompressionError(
            f"{path}: header declares p={document.get('p')}, p_bar={document.get('p_bar')} but payload has "
            f"p={compression_map.p}, p_bar={compression_map.p_bar}"
        )

    logger.info(f"Loaded compression map {path}: p={compression_map.p}, p_bar={compression_map.p_bar}")
    return compression_map
