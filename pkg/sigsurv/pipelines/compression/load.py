import hashlib
import json
import logging
from pathlib import Path
from typing import Any

from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.pipelines.compression.transform import CompressionMap

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def payload_checksum(payload: dict[str, Any]) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def compression_map_payload(compression_map: CompressionMap) -> dict[str, Any]:
    return {
        "mean": compression_map.mean.tolist(),
        "components": compression_map.components.tolist(),
        "explained_variance": compression_map.explained_variance.tolist(),
        "whiten": compression_map.whiten,
    }


def write_compression_map(compression_map: CompressionMap, store: ArtifactStore, key: str) -> Path:
    """
    Save a map as JSON with a header of ``format_version``, ``p``, ``p_bar`` and a SHA-256
    checksum of the numeric payload.
    """
    payload = compression_map_payload(compression_map)
    document = {
        "format_version": FORMAT_VERSION,
        "p": compression_map.p,
        "p_bar": compression_map.p_bar,
        "checksum": payload_checksum(payload),
        **payload,
    }
    return store.save_dict_as_json(document, key)
