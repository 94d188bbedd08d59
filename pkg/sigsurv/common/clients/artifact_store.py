import hashlib
import json
import logging
from pathlib import Path
from typing import Any, cast

import pandas as pd

logger = logging.getLogger(__name__)


class ArtifactStore:
    """
    Local-filesystem store for pipeline artifacts, addressed by relative keys.

    Every stage writes through one store so that the manifest can hash exactly the files
    a run produced. Writes are deterministic: JSON keeps insertion order and tables are
    written with shortest round-trip float formatting.
    """

    def __init__(self, root_dir: Path | str):
        self._root = Path(root_dir)
        self._root.mkdir(parents=True, exist_ok=True)

    @property
    def root(self) -> Path:
        return self._root

    def path(self, key: str) -> Path:
        return self._root / key

    def exists(self, key: str) -> bool:
        return self.path(key).is_file()

    def _prepare(self, key: str) -> Path:
        target = self.path(key)
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def load_json(self, key: str) -> dict[str, Any]:
        try:
            with open(self.path(key), encoding="utf-8") as f:
                return cast(dict[str, Any], json.load(f))
        except Exception as err:
            logger.error(f"Failed to load json from {self.path(key)}. Error: {err}")
            raise

    def save_dict_as_json(self, data: dict[str, Any], key: str) -> Path:
        target = self._prepare(key)
        try:
            with open(target, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2, allow_nan=True)
                f.write("\n")

            logger.info(f"Saved JSON to {target}")
            return target

        except Exception:
            logger.error(f"Failed to save JSON to {target}")
            raise

    def load_table(self, key: str, **read_kwargs: Any) -> pd.DataFrame:
        try:
            return pd.read_csv(self.path(key), float_precision="round_trip", **read_kwargs)
        except Exception as err:
            logger.error(f"Failed to load table from {self.path(key)}. Error: {err}")
            raise

    def save_df_as_table(self, df: pd.DataFrame, key: str) -> Path:
        target = self._prepare(key)
        try:
            df.to_csv(target, index=False, lineterminator="\n")
            logger.info(f"Saved table {df.shape} to {target}")
            return target

        except Exception:
            logger.error(f"Failed to save table to {target}")
            raise

    def save_text(self, text: str, key: str) -> Path:
        target = self._prepare(key)
        try:
            target.write_text(text, encoding="utf-8")
            logger.info(f"Saved text to {target}")
            return target

        except Exception:
            logger.error(f"Failed to save text to {target}")
            raise

    def delete_object(self, key: str) -> None:
        target = self.path(key)
        if not target.exists():
            logger.warning(f"Object not found for deletion: {target}")
            return

        target.unlink()
        logger.info(f"Deleted {target}")

    def sha256(self, key: str) -> str:
        digest = hashlib.sha256()
        with open(self.path(key), "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                digest.update(chunk)
        return digest.hexdigest()
