import hashlib
import logging
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import joblib
import numpy as np
import pandas as pd
import pydantic
import scipy
import sklearn

from sigsurv import __version__
from sigsurv.common.clients.artifact_store import ArtifactStore
from sigsurv.common.config.run_config import RunConfig
from sigsurv.common.exceptions import LeakageError, StageError

logger = logging.getLogger(__name__)

MANIFEST_KEY = "manifest.json"
FORMAT_VERSION = 1

STAGES = ("ingest", "embed", "compress", "signify", "fit", "evaluate")
# steps that must only ever see training patients
FITTING_STEPS = ("fit_pca", "grid_search_lambda", "fit_cox_lasso")

STATUS_DONE = "done"
STATUS_SKIPPED = "skipped"
STATUS_FAILED = "failed"
STATUS_PENDING = "pending"
ARTIFACT_CURRENT = "current"
ARTIFACT_STALE = "stale"


def ids_digest(patient_ids: Iterable[str]) -> str:
    """Order-independent SHA-256 of a set of patient ids."""
    joined = "\n".join(sorted(set(patient_ids)))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def library_versions() -> dict[str, str]:
    return {
        "sigsurv": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
        "joblib": joblib.__version__,
    }


class RunManifest:
    """
    Record of one run: configuration hash, seed, library versions, stage status, the SHA-256
    of every input and artifact, and the patient-id lineage of each fitting step.

    The manifest holds no timestamps, so identical runs write identical manifests.
    """

    def __init__(self, store: ArtifactStore, cfg: RunConfig, feature_kind: str):
        self._store = store
        self._previous = self._load_previous()
        self.data: dict[str, Any] = {
            "format_version": FORMAT_VERSION,
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "feature_kind": feature_kind,
            "versions": library_versions(),
            "stages": {stage: STATUS_PENDING for stage in STAGES},
            "inputs": {},
            "artifacts": {},
            "lineage": {},
            "leakage_check": None,
        }

    @classmethod
    def resume(cls, store: ArtifactStore, cfg: RunConfig, feature_kind: str) -> "RunManifest":
        """
        Continue the manifest already in ``store`` when it belongs to the same configuration
        and feature kind, so that stages run one at a time accumulate one record.
        """
        manifest = cls(store, cfg, feature_kind)
        previous = manifest._previous
        if previous.get("config_hash") == manifest.config_hash and previous.get("feature_kind") == feature_kind:
            for section in ("stages", "inputs", "artifacts", "lineage"):
                manifest.data[section].update(previous.get(section, {}))
            logger.info(f"Resuming manifest of run {manifest.config_hash[:12]}")
        elif previous:
            logger.warning("Existing manifest belongs to another configuration; starting a new one")
        return manifest

    def _load_previous(self) -> dict[str, Any]:
        if not self._store.exists(MANIFEST_KEY):
            return {}
        try:
            return self._store.load_json(MANIFEST_KEY)
        except ValueError:
            logger.warning(f"Ignoring unreadable manifest {self._store.path(MANIFEST_KEY)}")
            return {}

    @property
    def config_hash(self) -> str:
        return str(self.data["config_hash"])

    def record_input(self, name: str, path: Path) -> None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.data["inputs"][name] = {"file": Path(path).name, "sha256": digest}

    def record_artifact(self, key: str, stage: str) -> None:
        self.data["artifacts"][key] = {"stage": stage, "sha256": self._store.sha256(key), "status": ARTIFACT_CURRENT}

    def record_lineage(self, step: str, patient_ids: Iterable[str]) -> None:
        ids = set(patient_ids)
        self.data["lineage"][step] = {"n_patients": len(ids), "ids_sha256": ids_digest(ids)}

    def check_leakage(self, train_ids: Iterable[str], test_ids: Iterable[str]) -> None:
        """
        Verify that every fitting step saw exactly the training patients and that those are
        disjoint from the held-out ones.

        Raises:
            LeakageError: If a step is unrecorded, saw other patients, or train and test overlap.
        """
        train, held_out = set(train_ids), set(test_ids)
        overlap = sorted(train & held_out)
        if overlap:
            raise LeakageError(f"{len(overlap)} patients are both train and test: {overlap[:5]}")

        expected = ids_digest(train)
        for step in FITTING_STEPS:
            entry = self.data["lineage"].get(step)
            if entry is None:
                raise LeakageError(f"no lineage recorded for '{step}'")
            if entry["ids_sha256"] != expected:
                raise LeakageError(
                    f"'{step}' was fitted on {entry['n_patients']} patients other than the training split"
                )

        self.data["leakage_check"] = {"test_ids_sha256": ids_digest(held_out), "passed": True}
        logger.info(f"Leakage check passed for {', '.join(FITTING_STEPS)}")

    def mark_skipped(self, stage: str) -> None:
        self.data["stages"][stage] = STATUS_SKIPPED

    def mark_failed(self, stage: str) -> None:
        """Flag the failed stage and every artifact of it or a later stage as stale."""
        self.data["stages"][stage] = STATUS_FAILED
        downstream = set(STAGES[STAGES.index(stage):])
        for later in downstream - {stage}:
            self.data["stages"][later] = STATUS_PENDING
        for entry in self.data["artifacts"].values():
            if entry["stage"] in downstream:
                entry["status"] = ARTIFACT_STALE

        for key, entry in self._previous.get("artifacts", {}).items():
            if key not in self.data["artifacts"] and entry.get("stage") in downstream and self._store.exists(key):
                self.data["artifacts"][key] = {**entry, "status": ARTIFACT_STALE}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """
        Run a block as pipeline stage ``name``.

        Any exception aborts the run: it is logged, downstream artifacts are marked stale,
        the manifest is written and a StageError tagged with the stage name is raised.
        """
        logger.info(f"Stage '{name}' started")
        try:
            yield
        except StageError:
            raise
        except Exception as err:
            logger.critical(f"Stage '{name}' failed: {type(err).__name__}: {err}")
            self.mark_failed(name)
            self.write()
            raise StageError(name, err) from err
        if self.data["stages"][name] != STATUS_SKIPPED:
            self.data["stages"][name] = STATUS_DONE
        self.write()
        logger.info(f"Stage '{name}' finished")

    def write(self) -> Path:
        return self._store.save_dict_as_json(self.data, MANIFEST_KEY)

    def digest(self) -> str:
        """SHA-256 of the written manifest."""
        return self._store.sha256(MANIFEST_KEY)
