import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from sigsurv.common.config.settings import settings
from sigsurv.common.exceptions import ConfigError
from sigsurv.common.utils.load_yaml import load_yaml
from sigsurv.pipelines.coxmodel.lasso import CoxSolverConfig
from sigsurv.pipelines.embedding.sif import SifConfig
from sigsurv.pipelines.ingest.schemas import InputMode

logger = logging.getLogger(__name__)

PATH_FIELDS = ("embeddings_path", "outcomes_path", "word_embeddings_path", "frequencies_path")
# fields that never change results, left out of the config hash
UNHASHED_FIELDS = (*PATH_FIELDS, "out_dir", "n_jobs")


class LambdaGridConfig(BaseModel):
    """
    Penalty grid of the cross-validated search.

    ``log`` gives ``num`` geometrically spaced values over ``[start, stop]``; ``linear``
    gives ``start, start + step, ...`` up to ``stop``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["log", "linear"] = "log"
    start: float = Field(1e-3, gt=0)
    stop: float = Field(10.0, gt=0)
    num: int = Field(50, ge=1)
    step: float = Field(1e-3, gt=0)

    @model_validator(mode="after")
    def check_range(self) -> "LambdaGridConfig":
        if self.stop < self.start:
            raise ValueError(f"stop={self.stop} must not be below start={self.start}")
        return self

    def values(self) -> np.ndarray:
        if self.kind == "log":
            return np.geomspace(self.start, self.stop, self.num) if self.num > 1 else np.array([self.start])
        count = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        return self.start + self.step * np.arange(count)


class RunConfig(BaseModel):
    """
    Configuration of one end-to-end run. Unknown keys are rejected.

    Relative input paths in a YAML document are resolved against the document's directory.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    embeddings_path: Path | None = None
    outcomes_path: Path | None = None
    input_mode: InputMode = InputMode.VECTOR
    word_embeddings_path: Path | None = None
    frequencies_path: Path | None = None
    out_dir: Path = Field(default_factory=lambda: settings.runtime.out_dir)
    seed: int = 0

    mask_horizon_days: float = Field(100.0, ge=0)
    test_fraction: float = Field(0.5, gt=0, lt=1)
    n_test_folds: int = Field(10, ge=2)
    cv_folds: int = Field(5, ge=2)

    sif: SifConfig = Field(default_factory=SifConfig)
    p_bar: int = Field(25, ge=1)
    whiten: bool = False
    refit_pca_per_fold: bool = False

    signature_level: int = Field(3, ge=1)
    time_scale: Literal["unit_interval", "days"] = "unit_interval"
    drop_time_words: bool = False
    single_report_epsilon: float = Field(1e-3, gt=0)

    cox: CoxSolverConfig = Field(default_factory=CoxSolverConfig)
    lambda_grid: LambdaGridConfig = Field(default_factory=LambdaGridConfig)

    tau1: float = Field(0.0, ge=0)
    tau2: float = Field(3652.5, gt=0)
    ibs_horizons: tuple[float, ...] = (1095.75, 1826.25, 3652.5)
    auc_weighting: Literal["none", "ipcw"] = "none"
    mean_auc_weights: Literal["survival", "censoring"] = "survival"
    report_counts: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 8, 10, 12)

    n_jobs: int = Field(default_factory=lambda: settings.runtime.n_jobs)

    @field_validator("report_counts")
    @classmethod
    def check_report_counts(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if any(k < 1 for k in v):
            raise ValueError("report_counts must be positive")
        return tuple(sorted(set(v)))

    @model_validator(mode="after")
    def check_window(self) -> "RunConfig":
        if self.tau1 >= self.tau2:
            raise ValueError(f"tau1={self.tau1} must be below tau2={self.tau2}")
        if any(h <= self.tau1 for h in self.ibs_horizons):
            raise ValueError("every IBS horizon must lie after tau1")
        return self

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every result-affecting field."""
        payload = self.model_dump(mode="json", exclude=set(UNHASHED_FIELDS))
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_validation_error(err: ValidationError) -> str:
    return "; ".join(f"{'.'.join(map(str, e['loc'])) or '<root>'}: {e['msg']}" for e in err.errors(include_url=False))


def build_run_config(data: dict[str, Any], **overrides: Any) -> RunConfig:
    """Validate a mapping plus non-None overrides into a RunConfig."""
    merged = {**data, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as err:
        raise ConfigError(f"invalid run configuration: {_format_validation_error(err)}") from err


def load_run_config(path: Path | str | None = None, **overrides: Any) -> RunConfig:
    """
    Read a run configuration document; ``overrides`` (e.g. CLI ``seed``/``out_dir``) win.

    Args:
        path (Path | str | None): YAML document; ``None`` gives every default.
        **overrides: Field values that replace the document's, ignored when ``None``.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        ConfigError: On YAML errors, unknown keys or invalid values.
    """
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        data = load_yaml(path)
        for key in PATH_FIELDS:
            value = data.get(key)
            if isinstance(value, str) and not Path(value).is_absolute():
                data[key] = str(path.parent / value)

    cfg = build_run_config(data, **overrides)
    logger.info(f"Loaded run configuration (hash {cfg.config_hash()[:12]}, seed {cfg.seed})")
    return cfg
