from pathlib import Path

import pytest
from pydantic import ValidationError

from sigsurv.common.config.settings import Settings


def test_settings_defaults(monkeypatch):
    for name in ("SIGSURV_LOG_LEVEL", "SIGSURV_N_JOBS", "SIGSURV_OUT_DIR"):
        monkeypatch.delenv(name, raising=False)

    settings = Settings()

    assert settings.logging.level == "INFO"
    assert settings.runtime.n_jobs == 1
    assert settings.runtime.out_dir == Path("sigsurv_runs")


def test_settings_read_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("SIGSURV_LOG_LEVEL", "debug")
    monkeypatch.setenv("SIGSURV_N_JOBS", "-1")
    monkeypatch.setenv("SIGSURV_OUT_DIR", str(tmp_path))

    settings = Settings()

    assert settings.logging.level == "DEBUG"
    assert settings.runtime.n_jobs == -1
    assert settings.runtime.out_dir == tmp_path


@pytest.mark.parametrize("value", ["0", "-2"])
def test_invalid_n_jobs(monkeypatch, value):
    monkeypatch.setenv("SIGSURV_N_JOBS", value)

    with pytest.raises(ValidationError, match="n_jobs"):
        Settings()
