import hashlib
import json

import numpy as np
import pandas as pd
import pytest

from sigsurv.common.clients.artifact_store import ArtifactStore


@pytest.fixture
def store(tmp_path):
    """Fixture providing a store rooted in a fresh temporary run directory."""
    return ArtifactStore(tmp_path / "run")


# ---- JSON tests ----


def test_save_dict_as_json_round_trip(store):
    data = {"b": 1, "a": [1.5, "x"], "nested": {"k": None}}

    path = store.save_dict_as_json(data, "folder/data.json")

    assert path == store.path("folder/data.json")
    assert json.loads(path.read_text(encoding="utf-8")) == data
    assert store.load_json("folder/data.json") == data


def test_load_json_missing_key_raises(store):
    with pytest.raises(FileNotFoundError):
        store.load_json("nope.json")


# ---- table tests ----


def test_save_df_as_table_keeps_floats_exact(store):
    values = np.array([0.1, 1 / 3, 1e-17, 123456.789])
    df = pd.DataFrame({"patient_id": ["a", "b", "c", "d"], "x": values})

    store.save_df_as_table(df, "table.csv")
    loaded = store.load_table("table.csv", dtype={"patient_id": str})

    pd.testing.assert_frame_equal(loaded, df)
    np.testing.assert_array_equal(loaded["x"].to_numpy(), values)


def test_save_text_and_sha256(store):
    store.save_text("hello\n", "notes.txt")

    assert store.exists("notes.txt")
    assert store.sha256("notes.txt") == hashlib.sha256(b"hello\n").hexdigest()


# ---- delete tests ----


def test_delete_object_removes_file(store):
    store.save_text("x", "a.txt")

    store.delete_object("a.txt")

    assert not store.exists("a.txt")


def test_delete_missing_object_only_warns(store, caplog):
    store.delete_object("missing.txt")

    assert "Object not found for deletion" in caplog.text
