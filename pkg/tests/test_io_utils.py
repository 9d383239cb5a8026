import json

import pandas as pd
import pytest

from config.run_config import build_run_config
from utils.errors import ConfigSchemaError
from utils.io_utils import (
    atomic_write_text,
    read_input,
    read_sidecar,
    sidecar_path,
    staged_directory,
    validate_document,
    write_csv,
    write_json,
)


def test_generator_set_schema():
    validate_document({"generators": [[["1", "1/2"], [0, [1.0, -1.0]]]]}, "generator_set")
    with pytest.raises(ConfigSchemaError) as info:
        validate_document({"generators": []}, "generator_set")
    assert "generators" in str(info.value)
    with pytest.raises(ConfigSchemaError):
        validate_document({"dim": 5, "generators": [[[1, 0], [0, 1]]]}, "generator_set")


def test_pappus_schema():
    validate_document({k: [0, "1/2", 1] for k in "pbqrts"}, "pappus_config")
    with pytest.raises(ConfigSchemaError):
        validate_document({k: [0, 0.5, 1] for k in "pbqrts"}, "pappus_config")


def test_run_config_schema_rejects_unknown_keys():
    with pytest.raises(ConfigSchemaError):
        validate_document({"command": "tile", "colour": "red"}, "run_config")


def test_read_input_validates(tmp_path):
    path = tmp_path / "gens.json"
    path.write_text(json.dumps({"generators": [[[2, 0], [0, 1]]]}), encoding="utf-8")
    assert read_input(path, "generator_set")["generators"][0][0] == [2, 0]
    path.write_text(json.dumps({"labels": ["a"]}), encoding="utf-8")
    with pytest.raises(ConfigSchemaError):
        read_input(path, "generator_set")


def test_atomic_write_leaves_no_temporaries(tmp_path):
    target = tmp_path / "nested" / "out.txt"
    atomic_write_text(target, "hello")
    atomic_write_text(target, "again")
    assert target.read_text(encoding="utf-8") == "again"
    assert sorted(p.name for p in target.parent.iterdir()) == ["out.txt"]


def test_staged_directory_creates_target_in_one_step(tmp_path):
    target = tmp_path / "out"
    with staged_directory(target) as stage:
        write_json(stage / "a.json", {"x": 1})
        assert not target.exists()
    assert sorted(p.name for p in target.iterdir()) == ["a.json"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]


def test_staged_directory_moves_into_existing_target(tmp_path):
    target = tmp_path / "out"
    target.mkdir()
    (target / "keep.txt").write_text("old", encoding="utf-8")
    with staged_directory(target) as stage:
        atomic_write_text(stage / "new.txt", "new")
    assert sorted(p.name for p in target.iterdir()) == ["keep.txt", "new.txt"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]


def test_staged_directory_discards_everything_on_failure(tmp_path):
    target = tmp_path / "out"
    with pytest.raises(OSError):
        with staged_directory(target) as stage:
            write_json(stage / "a.json", {"x": 1})
            raise OSError("disk full")
    assert list(tmp_path.iterdir()) == []


def test_artifacts_carry_their_config(tmp_path):
    cfg = build_run_config({"command": "tile", "output": str(tmp_path), "seed": 5})
    written = write_json(tmp_path / "tiles.json", {"tiles": []}, cfg)
    assert json.loads(written.read_text(encoding="utf-8")) == {"tiles": []}
    assert sidecar_path(written).name == "tiles.config.json"
    assert read_sidecar(written)["seed"] == 5
    assert read_sidecar(sidecar_path(written))["command"] == "tile"


def test_csv_keeps_full_precision(tmp_path):
    frame = pd.DataFrame({"x": [0.1 + 0.2, 1 / 3]})
    path = write_csv(tmp_path / "values.csv", frame)
    back = pd.read_csv(path, float_precision="round_trip")
    assert back["x"].tolist() == frame["x"].tolist()
    assert not sidecar_path(path).exists()
