import json
from pathlib import Path

import numpy as np

from rmtdyn.io import canonical_config, config_hash, read_csv, write_csv, write_json


def test_hash_ignores_key_order_and_execution_keys():
    a = {"n": 5, "w": 0.5, "threads": 1, "out": "/tmp/a"}
    b = {"out": "/elsewhere", "threads": 8, "w": 0.5, "n": 5}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "w": 0.25})
    assert "threads" not in canonical_config(a)


def test_numpy_and_special_values_serialise():
    cfg = {"grid": np.array([1.0, 2.0]), "k": np.int64(3), "tol": float("inf"), "p": Path("x")}
    assert canonical_config(cfg) == {"grid": [1.0, 2.0], "k": 3, "tol": "inf", "p": "x"}
    assert len(config_hash(cfg)) == 64


def test_csv_round_trip(tmp_path):
    cfg = {"seed": 3, "w": 0.5}
    path = tmp_path / "t.csv"
    rows = [(0.1, 1.0 / 3.0, np.float64(2.5e-17)), (1, "tag", np.int32(4))]
    write_csv(path, ["a", "b", "c"], rows, cfg)
    lines = path.read_text().splitlines()
    assert lines[0] == f"# config-hash: {config_hash(cfg)}"
    assert lines[1].startswith("# config: ")
    digest, header, back = read_csv(path)
    assert digest == config_hash(cfg) and header == ["a", "b", "c"]
    # repr keeps every bit of a double
    assert back[0] == [0.1, 1.0 / 3.0, 2.5e-17]
    assert back[1] == [1.0, "tag", 4.0]


def test_json_document(tmp_path):
    cfg = {"seed": 1, "threads": 4}
    path = tmp_path / "r.json"
    write_json(path, {"value": np.float64(0.25), "flags": (True, False)}, cfg)
    doc = json.loads(path.read_text())
    assert doc["config_hash"] == config_hash(cfg)
    assert doc["config"] == {"seed": 1}
    assert doc["result"] == {"value": 0.25, "flags": [True, False]}


def test_writes_are_deterministic(tmp_path):
    cfg = {"b": 2, "a": 1}
    write_csv(tmp_path / "1.csv", ["x"], [(0.5,), (0.25,)], cfg)
    write_csv(tmp_path / "2.csv", ["x"], [(0.5,), (0.25,)], dict(reversed(list(cfg.items()))))
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "2.csv").read_bytes()
