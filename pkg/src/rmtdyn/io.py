"""Deterministic CSV / JSON artifact writers.

Every file starts with the SHA-256 hash of the resolved run configuration
(canonical JSON, sorted keys).  Keys that only affect where or how fast a
run executes (thread count, output paths) are excluded from the hash, so
identical science gives identical bytes.
"""
import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["NON_SCIENTIFIC_KEYS", "canonical_config", "config_hash", "write_csv", "write_json",
           "read_csv"]

NON_SCIENTIFIC_KEYS = frozenset({"threads", "out", "output", "output_path", "assert_checks"})


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, Path):
        return str(value)
    return value


def canonical_config(config):
    return {k: _plain(v) for k, v in sorted(config.items()) if k not in NON_SCIENTIFIC_KEYS}


def config_hash(config):
    blob = json.dumps(canonical_config(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows, config):
    """Write rows after ``# config-hash`` and ``# config`` comment lines."""
    buf = io.StringIO()
    buf.write(f"# config-hash: {config_hash(config)}\n")
    buf.write("# config: " + json.dumps(canonical_config(config), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def write_json(path, payload, config):
    doc = {"config_hash": config_hash(config), "config": canonical_config(config),
           "result": _plain(payload)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_csv(path):
    """Return ``(config_hash, header, rows)`` with numeric cells as floats."""
    digest, rows, header = None, [], None
    with open(path) as fh:
        for line in fh:
            if line.startswith("# config-hash:"):
                digest = line.split(":", 1)[1].strip()
            elif line.startswith("#"):
                continue
            elif header is None:
                header = next(csv.reader([line]))
            else:
                cells = next(csv.reader([line]))
                rows.append([_num(c) for c in cells])
    return digest, header, rows


def _num(cell):
    try:
        return float(cell)
    except ValueError:
        return cell
