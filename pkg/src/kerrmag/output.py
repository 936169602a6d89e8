"""CSV / JSON writers. Every file carries the resolved run configuration."""

from __future__ import annotations

import csv
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np


def to_plain(obj):
    """Recursively convert results into JSON-serialisable data."""
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag, "abs": abs(obj), "phase": math.atan2(obj.imag, obj.real)}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [to_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return {k: to_plain(getattr(obj, k)) for k in obj.__dataclass_fields__}
    return obj


def dumps(payload: dict) -> str:
    return json.dumps(to_plain(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, payload: dict, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps({"config": config, **payload}))
    return path


def write_csv(path: Path, header: list[str], rows, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write("# config: " + json.dumps(to_plain(config), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path
