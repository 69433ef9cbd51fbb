"""JSON and CSV emission.

JSON floats use Python's shortest round-trip repr. Infinite values are
written as null with a sibling ``<key>_infinite`` marker ("+inf" / "-inf").
CSV floats use 17 significant digits.
"""

import csv
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

import numpy as np
from pydantic import BaseModel

from recovery.utils import format_float


def _infinite_marker(v: float) -> str:
    return "+inf" if v > 0 else "-inf"


def jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return jsonable(value.model_dump())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        out: Dict[str, Any] = {}
        for key, item in value.items():
            if isinstance(item, (float, np.floating)) and not math.isfinite(item):
                out[str(key)] = None
                if not math.isnan(item):
                    out[f"{key}_infinite"] = _infinite_marker(float(item))
                continue
            out[str(key)] = jsonable(item)
        return out
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(payload: Any) -> str:
    return json.dumps(jsonable(payload), indent=2, allow_nan=False)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else _cell(v) for v in row]
            )


def _cell(value: Any) -> str:
    if isinstance(value, Enum):
        return value.value
    return str(value)
