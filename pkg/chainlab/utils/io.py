import csv
import hashlib
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel

from chainlab.core.errors import ConfigParse, MissingInput


# ============= READING =============

def read_text(path: Union[str, Path]) -> str:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"Input file not found: {path}", {"path": str(path)})
    return path.read_text(encoding="utf-8")


def read_json(path: Union[str, Path]) -> Any:
    text = read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParse(f"Malformed JSON in {path}: {e.msg}", {"path": str(path), "line": e.lineno})


def read_csv_rows(path: Union[str, Path]) -> List[List[str]]:
    text = read_text(path)
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ConfigParse(f"Empty CSV file: {path}", {"path": str(path)})
    return rows


def parse_float(cell: str, path: Union[str, Path]) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ConfigParse(f"Not a number in {path}: {cell!r}", {"path": str(path)})


def read_matrix_csv(path: Union[str, Path]) -> np.ndarray:
    rows = read_csv_rows(path)
    return np.array([[parse_float(c, path) for c in row] for row in rows])


def read_vector(path: Union[str, Path]) -> np.ndarray:
    """
    Per-point values from JSON (list or {"values": [...]}) or CSV.

    CSV takes the last column, skipping a header row that is not numeric.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = read_json(path)
        if isinstance(data, dict):
            data = data.get("values")
        if not isinstance(data, list):
            raise ConfigParse(f"Expected a list of values in {path}", {"path": str(path)})
        return np.array([_json_number(v, path) for v in data], dtype=float)

    rows = read_csv_rows(path)
    try:
        float(rows[0][-1])
    except ValueError:
        rows = rows[1:]
    return np.array([parse_float(row[-1], path) for row in rows])


def _json_number(value: Any, path: Union[str, Path]) -> float:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise ConfigParse(f"Not a number in {path}: {value!r}", {"path": str(path)})


def file_digest(path: Union[str, Path]) -> str:
    """sha256 of the raw bytes."""
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ============= WRITING =============

def format_float(value: float, digits: int = 17) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    return format(value, f".{digits}g")


def to_plain(obj: Any) -> Any:
    """Convert models, arrays and enums into JSON-ready python values."""
    if isinstance(obj, BaseModel):
        return {k: to_plain(getattr(obj, k)) for k in type(obj).model_fields}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_plain(v) for v in items]
    return obj


def dumps(obj: Any, digits: int = 17, indent: Optional[int] = 2) -> str:
    """Deterministic JSON with fixed-format floats; inf becomes "inf"."""
    return _encode(to_plain(obj), digits, indent, 0) + "\n"


def _encode(value: Any, digits: int, indent: Optional[int], level: int) -> str:
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value, digits)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)

    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, digits, indent, level + 1)}" for k, v in value.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_encode(v, digits, indent, level + 1) for v in value) + "]"
        items = [f"{pad}{_encode(v, digits, indent, level + 1)}" for v in value]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def rows_to_csv(header: List[str], rows: List[List[Any]], digits: int = 17) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v, digits).strip('"') if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def load_plain(data: Dict[str, Any]) -> Dict[str, Any]:
    """Inverse of the inf encoding on a parsed result document."""
    def restore(v):
        if v == "inf":
            return math.inf
        if v == "-inf":
            return -math.inf
        if isinstance(v, dict):
            return {k: restore(x) for k, x in v.items()}
        if isinstance(v, list):
            return [restore(x) for x in v]
        return v
    return restore(data)
