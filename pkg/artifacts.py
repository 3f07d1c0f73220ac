"""
Artifact tables and records
Plot-ready dicts plus deterministic CSV/JSON writers
"""

import csv
import json
import math
import os
from typing import Any, Dict, List, Optional, Sequence


def format_float(value: Any) -> Any:
    """17 significant digits, so a reader recovers the exact binary64"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return value
    try:
        x = float(value)
    except (TypeError, ValueError):
        return value
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def table(
    kind: str,
    columns: Sequence[str],
    rows: List[Sequence[Any]],
    title: str,
    description: str,
    metadata: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """
    Build a table artifact.

    Returns:
        Dict with:
            - type: artifact kind (e.g. "profile", "spectrum")
            - data: {"columns": [...], "rows": [[...], ...]}
            - title / description
            - metadata: seed, parallelism, command, ...
    """
    return {
        "type": kind,
        "data": {"columns": list(columns), "rows": [list(r) for r in rows]},
        "title": title,
        "description": description,
        "metadata": dict(metadata or {}),
    }


def record(kind: str, values: Dict[str, Any], title: str, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Single JSON record artifact"""
    return {"type": kind, "data": values, "title": title, "metadata": dict(metadata or {})}


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    if hasattr(obj, "model_dump"):
        return _jsonable(obj.model_dump())
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return format_float(obj)
        return float(format_float(obj))
    return obj


def to_json(artifact: Dict[str, Any]) -> str:
    return json.dumps(_jsonable(artifact), sort_keys=True, indent=2) + "\n"


def write_json(artifact: Dict[str, Any], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(artifact))
    return path


def write_csv(artifact: Dict[str, Any], path: str) -> str:
    """Write a table artifact's rows; metadata goes to a sibling JSON"""
    _ensure_parent(path)
    data = artifact["data"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data["columns"])
        for row in data["rows"]:
            writer.writerow([format_float(v) for v in row])
    return path


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
