"""
Shared plumbing for command handlers
"""

import json
import os
import sys
from typing import Any, Dict, List

from pydantic import ValidationError

import artifacts
from config import get_settings
from errors import InvalidInput


def info(message: str):
    print(f"[INFO] {message}", file=sys.stderr)


def warn(message: str):
    print(f"[WARNING] {message}", file=sys.stderr)


def metadata(args, **extra) -> Dict[str, Any]:
    """seed, parallelism and command always travel with an artifact"""
    settings = get_settings()
    meta = {"command": args.command, "seed": settings.seed, "parallelism": settings.parallelism,
            "tolerance": settings.tolerance}
    meta.update(extra)
    return meta


def load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InvalidInput(f"input file not found: {path}")
    except json.JSONDecodeError as e:
        raise InvalidInput(f"{path} is not valid JSON: {e}")


def parse_model(adapter_or_model, obj: Any, what: str):
    """Validate against a pydantic model or TypeAdapter, mapping schema errors to InvalidInput"""
    try:
        if hasattr(adapter_or_model, "validate_python"):
            return adapter_or_model.validate_python(obj)
        return adapter_or_model.model_validate(obj)
    except ValidationError as e:
        raise InvalidInput(f"{what} does not match its schema: {e.errors()[0]['msg']}",
                           witness=[err["loc"] for err in e.errors()])


def emit(bundle: List[Dict[str, Any]], output: str = None) -> List[str]:
    """
    Write `<output>.csv` for the first table (`<output>-<type>.csv` for further
    ones) and `<output>.json` with every artifact; without an output path the
    JSON bundle goes to stdout.
    """
    if not output:
        sys.stdout.write(artifacts.to_json({"artifacts": bundle}))
        return []
    # bare names land in the configured output directory
    if not os.path.dirname(output):
        output = os.path.join(get_settings().output_dir, output)
    written = []
    first = True
    for item in bundle:
        if "columns" not in item["data"]:
            continue
        path = f"{output}.csv" if first else f"{output}-{item['type']}.csv"
        written.append(artifacts.write_csv(item, path))
        first = False
    written.append(artifacts.write_json({"artifacts": bundle}, f"{output}.json"))
    return written
