"""Output file schemas, checked before any command exits."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import List, Optional, Sequence, Union

import jsonschema

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}

RUN_SCHEMA = {
    "type": "object",
    "required": ["seed", "mwr", "raw_mwr", "mmwr", "archive_size", "evaluations", "wall_clock_s"],
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "mwr": _NUMBER_LIST,
        "raw_mwr": _NUMBER_LIST,
        "mmwr": {"type": "number"},
        "archive_size": {"type": "integer", "minimum": 1},
        "evaluations": {"type": "integer", "minimum": 1},
        "wall_clock_s": {"type": "number", "minimum": 0},
    },
}

BATCH_SCHEMA = {
    "type": "object",
    "required": [
        "image", "T", "algorithm", "objective", "per_run",
        "mean_mwr", "mean_mmwr", "mean_wall_clock_s",
    ],
    "properties": {
        "image": {"type": "string"},
        "T": {"type": "integer", "minimum": 1},
        "algorithm": {"enum": ["mopso", "mssa"]},
        "objective": {"enum": ["j1", "j2", "j3", "j4"]},
        "per_run": {"type": "array", "items": RUN_SCHEMA, "minItems": 1},
        "mean_mwr": _NUMBER_LIST,
        "mean_raw_mwr": _NUMBER_LIST,
        "mean_mmwr": {"type": "number"},
        "mean_wall_clock_s": {"type": "number", "minimum": 0},
    },
}

BENCHMARK_SCHEMA = {
    "type": "object",
    "required": ["batches"],
    "properties": {"batches": {"type": "array", "items": BATCH_SCHEMA}},
}

TIMING_FIELDS = ("wall_clock_s", "mean_wall_clock_s")


def validate_benchmark(doc) -> None:
    jsonschema.validate(doc, BENCHMARK_SCHEMA)


def validate_benchmark_file(path: Union[str, Path]) -> None:
    validate_benchmark(json.loads(Path(path).read_text()))


def mask_timing(doc):
    """Copy of a report document with every timing field replaced by ``None``."""
    if isinstance(doc, dict):
        return {k: (None if k in TIMING_FIELDS else mask_timing(v)) for k, v in doc.items()}
    if isinstance(doc, list):
        return [mask_timing(v) for v in doc]
    return doc


def archive_header(m: int, d: int, k: int) -> List[str]:
    return (
        [f"t_{i}" for i in range(1, m + 1)]
        + [f"obj_{i}" for i in range(1, d + 1)]
        + [f"raw_{i}" for i in range(1, k + 1)]
        + ["source"]
    )


def validate_csv(
    path: Union[str, Path], header: Sequence[str], rows: Optional[int] = None
) -> None:
    """Header must match exactly and every row must have the header's width."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != list(header):
            raise ValueError(f"{path}: header {got} != expected {list(header)}")
        n = 0
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            n += 1
    if rows is not None and n != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {n}")
