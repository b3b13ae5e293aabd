"""Readers for the simulator's artifact files.

Every loader validates presence and shape before any figure code runs,
and reports problems as SchemaError naming the offending column or key.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path


class SchemaError(Exception):
    """An artifact file is missing, empty, or lacks a documented field."""


def read_table(path: Path | str, numeric: tuple[str, ...],
               keep: tuple[str, ...] = ()) -> list[dict]:
    """Load a CSV artifact, parsing the named numeric columns.

    Rows where a numeric cell is empty are dropped (sweep error rows
    leave their value columns blank); if that leaves nothing, the file
    does not support the figure and that is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"missing artifact: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (*numeric, *keep):
            if col not in header:
                raise SchemaError(f"{path.name}: missing column {col!r}")
        raw = list(reader)
    rows = []
    for line in raw:
        if any(line[col] == "" for col in numeric):
            continue
        row = {col: line[col] for col in keep}
        try:
            for col in numeric:
                row[col] = float(line[col])
        except ValueError as exc:
            raise SchemaError(f"{path.name}: column {col!r}: {exc}") from exc
        rows.append(row)
    if not rows:
        raise SchemaError(f"{path.name}: no usable data rows")
    return rows


def read_tpdm(path: Path | str) -> dict:
    """Load a two-photon matrix artifact and check its documented keys."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"missing artifact: {path}")
    try:
        blob = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path.name}: not valid JSON: {exc}") from exc
    for key in ("basis", "real", "imag"):
        if key not in blob:
            raise SchemaError(f"{path.name}: missing key {key!r}")
    basis = blob["basis"]
    if len(basis) != 4:
        raise SchemaError(f"{path.name}: basis must have 4 entries")
    for key in ("real", "imag"):
        part = blob[key]
        if len(part) != 4 or any(len(row) != 4 for row in part):
            raise SchemaError(f"{path.name}: key {key!r} must be 4x4")
    return blob
