"""Atomic result persistence (CSV rows, JSON manifests)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

DET_COLUMNS = ["detector", "n", "m", "snr_sb_db", "snr_se_db", "theta",
               "alpha", "beta", "ci_alpha", "ci_beta", "d_forward"]


def atomic_write_text(path, text: str) -> Path:
    """Write via a temp file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def rows_to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_det_csv(curve, path) -> Path:
    return atomic_write_text(path, rows_to_csv(curve.rows(), DET_COLUMNS))


def write_record_csv(record: dict, path) -> Path:
    return atomic_write_text(path, rows_to_csv([record]))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(obj, path) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")
