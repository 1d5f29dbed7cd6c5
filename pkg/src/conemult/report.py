"""Deterministic report writing: JSON summaries, CSV details, atomic files.

Summaries are byte-identical across reruns with the same config and seed:
floats are serialized with repr, keys are sorted, and volatile metadata
(timestamps, host) goes to a separate run_meta.json that is excluded from
determinism comparisons.
"""

import csv
import json
import os
import tempfile
import time


SCHEMA_VERSION = "conemult-report-1"


def _sanitize(obj):
    import math

    import numpy as np
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def atomic_write_text(path, text):
    """Write-temp-then-rename so partial files never appear."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_summary(path, payload):
    body = dict(payload)
    body["schema"] = SCHEMA_VERSION
    text = json.dumps(_sanitize(body), sort_keys=True, indent=1,
                      ensure_ascii=True)
    atomic_write_text(path, text + "\n")


def write_run_meta(path, extra=None):
    meta = {"written_at_unix": time.time()}
    if extra:
        meta.update(extra)
    atomic_write_text(path, json.dumps(_sanitize(meta), sort_keys=True,
                                       indent=1) + "\n")


def write_csv(path, header, rows):
    """Plot-ready CSV: one observable per file, repr-formatted floats."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(repr(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv_columns(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for k, v in row.items():
                cols[k].append(v)
    return cols
