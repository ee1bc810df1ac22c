"""Deterministic serialization: JSON, CSV and raw field snapshots.

Floats are written with repr (shortest round-trip form, locale independent),
NaN and infinities become null in JSON and empty cells in CSV. Files are
written to a temporary name and renamed, so a failed run leaves nothing behind.
"""
import csv
import io
import json
import math
import os

import numpy as np


def plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def json_text(obj):
    return json.dumps(plain(obj), indent=2, allow_nan=False) + "\n"


def format_cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return repr(x) if math.isfinite(x) else ""
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_atomic(path, data):
    """Write text or bytes to ``path`` via a temporary file in the same directory."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    tmp = f"{path}.tmp{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    kw = {} if mode == "wb" else dict(encoding="utf-8", newline="")
    with open(tmp, mode, **kw) as fh:
        fh.write(data)
    os.replace(tmp, path)


def field_snapshot(values, meta):
    """Raw little-endian complex128 bytes (row-major, radial index first) and a JSON sidecar."""
    a = np.ascontiguousarray(values, dtype="<c16")
    side = dict(meta, shape=list(a.shape), dtype="complex128", byteorder="little", order="C")
    return a.tobytes(), json_text(side)


def read_field_snapshot(bin_path, json_path):
    with open(json_path, encoding="utf-8") as fh:
        meta = json.load(fh)
    a = np.fromfile(bin_path, dtype="<c16").reshape(meta["shape"])
    return a, meta
