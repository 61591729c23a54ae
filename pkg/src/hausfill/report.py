"""Deterministic serialisation: JSON reports and CSV tables."""

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np


def clean(obj):
    """Plain JSON-ready data: numpy scalars/arrays unwrapped, fractions and
    non-finite floats turned into strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def render_report(command, config, result):
    doc = {"command": command, "config": config, "status": "ok", "result": result}
    return json.dumps(clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_error(command, config, exc):
    doc = {"command": command, "config": config, "status": "error",
           "error": {"code": getattr(exc, "code", "internal"), "message": str(exc)}}
    return json.dumps(clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
