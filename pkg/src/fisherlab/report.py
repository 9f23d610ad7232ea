"""Report documents and their JSON / CSV serialisation.

Floats are rounded to 12 significant digits and written in shortest
round-trip form; non-finite values become ``null``.  Key order is fixed
by construction, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from . import __version__
from .core import VerificationReport

SCHEMA_VERSION = 1
SIG_DIGITS = 12


def round_float(x: float) -> float | None:
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}") + 0.0


def normalize(obj):
    """Recursively convert to JSON-ready builtins with rounded floats."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_float(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def build_document(command: str, config_lines: list[str], report: VerificationReport,
                   results: dict, timing: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "fisherlab", "version": __version__},
        "command": command,
        "config": config_lines,
        "pass": report.passed,
        "checks": [e.to_dict() for e in report.entries],
        "results": results,
    }
    if timing is not None:
        doc["timing"] = timing
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(normalize(doc), indent=2, allow_nan=False) + "\n"


def fmt_float(x) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def states_csv(states) -> str:
    """Columns x, psi_0, psi_1, ... on the shared grid."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", *[f"psi_{s.index}" for s in states]])
    cols = [states[0].x, *[s.psi for s in states]]
    for row in zip(*cols):
        w.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


SCAN_COLUMNS = ("n", "lambda_k", "alpha_n", "I_direct", "moment_k")


class ScanWriter:
    """Writes scan rows as they arrive so a failure leaves a usable partial file."""

    def __init__(self, stream):
        self.stream = stream
        self.writer = csv.writer(stream, lineterminator="\n")
        self.writer.writerow(SCAN_COLUMNS)

    def row(self, n: int, point) -> None:
        self.writer.writerow([n, fmt_float(point.lambda_k), fmt_float(point.alpha), fmt_float(point.fisher),
                              fmt_float(point.moment_k)])
        self.stream.flush()

    def failure(self, n: int, lambda_k: float | None) -> None:
        lam = "" if lambda_k is None else fmt_float(lambda_k)
        self.writer.writerow([n, lam, "FAILED", "FAILED", "FAILED"])
        self.stream.flush()
