"""Trace CSV access against the published column schema.

The simulator writes one header row followed by full-precision decimal
rows.  This module only knows the column names each figure needs; it has
no other coupling to the simulator.
"""

from __future__ import annotations

import numpy as np


class TraceFormatError(Exception):
    """Input CSV is empty, malformed, or missing a required column."""


def load_trace(path: str) -> dict:
    """Load a trace CSV into a dict of named float arrays."""
    with open(path, "r") as fh:
        header_line = fh.readline().strip()
        has_rows = bool(fh.readline().strip())
    if not header_line:
        raise TraceFormatError(f"{path}: empty trace file")
    if not has_rows:
        raise TraceFormatError(f"{path}: no data rows")
    header = header_line.split(",")
    try:
        raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise TraceFormatError(f"{path}: cannot parse trace rows: {exc}") from exc
    if raw.shape[1] != len(header):
        raise TraceFormatError(
            f"{path}: {raw.shape[1]} columns of data against {len(header)} header names")
    return {name: raw[:, i] for i, name in enumerate(header)}


def require_columns(trace: dict, names, path: str = "trace") -> None:
    """Raise with the first missing column named explicitly."""
    for name in names:
        if name not in trace:
            raise TraceFormatError(f"{path}: missing required column {name!r}")
