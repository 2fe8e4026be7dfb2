"""Small CSV helper shared by trajectories and sweeps."""

from __future__ import annotations

import csv
import io
from pathlib import Path

__all__ = ["format_number", "write_rows"]


def format_number(x) -> str:
    """Shortest round-trip-safe text at 15 significant digits."""
    x = float(x)
    return "0" if x == 0 else f"{x:.15g}"


def write_rows(header, rows, target=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) for x in row])
    text = buf.getvalue()
    if target is not None:
        Path(target).write_text(text)
    return text
