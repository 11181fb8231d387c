"""Fixed-format text, CSV and manifest writers."""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__


def format_scalar(value) -> str:
    """Stdout formatting: fixed 9 decimals, lowercase literals."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.9f}"
    if value is None:
        return "none"
    return str(value)


def format_cell(value) -> str:
    """CSV formatting: 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            v = 0.0  # no "-0"
        return format(v, ".12g")
    if value is None:
        return ""
    return str(value)


def key_value_lines(pairs) -> str:
    return "".join(f"{k} = {format_scalar(v)}\n" for k, v in pairs)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def build_manifest(command: str, parameters: dict, seeds=None, tolerances=None) -> dict:
    return {
        "tool": "wgpair",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "seeds": seeds or {},
        "tolerances": tolerances or {},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_table(out, header, rows, manifest: dict) -> Path:
    """Write the CSV and its manifest; returns the CSV path."""
    out = Path(out)
    text = csv_text(header, rows)
    out.write_text(text, encoding="utf-8")
    manifest = dict(manifest, columns=list(header), output=out.name)
    manifest_path(out).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
