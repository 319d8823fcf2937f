"""Plot-ready CSV and JSON output plus plain-text configuration files.

Every file written here carries the tool version and the full parameter
set that produced it. CSV files put them on a leading ``#`` comment line
as compact JSON; JSON files hold them under ``"metadata"``. Numbers are
written with 17 significant digits and a ``.`` decimal point, so reruns
with the same parameters reproduce files byte for byte.
"""

from __future__ import annotations

import csv
import json
import re
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np

from ._version import __version__

_TIME_RE = re.compile(r"^\s*([-+0-9.eE]+)\s*(ps|ns)?\s*$")


def _plain(obj):
    """Convert numpy scalars/arrays and sets into JSON-friendly values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def metadata(params: Mapping) -> dict:
    return {"tool": "fringelab", "version": __version__, "parameters": _plain(dict(params))}


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "nan" if np.isnan(value) else format(value, ".17g")


def write_csv(path, header: Sequence[str], columns: Sequence, params: Mapping) -> Path:
    path = Path(path)
    columns = [np.asarray(c) for c in columns]
    if len(header) != len(columns) or len({len(c) for c in columns}) > 1:
        raise ValueError("header and columns do not line up")
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(metadata(params), sort_keys=True, separators=(",", ":")) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[dict[str, np.ndarray], dict | None]:
    """Columns by header name and the embedded metadata, if any.

    Numeric columns come back as float arrays, anything else as strings.
    """
    meta = None
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                if meta is None:
                    try:
                        meta = json.loads(line[1:])
                    except json.JSONDecodeError:
                        pass
                continue
            if line.strip():
                rows.append(line)
    reader = csv.reader(rows)
    header = [h.strip() for h in next(reader)]
    data = [row for row in reader if row]
    if not data:
        raise ValueError(f"{path}: no data rows")
    if any(len(row) != len(header) for row in data):
        raise ValueError(f"{path}: rows do not match the header")
    columns = {}
    for name, values in zip(header, zip(*data)):
        try:
            columns[name] = np.array(values, dtype=float)
        except ValueError:
            columns[name] = np.array([v.strip() for v in values])
    return columns, meta


def write_json(path, result, params: Mapping) -> Path:
    path = Path(path)
    payload = {"metadata": metadata(params), "result": _plain(result)}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use ``_`` or ``-``."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def parse_time_ps(text) -> float:
    """``"59"``, ``"59ps"`` or ``"0.059ns"`` to picoseconds."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _TIME_RE.match(str(text))
    if m is None:
        raise ValueError(f"cannot parse time {text!r}; use a number with optional ps/ns suffix")
    value = float(m.group(1))
    return value * 1000.0 if m.group(2) == "ns" else value


def parse_grid(text: str, converter=float) -> np.ndarray:
    """``"start:stop:num"`` (inclusive linspace) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid {text!r} must be start:stop:num")
        return np.linspace(converter(parts[0]), converter(parts[1]), int(parts[2]))
    return np.array([converter(p) for p in text.split(",") if p.strip()])
