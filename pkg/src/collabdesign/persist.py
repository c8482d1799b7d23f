"""Deterministic artifact writers.

Every file produced here is a pure function of its inputs: floats are
rendered with repr (shortest round-trip form), separators are fixed, line
endings are LF, JSON keys are sorted, and nothing records wall-clock state.
Re-running an experiment with the same config must reproduce every byte.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def format_cell(value) -> str:
    """Render one CSV cell: '.' radix for numbers, no quoting."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    text = str(value)
    if "," in text or "\n" in text:
        raise ValueError(f"cell value {text!r} would corrupt the CSV")
    return text


def render_csv(columns, rows) -> str:
    """Comma-separated table with a header row and LF line endings."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(columns, rows), newline="")
    return path


def write_matrix_csv(path, matrix) -> Path:
    """One CSV row per matrix row, columns named c0..c{N-1}."""
    m = np.asarray(matrix, dtype=float)
    columns = [f"c{j}" for j in range(m.shape[1])]
    rows = [{f"c{j}": m[i, j] for j in range(m.shape[1])} for i in range(m.shape[0])]
    return write_csv(path, columns, rows)


def write_signals_csv(path, signal_class) -> Path:
    """Signal matrix as bare CSV: one signal per row, no header."""
    signals = np.asarray(signal_class.signals, dtype=float)
    lines = [",".join(repr(float(v)) for v in row) for row in signals]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", newline="")
    return path


def read_signals_csv(path):
    """Inverse of write_signals_csv. Rows must all have the same width."""
    from .model import SignalClass

    text = Path(path).read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(cell) for cell in line.split(",")])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no signal rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows, widths {sorted(widths)}")
    return SignalClass(signals=np.array(rows, dtype=float))


def _plain(value):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def render_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_json(obj), newline="")
    return path


def metadata_record(config_dict: dict, version: str, extras: dict | None = None) -> dict:
    """Everything needed to regenerate an output exactly: config plus version."""
    record = {"config": _plain(config_dict), "version": version}
    if extras:
        record["summary"] = _plain(extras)
    return record
