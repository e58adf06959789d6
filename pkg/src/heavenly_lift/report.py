"""Deterministic report serialization.

JSON output is byte-identical for identical inputs: keys are sorted, floats
are rendered with 17 significant digits, complex numbers become [re, im]
pairs.  Every report carries the versioned schema tag.
"""

from __future__ import annotations

import numpy as np

SCHEMA = "heavenly-lift/1"


def _fmt_float(x: float) -> str:
    if x != x:
        return '"nan"'
    if x in (float("inf"), float("-inf")):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def to_json(obj, indent: int = 0) -> str:
    """Render a report object deterministically (sorted keys, fixed floats)."""
    pad = "  " * indent
    pad_in = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [to_json(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(pad_in + s for s in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k in sorted(obj, key=str):
            items.append(f'{pad_in}"{k}": ' + to_json(obj[k], indent + 1))
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def render_report(payload: dict) -> str:
    out = dict(payload)
    out["schema"] = SCHEMA
    return to_json(out) + "\n"


def write_csv(path, header: list[str], rows) -> None:
    """Plain delimited output with the same float formatting as the JSON."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if v is None or (isinstance(v, float) and v != v):
                    cells.append("")
                elif isinstance(v, (float, np.floating)):
                    cells.append(format(float(v), ".17g"))
                elif isinstance(v, (int, np.integer)):
                    cells.append(str(int(v)))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")
