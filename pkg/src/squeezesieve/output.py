"""CSV / JSON writers with fixed float formatting for reproducible files."""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence


def fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    value = float(value) + 0.0  # drops the sign of -0.0
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def render_csv(
    columns: Sequence[tuple[str, str]],
    rows: Iterable[Sequence],
    footer: Sequence[str] = (),
) -> str:
    """``columns`` holds (name, unit) pairs; footer lines are emitted as ``#`` comments."""
    lines = ["# " + ",".join(f"{name} [{unit}]" for name, unit in columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    lines.extend(f"# {text}" for text in footer)
    return "\n".join(lines) + "\n"


def _clean(obj):
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def render_json(config_echo: dict, results, diagnostics: dict) -> str:
    doc = {"config_echo": config_echo, "results": results, "diagnostics": diagnostics}
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + "\n"
