"""Table output: comma-separated with a header row, or one JSON object."""
from __future__ import annotations

import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Mapping, Sequence


def _plain(value: Any) -> Any:
    """JSON-safe value; big integers and fractions become decimal strings."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value if abs(value) < 2**53 else str(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return value if value == value and abs(value) != float("inf") else str(value)
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return _plain(value.item())
    return str(value)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):
        return _cell(value.item())
    return str(value)


def render(
    rows: Sequence[Mapping[str, Any]],
    config: Mapping[str, Any],
    fmt: str = "csv",
    summary: Mapping[str, Any] | None = None,
) -> str:
    """Format ``rows`` as CSV or JSON.

    CSV carries ``summary`` as trailing ``# key,value`` comment lines; JSON
    puts it under a ``"summary"`` key next to ``"config"`` and ``"rows"``.
    """
    if fmt == "json":
        doc = {"config": _plain(dict(config)), "rows": [_plain(dict(r)) for r in rows]}
        if summary:
            doc["summary"] = _plain(dict(summary))
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys()) if rows else []
    if header:
        writer.writerow(header)
        for r in rows:
            writer.writerow([_cell(r[k]) for k in header])
    for key, value in (summary or {}).items():
        writer.writerow([f"# {key}", _cell(value)])
    return buf.getvalue()


def write(text: str, path: str | None) -> None:
    """Write to ``path`` as UTF-8 with LF endings, or to stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
