"""Result emission: CSV tables, run summaries, schema description.

Cells are written from canonical string forms (shortest repr for
floats, plain decimal for ints, empty string for undefined values), so
parsing a table and re-emitting it reproduces the bytes exactly. Files
always use '\n' endings and carry no timestamps; two runs with the same
config, inputs, and seed emit identical bytes no matter the worker
count.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from . import __version__


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(header: list[str], rows: list[list]) -> str:
    """Render rows (any cell types) to canonical CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Read CSV text back into (header, string rows)."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return [], []
    return rows[0], rows[1:]


def reemit_csv(header: list[str], string_rows: list[list[str]]) -> str:
    """Identity partner of parse_csv: string cells go out unchanged."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in string_rows:
        writer.writerow(row)
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def summary_text(title: str, config_pairs: list[tuple[str, str]], body_pairs: list[tuple[str, str]]) -> str:
    """A small structured-text run summary: config echo, then results."""
    lines = [title, "=" * len(title), "", f"gibbsabc version: {__version__}", "", "[config]"]
    for k, v in config_pairs:
        lines.append(f"{k} = {v}")
    lines.append("")
    lines.append("[results]")
    for k, v in body_pairs:
        lines.append(f"{k} = {v}")
    lines.append("")
    return "\n".join(lines)
