"""ASCII tables for command output."""

from __future__ import annotations

from collections.abc import Sequence


def format_value(value: object) -> str:
    """Format a single cell: floats to six significant digits, the rest via str."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def build_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Build an ASCII table from headers and rows."""
    cells = [[format_value(v) for v in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    sep = "+-" + "-+-".join("-" * w for w in widths) + "-+"
    header = "| " + " | ".join(h.ljust(w) for h, w in zip(headers, widths)) + " |"

    lines = [sep, header, sep]
    for row in cells:
        lines.append("| " + " | ".join(c.ljust(w) for c, w in zip(row, widths)) + " |")
    lines.append(sep)
    return "\n".join(lines)


def format_header(fields: dict[str, object]) -> str:
    """One ``key=value`` line describing a run."""
    return " ".join(f"{k}={format_value(v)}" for k, v in fields.items())
