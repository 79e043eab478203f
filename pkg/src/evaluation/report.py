"""Plain-text renderings of metrics reports."""
from typing import Mapping

from src.evaluation.metrics import MetricsReport

_COLUMNS = ("idf1", "mota", "idsw", "fp", "fn", "idp", "idr", "gt_count")


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(reports: Mapping[str, MetricsReport]) -> str:
    """Aligned table, one row per named report."""
    header = ["name", *_COLUMNS]
    body = [[name, *(_cell(getattr(r, c)) for c in _COLUMNS)] for name, r in reports.items()]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for n, row in enumerate([header, *body]):
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def format_key_values(report: MetricsReport, prefix: str = "") -> str:
    """Machine-readable ``key = value`` block."""
    return "".join(f"{prefix}{key} = {_cell(value)}\n" for key, value in report.model_dump().items())
