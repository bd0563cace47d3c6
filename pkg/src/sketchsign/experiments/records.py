"""CSV emission with fixed schemas and a commented header block.

Schemas are frozen; downstream plots parse them back, so changes here are
format changes.  The `# wall_clock` header line and the elapsed_ns column
are timing data: everything else is byte-stable for equal config + seeds.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from pathlib import Path

__all__ = [
    "REGRESSION_HEADER",
    "ROBUSTNESS_HEADER",
    "TIMING_HEADER",
    "RunRecord",
    "format_cell",
    "write_csv",
    "read_csv",
]

REGRESSION_HEADER = "k,f,grad_fro,grad_nuc,rank_used,residual,elapsed_ns"
ROBUSTNESS_HEADER = "n,sigma2,estimator,cov_trace"
TIMING_HEADER = "n,method,phase,median_ns,iqr_ns"


@dataclass
class RunRecord:
    """Rows of one run plus the metadata echoed into the header block."""

    header: str
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def append(self, *values) -> None:
        self.rows.append(values)


def format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, record: RunRecord) -> Path:
    """Write `# key: value` metadata lines, the schema header, then rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = dict(record.meta)
    meta.setdefault("wall_clock", datetime.datetime.now(datetime.timezone.utc).isoformat())
    lines = [f"# {key}: {meta[key]}" for key in sorted(meta)]
    lines.append(record.header)
    for row in record.rows:
        lines.append(",".join(format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of write_csv, cells kept as strings: (meta, columns, rows)."""
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif not columns:
            columns = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, columns, rows
