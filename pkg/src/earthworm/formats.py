"""On-disk formats: sample-table CSV, holes dumps, run-summary JSON.

All outputs are deterministic functions of their inputs except wall-times,
which are isolated in a dedicated trailing column / key so byte comparison
of everything else stays meaningful. CSV files carry a `# schema=1` first
line; readers reject unknown schemas.
"""

from __future__ import annotations

import csv
import json
from typing import Iterable, Optional, TextIO

from .montecarlo import SampleRow, SampleTable

CSV_SCHEMA = 1
_TABLE_HEADER = ["dim", "n", "replica", "seed", "s_n", "created_total", "tan_total", "walltime_ms"]


def write_table_csv(table: SampleTable, fh: TextIO) -> None:
    fh.write(f"# schema={CSV_SCHEMA}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(_TABLE_HEADER)
    for row in table.sorted_rows():
        writer.writerow(
            [
                row.dim,
                row.n,
                row.replica,
                row.seed,
                row.s_n,
                row.created_total,
                "" if row.tan_total is None else row.tan_total,
                f"{row.walltime_ms:.3f}",
            ]
        )


def read_table_csv(fh: TextIO) -> SampleTable:
    first = fh.readline().strip()
    if first != f"# schema={CSV_SCHEMA}":
        raise ValueError(f"unsupported table schema line {first!r} (expected '# schema={CSV_SCHEMA}')")
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != _TABLE_HEADER:
        raise ValueError(f"unexpected table header {header!r}")
    rows = []
    for raw in reader:
        if not raw:
            continue
        rows.append(
            SampleRow(
                dim=int(raw[0]),
                n=int(raw[1]),
                replica=int(raw[2]),
                seed=int(raw[3]),
                s_n=int(raw[4]),
                created_total=int(raw[5]),
                tan_total=None if raw[6] == "" else int(raw[6]),
                walltime_ms=float(raw[7]),
            )
        )
    table = SampleTable(rows=rows)
    table.validate()
    return table


def save_table_csv(table: SampleTable, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_table_csv(table, fh)


def load_table_csv(path: str) -> SampleTable:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return read_table_csv(fh)


def write_holes_dump(sites: Iterable, fh: TextIO) -> int:
    """One site per line, space-separated coordinates, lexicographic order."""
    count = 0
    for site in sorted(tuple(s) for s in sites):
        fh.write(" ".join(str(c) for c in site) + "\n")
        count += 1
    return count


def read_holes_dump(fh: TextIO) -> list:
    sites = []
    dim = None
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        coords = tuple(int(tok) for tok in line.split())
        if dim is None:
            dim = len(coords)
        elif len(coords) != dim:
            raise ValueError(f"line {lineno}: expected {dim} coordinates, got {len(coords)}")
        sites.append(coords)
    return sites


def save_holes_dump(sites: Iterable, path: str) -> int:
    with open(path, "w", encoding="utf-8") as fh:
        return write_holes_dump(sites, fh)


def load_holes_dump(path: str) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return read_holes_dump(fh)


def summary_json(
    dim: int,
    steps: int,
    seed: Optional[int],
    s_n: int,
    created_total: int,
    tan_total: Optional[int],
    final_position: tuple,
    walltime_ms: Optional[float] = None,
    series: Optional[list] = None,
) -> str:
    """Deterministic run-summary JSON (timing isolated in walltime_ms)."""
    payload = {
        "schema": CSV_SCHEMA,
        "dim": dim,
        "steps": steps,
        "seed": seed,
        "s_n": s_n,
        "created_total": created_total,
        "tan_total": tan_total,
        "final_position": list(final_position),
        "series": None if series is None else [[k, s] for k, s in series],
        "walltime_ms": walltime_ms,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"
