"""Parsing and aggregation of experiment CSVs.

The input schema is the experiment runner's trial log:

    n,m,M,s,trial,seed,final_loss,rel_error,success,iters,wall_s

with success encoded 0/1. Aggregation reproduces the runner's summary
exactly: per-(M, s) success rate = successes/trials, no smoothing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

COLUMNS = ["n", "m", "M", "s", "trial", "seed", "final_loss", "rel_error", "success", "iters", "wall_s"]


class CsvFormatError(ValueError):
    """Malformed input CSV; the message carries row/column diagnostics."""


@dataclass(frozen=True)
class CellGrid:
    """Success rates on the (M, s) grid of one experiment."""

    n: int
    m: int
    M_values: tuple[int, ...]  # ascending
    s_values: tuple[int, ...]  # ascending
    rates: np.ndarray  # shape (len(M_values), len(s_values)), NaN = no data
    counts: np.ndarray  # trials per cell

    def rate(self, M: int, s: int) -> float:
        return float(self.rates[self.M_values.index(M), self.s_values.index(s)])


def load_cells(path) -> CellGrid:
    """Parse a trial CSV and aggregate to per-cell success rates."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, expected header {COLUMNS}")
        if header != COLUMNS:
            raise CsvFormatError(f"{path}: header row mismatch: got {header}, expected {COLUMNS}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(COLUMNS):
                raise CsvFormatError(f"{path}: row {lineno}: expected {len(COLUMNS)} columns, got {len(row)}")
            try:
                n, m, M, s = int(row[0]), int(row[1]), int(row[2]), int(row[3])
                success = row[8]
                if success not in ("0", "1"):
                    raise ValueError(f"success must be 0 or 1, got {success!r}")
                float(row[7])
            except ValueError as exc:
                raise CsvFormatError(f"{path}: row {lineno}: {exc}") from exc
            rows.append((n, m, M, s, success == "1"))
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    geometries = {(r[0], r[1]) for r in rows}
    if len(geometries) != 1:
        raise CsvFormatError(f"{path}: multiple (n, m) geometries {sorted(geometries)}")
    n, m = geometries.pop()
    M_values = tuple(sorted({r[2] for r in rows}))
    s_values = tuple(sorted({r[3] for r in rows}))
    succ = np.zeros((len(M_values), len(s_values)))
    count = np.zeros((len(M_values), len(s_values)))
    mi = {M: i for i, M in enumerate(M_values)}
    si = {s: i for i, s in enumerate(s_values)}
    for _, _, M, s, ok in rows:
        count[mi[M], si[s]] += 1
        succ[mi[M], si[s]] += ok
    with np.errstate(invalid="ignore", divide="ignore"):
        rates = np.where(count > 0, succ / np.maximum(count, 1), np.nan)
    return CellGrid(n, m, M_values, s_values, rates, count)


def threshold_cells(grid: CellGrid, level: float = 0.5) -> dict[int, int | None]:
    """For each s, the index of the smallest M whose raw cell rate reaches
    the level (None if no cell does). Raw nearest-cell values only, no
    interpolation."""
    out: dict[int, int | None] = {}
    for j, s in enumerate(grid.s_values):
        idx = None
        for i in range(len(grid.M_values)):
            r = grid.rates[i, j]
            if not np.isnan(r) and r >= level:
                idx = i
                break
        out[s] = idx
    return out


def nearest_cell_index(M_values, target: float) -> int:
    """Grid index closest to the target in log scale."""
    logs = np.log(np.asarray(M_values, dtype=float))
    return int(np.argmin(np.abs(logs - np.log(target))))
