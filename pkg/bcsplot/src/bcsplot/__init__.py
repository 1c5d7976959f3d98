"""Figure generation for bilinear-compressive-security experiment CSVs."""

from .data import CellGrid, CsvFormatError, load_cells, nearest_cell_index, threshold_cells
from .render import KINDS, PlotSpec, render

__all__ = [
    "CellGrid",
    "CsvFormatError",
    "KINDS",
    "PlotSpec",
    "load_cells",
    "nearest_cell_index",
    "render",
    "threshold_cells",
]
