"""Tabular result storage and export for scans and equilibrium searches."""

from data_store.schemas import (
    EQUILIBRIUM_SCHEMA,
    equilibrium_to_row,
    scan_columns,
    scan_point_to_row,
)
from data_store.store import ResultStore

__all__ = [
    "EQUILIBRIUM_SCHEMA",
    "equilibrium_to_row",
    "scan_columns",
    "scan_point_to_row",
    "ResultStore",
]
