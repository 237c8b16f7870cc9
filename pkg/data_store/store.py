"""Thread-safe result table with self-describing CSV, Parquet and JSON export.

Every exported file carries the tool version and the run configuration:
CSV as a leading '#' comment line, Parquet as schema metadata, JSON as a
"meta" object. Exports contain no timestamps, so identical runs produce
identical files.
"""

import json
import logging
from pathlib import Path
from threading import RLock
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq

from kuramoto_tori import __version__

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Key of the Parquet schema metadata entry holding the header
PARQUET_META_KEY = b"kura"


def _native(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


class ResultStore:
    """Thread-safe in-memory DataFrame of result rows.

    Rows are appended by the worker that produced them; exports take the
    lock and write a consistent snapshot.
    """

    def __init__(self, columns: List[str], meta: Optional[Dict[str, Any]] = None) -> None:
        """Initialize an empty store.

        Args:
            columns: Column names, in output order.
            meta: Configuration echo written into every export.
        """
        if not columns:
            raise ValueError("columns must be non-empty")
        self._lock = RLock()
        self._columns = list(columns)
        self._df = pd.DataFrame(columns=self._columns)
        self._meta: Dict[str, Any] = dict(meta or {})

    @property
    def header(self) -> Dict[str, Any]:
        """Tool name, version and configuration echo."""
        return {"tool": "kura", "version": __version__, "config": self._meta}

    def append_rows(self, rows: Iterable[Dict[str, Any]]) -> None:
        """Append rows keyed by column name (thread-safe)."""
        batch = list(rows)
        if not batch:
            return
        for row in batch:
            unknown = set(row) - set(self._columns)
            if unknown:
                raise ValueError(f"unknown columns {sorted(unknown)}")

        with self._lock:
            new_df = pd.DataFrame(batch, columns=self._columns)
            self._df = new_df if self._df.empty else pd.concat([self._df, new_df], ignore_index=True)
            logger.debug(f"Appended {len(batch)} rows, now {len(self._df)} rows")

    def get_dataframe(self) -> pd.DataFrame:
        """Copy of the table (thread-safe)."""
        with self._lock:
            return self._df.copy()

    def __len__(self) -> int:
        with self._lock:
            return len(self._df)

    def _flat(self) -> pd.DataFrame:
        # List cells become JSON text for flat formats
        df = self.get_dataframe()
        for col in df.columns:
            if df[col].map(lambda v: isinstance(v, (list, tuple))).any():
                df[col] = df[col].map(json.dumps)
        return df

    def render_csv(self) -> str:
        """CSV text preceded by a '# kura <version> <config json>' line."""
        meta = json.dumps(self._meta, sort_keys=True)
        return f"# kura {__version__} {meta}\n" + self._flat().to_csv(index=False)

    def render_json(self) -> str:
        """JSON text {"meta": header, "rows": [...]}."""
        rows = self.get_dataframe().to_dict(orient="records")
        return json.dumps({"meta": self.header, "rows": rows}, indent=2, default=_native) + "\n"

    def export_csv(self, path: PathLike) -> str:
        """Write render_csv() to path.

        Returns:
            Absolute path to exported file
        """
        with self._lock:
            Path(path).write_text(self.render_csv())
            abs_path = str(Path(path).resolve())
            logger.info(f"Exported {len(self._df)} rows to CSV: {abs_path}")
            return abs_path

    def export_json(self, path: PathLike) -> str:
        """Write render_json() to path.

        Returns:
            Absolute path to exported file
        """
        with self._lock:
            Path(path).write_text(self.render_json())
            abs_path = str(Path(path).resolve())
            logger.info(f"Exported {len(self._df)} rows to JSON: {abs_path}")
            return abs_path

    def export_parquet(self, path: PathLike) -> str:
        """Write a Parquet file whose schema metadata holds the header.

        Returns:
            Absolute path to exported file
        """
        with self._lock:
            table = pa.Table.from_pandas(self._flat(), preserve_index=False)
            metadata = dict(table.schema.metadata or {})
            metadata[PARQUET_META_KEY] = json.dumps(self.header, sort_keys=True).encode()
            pq.write_table(table.replace_schema_metadata(metadata), str(path))
            abs_path = str(Path(path).resolve())
            logger.info(f"Exported {len(self._df)} rows to Parquet: {abs_path}")
            return abs_path

    def flush_to_disk(self, format: str, path: PathLike) -> str:
        """Export in the named format.

        Args:
            format: "csv", "json" or "parquet"
            path: Output file path

        Returns:
            Absolute path to exported file

        Raises:
            ValueError: If format is not "csv", "json" or "parquet"
        """
        if format == "csv":
            return self.export_csv(path)
        elif format == "json":
            return self.export_json(path)
        elif format == "parquet":
            return self.export_parquet(path)
        else:
            raise ValueError(f"Unknown format '{format}', expected 'csv', 'json' or 'parquet'")

    def clear(self) -> None:
        """Drop all rows, keeping columns and metadata (thread-safe)."""
        with self._lock:
            self._df = pd.DataFrame(columns=self._columns)
            logger.debug("ResultStore cleared")


def read_parquet_header(path: PathLike) -> Dict[str, Any]:
    """Header stored by ResultStore.export_parquet."""
    schema = pq.read_schema(str(path))
    raw = (schema.metadata or {}).get(PARQUET_META_KEY)
    if raw is None:
        raise ValueError(f"{path} has no kura header")
    return dict(json.loads(raw))


def read_csv(path: PathLike) -> pd.DataFrame:
    """Read a CSV written by ResultStore, skipping the header comment."""
    return pd.read_csv(path, comment="#")
