"""Column layouts for result tables.

Scan tables have one row per grid point; equilibrium tables one row per
distinct equilibrium. List-valued cells (phases, spectra) stay lists in
memory and are serialized as JSON text in CSV and Parquet files.
"""

from typing import Any, Dict, List, Optional, Sequence

from kuramoto_tori.spectral import ScanPoint, SpectrumReport

# Equilibrium table: column names and their dtypes
EQUILIBRIUM_SCHEMA: Dict[str, type] = {
    "phases": list,  # canonicalized, theta_0 = 0
    "residual": float,  # max |rhs|
    "energy": float,
    "spectrum": list,  # ascending Jacobian eigenvalues
    "zero_count": int,
    "class": str,  # "stable(d)", "unstable(p)", "degenerate" or "failed"
    "component": str,  # catalog label, "" when unknown or no catalog
}


def scan_columns(d: int, n: int) -> List[str]:
    """shift_1..shift_d, lambda_0..lambda_{n-1}, zero_count, class."""
    return (
        [f"shift_{i + 1}" for i in range(d)]
        + [f"lambda_{j}" for j in range(n)]
        + ["zero_count", "class"]
    )


def scan_point_to_row(point: ScanPoint, label: str) -> Dict[str, Any]:
    """Flatten one scan point into a row keyed by scan_columns.

    Args:
        point: Grid point with its spectrum.
        label: Stability class label for the point.
    """
    row: Dict[str, Any] = {f"shift_{i + 1}": s for i, s in enumerate(point.shifts)}
    row.update({f"lambda_{j}": ev for j, ev in enumerate(point.report.eigenvalues)})
    row["zero_count"] = point.report.zero_count
    row["class"] = label
    return row


def equilibrium_to_row(
    phases: Sequence[float],
    residual: float,
    energy: float,
    report: SpectrumReport,
    label: str,
    component: Optional[str],
) -> Dict[str, Any]:
    """Row keyed by EQUILIBRIUM_SCHEMA."""
    return {
        "phases": [float(x) for x in phases],
        "residual": float(residual),
        "energy": float(energy),
        "spectrum": list(report.eigenvalues),
        "zero_count": report.zero_count,
        "class": label,
        "component": component or "",
    }
