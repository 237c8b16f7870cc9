"""Thread-safe accumulator of equilibria, deduplicated up to phase shift."""

import logging
import threading
from typing import List

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.defaults import DEDUP_DISTANCE
from kuramoto_tori.errors import DimensionMismatch
from kuramoto_tori.phasecfg import as_phases, torus_distances

logger = logging.getLogger(__name__)


class EquilibriumCollector:
    """Keeps one representative per phase-shift class of configurations.

    A configuration is new when its torus distance to every stored
    representative exceeds the dedup distance. Representatives stay in
    insertion order.
    """

    def __init__(self, n: int, dedup_distance: float = DEDUP_DISTANCE) -> None:
        """Initialize an empty collector.

        Args:
            n: Length of the configurations to collect.
            dedup_distance: Configurations closer than this are duplicates.
        """
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        if dedup_distance < 0:
            raise ValueError(f"dedup_distance must be >= 0, got {dedup_distance}")

        self._n = n
        self._dedup = dedup_distance
        self._reps = np.empty((0, n))
        self._lock = threading.Lock()

    def add(self, c: ArrayLike) -> bool:
        """Add a configuration unless an equivalent one is already stored (thread-safe).

        Returns:
            True if c was stored as a new representative.
        """
        theta = as_phases(c)
        if theta.size != self._n:
            raise DimensionMismatch(f"expected length {self._n}, got {theta.size}")

        with self._lock:
            if len(self._reps) and float(np.min(torus_distances(theta, self._reps))) <= self._dedup:
                return False
            self._reps = np.vstack([self._reps, theta])
            logger.debug(f"New representative, {len(self._reps)} stored")
            return True

    def snapshot(self) -> List[NDArray[np.float64]]:
        """Copy of all representatives, oldest first (thread-safe)."""
        with self._lock:
            return [row.copy() for row in self._reps]

    def clear(self) -> None:
        """Remove all representatives (thread-safe)."""
        with self._lock:
            count = len(self._reps)
            self._reps = np.empty((0, self._n))
            logger.debug(f"Cleared {count} representatives")

    def __len__(self) -> int:
        """Number of stored representatives (thread-safe)."""
        with self._lock:
            return len(self._reps)

    @property
    def dedup_distance(self) -> float:
        """Distance below which configurations count as duplicates."""
        return self._dedup
