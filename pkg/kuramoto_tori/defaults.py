"""Numerical constants and defaults shared across the library.

Every tolerance and integration parameter used by more than one module is
defined here so that the command line, the library and the tests agree.
"""

import math
from typing import Final

# ============================================================================
# Angles
# ============================================================================

TWO_PI: Final[float] = 2.0 * math.pi

# ============================================================================
# Predicate Tolerances
# ============================================================================

# Absolute tolerance on a unit-modulus order parameter sum
BALANCE_TOL: Final[float] = 1e-8
ALIGN_TOL: Final[float] = 1e-8

# Matrices with max |M - M^T| above this are rejected by the eigensolver
SYMMETRY_TOL: Final[float] = 1e-12

# zero_tol = ZERO_TOL_FACTOR * max(1, spectral radius)
ZERO_TOL_FACTOR: Final[float] = 1e-8

# ============================================================================
# Integration
# ============================================================================

DEFAULT_DT: Final[float] = 1e-3
DEFAULT_T_END: Final[float] = 200.0

# Step size and horizon used by the heteroclinic probes
PROBE_DT: Final[float] = 1e-2
PROBE_T_END: Final[float] = 200.0

# Trajectories stop once max |rhs| drops below this
STOP_RESIDUAL: Final[float] = 1e-8

# Allowed energy increase per forward step before a witness is rejected
MONOTONE_SLACK: Final[float] = 1e-9

# ============================================================================
# Equilibrium Search
# ============================================================================

NEWTON_TOL: Final[float] = 1e-12
NEWTON_MAX_ITER: Final[int] = 100
DESCENT_STEPS: Final[int] = 200
DEDUP_DISTANCE: Final[float] = 1e-6

# Exhaustive aligned enumeration covers 2^(n-1) patterns
ALIGNED_ENUMERATION_LIMIT: Final[int] = 24

# The pi/3 seed lattice has 6^(n-1) points; larger lattices are truncated
LATTICE_SEED_LIMIT: Final[int] = 4096

# ============================================================================
# Components and Probing
# ============================================================================

MEMBERSHIP_TOL: Final[float] = 1e-3
CENSUS_MEMBERSHIP_TOL: Final[float] = 1e-6

# Search results within this torus distance of a cataloged component are
# replaced by their projection onto it, when the projection is an equilibrium.
# Near crossings of components the residual grows only quadratically with the
# distance, so Newton alone stops short of the component.
SNAP_DISTANCE: Final[float] = 1e-2
SNAP_RESIDUAL: Final[float] = 1e-6
MEMBER_RESIDUAL_TOL: Final[float] = 1e-10

PROBE_EPS: Final[float] = 1e-3
PROBE_EPS_DEGENERATE: Final[float] = 1e-2
PROBE_TRIALS: Final[int] = 64

# Candidate members drawn when choosing a probe representative
REPRESENTATIVE_CANDIDATES: Final[int] = 8

# ============================================================================
# Workers
# ============================================================================

# Environment variable capping the worker thread count
THREADS_ENV: Final[str] = "KURA_THREADS"
DEFAULT_MAX_THREADS: Final[int] = 4
