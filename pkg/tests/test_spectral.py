"""Tests for Jacobians, spectra and stability classification.

Tests verify:
- Jacobian symmetry, zero row sums and agreement with finite differences
- Splay six-cycle spectrum, independent of the phase shift
- Eye graphs at the reference shifts: d zero eigenvalues, p(lambda)^d spectrum
- Stability along the line (0, beta) on the eye graph with two cycles
- Shift independence and stability of the 90-vertex stable-torus graph
- Circulant closed form against the dense eigensolver
- Classification rules and error cases
"""

import itertools
import math

import numpy as np
import pytest

from kuramoto_tori.dynamics import rhs
from kuramoto_tori.equilibria import torus_base
from kuramoto_tori.errors import AsymmetricMatrixError, DimensionMismatch, NumericalFailure
from kuramoto_tori.graphs import (
    PRESETS,
    Blowup,
    Complete,
    Cycle,
    EyeGd,
    TwoFullyJoinedCycles,
    generate,
)
from kuramoto_tori.phasecfg import splay
from kuramoto_tori.spectral import (
    CompletelyDegenerate,
    TransversallyStable,
    Unstable,
    circulant_eigenvalues,
    circulant_matrix,
    classify,
    eye_reference_spectrum,
    jacobian,
    shift_line,
    spectrum,
    torus_scan,
)

PI = math.pi


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(42)


# =============================================================================
# Jacobian
# =============================================================================


def test_jacobian_symmetric_with_zero_row_sums(rng: np.random.Generator) -> None:
    """J is symmetric and (1, ..., 1) is in its kernel at any configuration."""
    g = generate(EyeGd(2))
    jac = jacobian(g, rng.uniform(0, 2 * PI, g.n))
    assert np.max(np.abs(jac - jac.T)) == 0.0
    assert np.max(np.abs(jac.sum(axis=1))) <= 1e-12


def test_jacobian_matches_finite_differences(rng: np.random.Generator) -> None:
    """Columns of J are derivatives of rhs."""
    g = generate(Complete(4))
    c = rng.uniform(0, 2 * PI, 4)
    h = 1e-6
    fd = np.column_stack([(rhs(g, c + h * e) - rhs(g, c - h * e)) / (2 * h) for e in np.eye(4)])
    assert np.max(np.abs(fd - jacobian(g, c))) <= 1e-8


def test_jacobian_dimension_mismatch() -> None:
    """Configuration length must match the graph."""
    with pytest.raises(DimensionMismatch):
        jacobian(generate(Cycle(5)), np.zeros(4))


# =============================================================================
# Spectrum and Classification
# =============================================================================


def test_spectrum_counts() -> None:
    """Eigenvalues are sorted and counted against the zero band."""
    report = spectrum(np.diag([1.0, 0.0, -2.0, 1e-12]))
    assert report.eigenvalues == pytest.approx((-2.0, 0.0, 1e-12, 1.0))
    assert (report.zero_count, report.positive_count, report.negative_count) == (2, 1, 1)
    assert report.zero_tol == pytest.approx(2e-8)
    assert report.nonzero() == pytest.approx([-2.0, 1.0])


def test_spectrum_rejects_asymmetric() -> None:
    """Asymmetry above 1e-12 raises AsymmetricMatrixError."""
    with pytest.raises(AsymmetricMatrixError):
        spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_spectrum_rejects_non_square() -> None:
    """Only square matrices have a spectrum."""
    with pytest.raises(DimensionMismatch):
        spectrum(np.zeros((2, 3)))


def test_classify_rules() -> None:
    """Degenerate first, then stable with exactly d zeros, otherwise unstable."""
    assert classify(spectrum(np.zeros((3, 3))), 1) == CompletelyDegenerate()
    assert classify(spectrum(np.diag([0.0, 0.0, -1.0])), 2) == TransversallyStable(2)
    assert classify(spectrum(np.diag([0.0, 0.0, -1.0])), 1) == Unstable(0)
    assert classify(spectrum(np.diag([0.0, 1.0, -1.0])), 1) == Unstable(1)


def test_classify_labels() -> None:
    """Text forms used in result tables."""
    assert TransversallyStable(2).label == "stable(2)"
    assert Unstable(3).label == "unstable(3)"
    assert CompletelyDegenerate().label == "degenerate"


def test_classify_errors() -> None:
    """No zero eigenvalue is a numerical failure; d must be positive."""
    with pytest.raises(NumericalFailure):
        classify(spectrum(np.diag([-1.0, -2.0])), 1)
    with pytest.raises(ValueError):
        classify(spectrum(np.zeros((2, 2))), 0)


# =============================================================================
# Splay Six-Cycle and Eye Graphs
# =============================================================================


def test_splay_six_cycle_spectrum() -> None:
    """{-2, -3/2, -3/2, -1/2, -1/2, 0} for every phase shift."""
    g = generate(Cycle(6))
    expected = [-2.0, -1.5, -1.5, -0.5, -0.5, 0.0]
    for alpha in np.linspace(0.0, 2 * PI, 16):
        ev = spectrum(jacobian(g, splay(6, alpha))).as_array()
        assert np.max(np.abs(ev - expected)) <= 1e-10


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
def test_eye_graph_reference_spectrum(d: int) -> None:
    """Exactly d zero eigenvalues, the rest <= -1/2, matching p(lambda)^d."""
    family = EyeGd(d)
    g = generate(family)
    base = torus_base(family)
    report = spectrum(jacobian(g, base.configuration(base.reference_shifts())))
    assert report.zero_count == d
    assert np.all(report.nonzero() <= -0.5 + 1e-8)
    assert np.max(np.abs(report.as_array() - eye_reference_spectrum(d))) <= 1e-9
    assert classify(report, d) == TransversallyStable(d)


def test_eye_reference_spectrum_multiplicities() -> None:
    """Roots 0, -1/2, -3/2, -2 with multiplicities d, 2d, 2d, d."""
    ev = eye_reference_spectrum(3)
    assert len(ev) == 18
    assert list(ev).count(0.0) == 3
    assert list(ev).count(-0.5) == 6
    assert list(ev).count(-1.5) == 6
    assert list(ev).count(-2.0) == 3


def test_eye_scan_stable_near_quarter_turn() -> None:
    """Stability holds on an interval around beta = pi/2 and fails at beta = 0."""
    family = EyeGd(2)
    g = generate(family)
    betas = np.linspace(0.0, 2 * PI, 256, endpoint=False)
    points = torus_scan(g, torus_base(family), shift_line(betas, 2))
    assert len(points) == 256
    assert betas[64] == pytest.approx(PI / 2)

    for i in (63, 64, 65):
        report = points[i].report
        assert report.zero_count == 2
        assert report.positive_count == 0
        assert points[i].residual <= 1e-12

    at_zero = points[0].report
    assert at_zero.zero_count >= 2
    assert at_zero.positive_count >= 1


def test_torus_scan_shift_length() -> None:
    """Shift tuples must have one entry per part."""
    family = EyeGd(2)
    with pytest.raises(DimensionMismatch):
        torus_scan(generate(family), torus_base(family), [(0.0, 1.0, 2.0)])


def test_shift_line() -> None:
    """(beta,) for d = 1, (0, beta, ..., beta) otherwise."""
    assert shift_line([0.5], 1) == [(0.5,)]
    assert shift_line([0.5, 1.0], 3) == [(0.0, 0.5, 0.5), (0.0, 1.0, 1.0)]
    with pytest.raises(ValueError):
        shift_line([0.5], 0)


def test_scan_in_parallel_matches_serial() -> None:
    """Worker count does not change the scan."""
    family = EyeGd(2)
    g, base = generate(family), torus_base(family)
    grid = shift_line(np.linspace(0.0, 2 * PI, 12, endpoint=False), 2)
    serial = torus_scan(g, base, grid)
    parallel = torus_scan(g, base, grid, max_workers=4)
    assert [p.report for p in serial] == [p.report for p in parallel]


# =============================================================================
# Stable-Torus Graphs
# =============================================================================


@pytest.mark.timeout(120)
def test_h90_spectrum_independent_of_shifts(rng: np.random.Generator) -> None:
    """Sorted spectra agree at random (alpha, beta); two zeros, the rest negative."""
    family = PRESETS["h90"]
    g = generate(family)
    base = torus_base(family)
    spectra = []
    for shifts in rng.uniform(0.0, 2 * PI, (8, 2)):
        report = spectrum(jacobian(g, base.configuration(shifts)))
        assert report.zero_count == 2
        assert report.positive_count == 0
        spectra.append(report.as_array())
    for a, b in itertools.combinations(spectra, 2):
        assert np.max(np.abs(a - b)) <= 1e-8


def test_h36_is_transversally_stable() -> None:
    """The 36-vertex graph carries a stable 2-torus."""
    family = PRESETS["h36"]
    g = generate(family)
    base = torus_base(family)
    report = spectrum(jacobian(g, base.configuration(base.reference_shifts())))
    assert classify(report, 2) == TransversallyStable(2)


def test_h90_blowup_reading_is_unstable() -> None:
    """Blowing up two fully joined 5-cycles does not give a stable torus."""
    family = Blowup(TwoFullyJoinedCycles(5), 9)
    g = generate(family)
    base = torus_base(family)
    report = spectrum(jacobian(g, base.configuration(base.reference_shifts())))
    assert report.positive_count >= 1


# =============================================================================
# Circulant Closed Form
# =============================================================================


def test_circulant_matches_dense(rng: np.random.Generator) -> None:
    """DFT eigenvalues equal eigvalsh of the dense symmetric circulant."""
    half = rng.uniform(-1, 1, 4)
    row = np.concatenate([half, half[:0:-1]])  # symmetric first row, length 7
    dense = np.sort(np.linalg.eigvalsh(circulant_matrix(row)))
    assert np.max(np.abs(circulant_eigenvalues(row) - dense)) <= 1e-10


def test_cycle_jacobian_is_circulant() -> None:
    """At a splay state the cycle Jacobian is circulant in its first row."""
    g = generate(Cycle(8))
    jac = jacobian(g, splay(8, 0.4))
    assert np.max(np.abs(circulant_matrix(jac[0]) - jac)) <= 1e-12
    dense = spectrum(jac).as_array()
    assert np.max(np.abs(circulant_eigenvalues(jac[0]) - dense)) <= 1e-10
