"""Tests for the equilibrium component catalogs of K4 and C4.

Tests verify:
- Sampled members are equilibria with the reference energy
- Closed-form membership, projection and distance
- Tangent bases are orthonormal and lie in the Jacobian kernel
- Construction errors for malformed components
- Catalog lookup by family and by graph
- Intersections of the K4 tori
- Nearest member by projection, within a distance cap
"""

import dataclasses
import math
from typing import Callable, List

import numpy as np
import pytest

from kuramoto_tori.components import (
    EquilibriumComponent,
    complete4_components,
    components_for,
    components_for_graph,
    cycle4_components,
    matching_components,
    nearest_member,
)
from kuramoto_tori.dynamics import energy, residual
from kuramoto_tori.errors import CatalogError, DimensionMismatch, NotEquilibriumError
from kuramoto_tori.graphs import Complete, Cycle, GraphFamily, generate
from kuramoto_tori.phasecfg import reduce, splay, torus_distance
from kuramoto_tori.spectral import jacobian

PI = math.pi

CATALOGS = [
    pytest.param(Complete(4), complete4_components, id="k4"),
    pytest.param(Cycle(4), cycle4_components, id="c4"),
]


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(5)


# =============================================================================
# Members
# =============================================================================


@pytest.mark.parametrize("family, build", CATALOGS)
def test_members_are_equilibria_with_reference_energy(
    family: GraphFamily, build: Callable[[], List[EquilibriumComponent]], rng: np.random.Generator
) -> None:
    """Energies of 32 sampled members match the catalog within 1e-12."""
    g = generate(family)
    for comp in build():
        members = comp.sample(rng, 32)
        assert np.max(residual(g, members)) <= 1e-12
        assert np.max(np.abs(np.asarray(energy(g, members)) - comp.energy)) <= 1e-12
        comp.verify(g, rng)


def test_catalog_energies() -> None:
    """K4: B at 8, A at 6, S at 0. C4: A5 at 8, B2, C1, C2 at 4, S at 0."""
    assert {c.name: c.energy for c in complete4_components()} == {
        "B1": 8.0,
        "B2": 8.0,
        "B3": 8.0,
        "A1": 6.0,
        "A2": 6.0,
        "A3": 6.0,
        "A4": 6.0,
        "S": 0.0,
    }
    c4 = {c.name: c.energy for c in cycle4_components()}
    assert c4 == {"A5": 8.0, "B2": 4.0, "C1": 4.0, "C2": 4.0, "S": 0.0}


def test_dimensions() -> None:
    """Tori have dimension 2, points dimension 1 (the shift orbit)."""
    dims = {c.name: c.dimension for c in complete4_components()}
    assert dims == {"B1": 2, "B2": 2, "B3": 2, "A1": 1, "A2": 1, "A3": 1, "A4": 1, "S": 1}
    assert {c.name: c.dimension for c in cycle4_components()}["C1"] == 2


# =============================================================================
# Membership, Projection, Distance
# =============================================================================


def test_contains_is_shift_invariant(rng: np.random.Generator) -> None:
    """Members shifted by any constant stay members."""
    for comp in complete4_components():
        c = comp.sample(rng)[0]
        assert comp.contains(c, 1e-9)
        assert comp.contains(reduce(c + 2.3), 1e-9)


def test_contains_rejects_other_components() -> None:
    """A point of A1 is not on S or B1."""
    comps = {c.name: c for c in complete4_components()}
    a1 = comps["A1"].member([0.4])
    assert comps["A1"].contains(a1, 1e-9)
    assert not comps["S"].contains(a1, 1e-3)
    assert not comps["B1"].contains(a1, 1e-3)


def test_project_and_distance(rng: np.random.Generator) -> None:
    """Members project to themselves; perturbed points have positive distance."""
    comp = {c.name: c for c in cycle4_components()}["C1"]
    c = comp.sample(rng)[0]
    assert comp.distance(c) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(np.exp(1j * comp.project(c)), np.exp(1j * c))
    off = c.copy()
    off[0] += 0.05
    assert comp.distance(off) > 1e-3


def test_violation_length_mismatch() -> None:
    """Configurations of the wrong length are rejected."""
    with pytest.raises(DimensionMismatch):
        complete4_components()[0].violation(np.zeros(3))


# =============================================================================
# Tangent Spaces
# =============================================================================


@pytest.mark.parametrize("family, build", CATALOGS)
def test_tangent_basis_in_jacobian_kernel(
    family: GraphFamily, build: Callable[[], List[EquilibriumComponent]], rng: np.random.Generator
) -> None:
    """J(c) q = 0 for every tangent vector q at a member c."""
    g = generate(family)
    for comp in build():
        q = comp.tangent_basis()
        assert q.shape == (4, comp.dimension)
        assert q.T @ q == pytest.approx(np.eye(comp.dimension), abs=1e-12)
        c = comp.sample(rng)[0]
        assert np.max(np.abs(jacobian(g, c) @ q)) <= 1e-12


def test_tangent_contains_shift_direction() -> None:
    """(1, 1, 1, 1) lies in every tangent space."""
    ones = np.ones(4) / 2.0
    for comp in complete4_components() + cycle4_components():
        q = comp.tangent_basis()
        assert np.linalg.norm(ones - q @ (q.T @ ones)) <= 1e-12


# =============================================================================
# Construction Errors
# =============================================================================


def test_relation_must_be_shift_invariant() -> None:
    """Coefficient rows must sum to zero."""
    with pytest.raises(ValueError):
        EquilibriumComponent(
            name="X",
            energy=0.0,
            offset=(0.0, 0.0),
            generators=((1,), (1,)),
            relations=(((1, 0), 0.0),),
            pivots=(0,),
        )


def test_pivot_block_must_be_unimodular() -> None:
    """A pivot block with determinant 2 cannot recover integer parameters."""
    with pytest.raises(ValueError):
        EquilibriumComponent(
            name="X",
            energy=0.0,
            offset=(0.0, 0.0),
            generators=((2,), (2,)),
            relations=(),
            pivots=(0,),
        )


def test_pivot_count_must_match_dimension() -> None:
    """One pivot per generator column."""
    with pytest.raises(DimensionMismatch):
        EquilibriumComponent(
            name="X",
            energy=0.0,
            offset=(0.0, 0.0),
            generators=((1,), (1,)),
            relations=(),
            pivots=(0, 1),
        )


def test_verify_rejects_wrong_energy(rng: np.random.Generator) -> None:
    """A catalog entry with a wrong reference energy fails verification."""
    s = {c.name: c for c in complete4_components()}["S"]
    bogus = dataclasses.replace(s, energy=5.0)
    with pytest.raises(NotEquilibriumError):
        bogus.verify(generate(Complete(4)), rng)


def test_verify_rejects_non_equilibrium(rng: np.random.Generator) -> None:
    """The K4 catalog is not a catalog of the 4-cycle."""
    b1 = {c.name: c for c in complete4_components()}["B1"]
    with pytest.raises(NotEquilibriumError):
        b1.verify(generate(Cycle(4)), rng)


# =============================================================================
# Lookup and Intersections
# =============================================================================


def test_components_for() -> None:
    """Catalogs exist for K4 and C4 only."""
    assert [c.name for c in components_for(Cycle(4))] == ["A5", "B2", "C1", "C2", "S"]
    assert len(components_for(Complete(4))) == 8
    with pytest.raises(CatalogError):
        components_for(Cycle(5))


def test_components_for_graph() -> None:
    """Lookup by edge set works for graphs read from files."""
    assert len(components_for_graph(generate(Complete(4)))) == 8
    with pytest.raises(CatalogError):
        components_for_graph(generate(Cycle(5)))


def test_k4_tori_intersect_at_two_pair_points() -> None:
    """(0, pi, pi, 0) lies on B1 and B2 but not B3."""
    hits = matching_components([0.0, PI, PI, 0.0], complete4_components(), 1e-9)
    assert [c.name for c in hits] == ["B1", "B2"]


def test_c4_components_meet_at_splay() -> None:
    """B2, C1 and C2 all contain the splay state."""
    hits = matching_components(splay(4), cycle4_components(), 1e-9)
    assert [c.name for c in hits] == ["B2", "C1", "C2"]


# =============================================================================
# Nearest Member
# =============================================================================


def test_nearest_member_projects_onto_closest_component() -> None:
    """A point just off B3 maps to the B3 member sharing its pivot phases."""
    c = np.array([0.4, 1.3, 1.3 + PI, 0.4 + PI + 1e-5])
    hit = nearest_member(c, complete4_components(), max_distance=1e-2)
    assert hit is not None
    comp, member = hit
    assert comp.name == "B3"
    assert comp.violation(member) <= 1e-12
    assert member[0] == pytest.approx(0.4)
    assert torus_distance(member, c) <= 1e-5


def test_nearest_member_respects_max_distance() -> None:
    """Points far from every component get no member."""
    assert nearest_member([0.0, 1.0, 2.0, 3.5], complete4_components(), max_distance=1e-2) is None
    assert nearest_member([0.0, 1.0, 2.0, 3.5], [], max_distance=1.0) is None


def test_nearest_member_on_c4_near_splay() -> None:
    """Next to the splay state of C4 the chosen member is an equilibrium."""
    g = generate(Cycle(4))
    hit = nearest_member(reduce(splay(4) + [0.0, 2e-4, -1e-4, 3e-4]), cycle4_components(), 1e-2)
    assert hit is not None
    assert residual(g, hit[1]) <= 1e-12
