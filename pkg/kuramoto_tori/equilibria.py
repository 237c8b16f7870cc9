"""Equilibrium families: product tori, aligned equilibria, bipartite cases, numerical search.

A partition J_1..J_d of the vertices gives a d-torus of equilibria when every
part is an equilibrium on its own and every vertex sees a balanced set of
neighbors in each foreign part. Shifting each part by its own angle then
keeps every vertex in equilibrium.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.collector import EquilibriumCollector
from kuramoto_tori.components import EquilibriumComponent, nearest_member
from kuramoto_tori.defaults import (
    ALIGNED_ENUMERATION_LIMIT,
    BALANCE_TOL,
    DEDUP_DISTANCE,
    DESCENT_STEPS,
    LATTICE_SEED_LIMIT,
    NEWTON_MAX_ITER,
    NEWTON_TOL,
    SNAP_DISTANCE,
    SNAP_RESIDUAL,
    TWO_PI,
)
from kuramoto_tori.dynamics import energy, residual, rhs
from kuramoto_tori.errors import (
    DimensionMismatch,
    EnumerationLimitError,
    NotEquilibriumError,
    PartitionError,
)
from kuramoto_tori.graphs import (
    Complete,
    CompleteBipartite,
    Cycle,
    EyeGd,
    Graph,
    GraphFamily,
    TwoFullyJoinedCycles,
    anchor_map,
    innermost,
    natural_partition,
)
from kuramoto_tori.phasecfg import as_phases, is_aligned, reduce, splay
from kuramoto_tori.spectral import jacobian, spectrum
from kuramoto_tori.workers import ordered_map

logger = logging.getLogger(__name__)


# ============================================================================
# Partitions and Product Tori
# ============================================================================


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty vertex parts covering 0..n-1.

    Attributes:
        parts: Sorted vertex tuples.
        n: Number of vertices covered.
    """

    parts: Tuple[Tuple[int, ...], ...]
    n: int

    def __post_init__(self) -> None:
        """Validate disjointness, coverage and non-emptiness."""
        normalized = tuple(tuple(sorted(int(v) for v in p)) for p in self.parts)
        object.__setattr__(self, "parts", normalized)

        if not normalized:
            raise PartitionError("partition needs at least one part")
        seen: set[int] = set()
        for i, part in enumerate(normalized):
            if not part:
                raise PartitionError(f"part {i} is empty")
            overlap = seen.intersection(part)
            if overlap:
                raise PartitionError(f"parts overlap at vertices {sorted(overlap)}")
            seen.update(part)
        if seen != set(range(self.n)):
            missing = sorted(set(range(self.n)) - seen)
            extra = sorted(seen - set(range(self.n)))
            raise PartitionError(f"partition does not cover 0..{self.n - 1}: missing {missing}, extra {extra}")

    @property
    def d(self) -> int:
        """Number of parts."""
        return len(self.parts)

    def labels(self) -> NDArray[np.intp]:
        """Part index of every vertex."""
        out = np.empty(self.n, dtype=np.intp)
        for i, part in enumerate(self.parts):
            out[list(part)] = i
        return out

    @classmethod
    def from_family(cls, family: GraphFamily) -> "Partition":
        """Natural partition of a generated family."""
        parts = natural_partition(family)
        return cls(parts=parts, n=sum(len(p) for p in parts))


def verify_lemma_conditions(g: Graph, p: Partition, c: ArrayLike, tol: float = BALANCE_TOL) -> bool:
    """Check the product-torus conditions for a configuration.

    True iff each part is an equilibrium of its induced subgraph and, for
    every vertex j and every other part J_q, the neighbors of j in J_q form
    a balanced set (empty sets count as balanced).

    Raises:
        PartitionError: If p does not cover exactly the vertices of g.
        DimensionMismatch: If c does not have length g.n.
    """
    if p.n != g.n:
        raise PartitionError(f"partition covers {p.n} vertices, graph has {g.n}")
    theta = np.asarray(c, dtype=np.float64)
    if theta.shape != (g.n,):
        raise DimensionMismatch(f"configuration shape {theta.shape} does not match n={g.n}")

    labels = p.labels()
    same = labels[g.src] == labels[g.dst]
    s = np.sin(theta[g.dst] - theta[g.src]) * same
    internal = np.abs(s @ g.incidence.T)
    if float(np.max(internal, initial=0.0)) > tol:
        logger.debug(f"Part-internal residual {float(np.max(internal)):.3e} exceeds {tol}")
        return False

    # z[j, q] = sum of e^{i theta_k} over neighbors k of j in part q
    onehot = np.zeros((g.n, p.d))
    onehot[np.arange(g.n), labels] = 1.0
    z = g.adjacency @ (onehot * np.exp(1j * theta)[:, None])
    z[np.arange(g.n), labels] = 0.0
    worst = float(np.max(np.abs(z), initial=0.0))
    if worst > tol:
        logger.debug(f"Foreign neighbor set unbalanced: |sum| = {worst:.3e}")
        return False
    return True


def build_torus_config(
    base: Sequence[ArrayLike], p: Partition, shifts: Sequence[float]
) -> NDArray[np.float64]:
    """Shift part J_i of the base configuration by shifts[i].

    Args:
        base: One phase vector per part, ordered like the part's sorted vertices.
        p: Partition.
        shifts: One angle per part.

    Raises:
        DimensionMismatch: If the number of shifts or a part's phase count is wrong.
    """
    if len(shifts) != p.d:
        raise DimensionMismatch(f"expected {p.d} shifts, got {len(shifts)}")
    if len(base) != p.d:
        raise DimensionMismatch(f"expected {p.d} base phase vectors, got {len(base)}")

    out = np.empty(p.n)
    for part, phases, alpha in zip(p.parts, base, shifts):
        arr = np.asarray(phases, dtype=np.float64)
        if arr.shape != (len(part),):
            raise DimensionMismatch(f"part of size {len(part)} got {arr.shape[0]} phases")
        out[list(part)] = arr + alpha
    return reduce(out)


@dataclass(frozen=True)
class TorusBase:
    """Base configuration of a product torus together with its partition.

    Attributes:
        partition: Vertex parts.
        phases: Full base configuration (length n).
    """

    partition: Partition
    phases: NDArray[np.float64]

    @property
    def d(self) -> int:
        """Torus dimension."""
        return self.partition.d

    @property
    def part_phases(self) -> List[NDArray[np.float64]]:
        """Base phases split by part."""
        return [self.phases[list(part)] for part in self.partition.parts]

    def configuration(self, shifts: Sequence[float]) -> NDArray[np.float64]:
        """Point of the torus at the given per-part shifts."""
        return build_torus_config(self.part_phases, self.partition, shifts)

    def reference_shifts(self) -> Tuple[float, ...]:
        """Shifts (0, pi/2, ..., pi/2)."""
        return (0.0,) + (math.pi / 2.0,) * (self.d - 1)


def _simple_phases(family: GraphFamily) -> NDArray[np.float64]:
    if isinstance(family, (Cycle, Complete)):
        return splay(family.n)
    if isinstance(family, CompleteBipartite):
        if family.n >= 2 and family.m >= 2:
            return np.concatenate([splay(family.n), splay(family.m)])
        return np.zeros(family.n + family.m)
    if isinstance(family, EyeGd):
        return np.tile(splay(6), family.d)
    if isinstance(family, TwoFullyJoinedCycles):
        return np.tile(splay(family.n), 2)
    raise TypeError(f"not a simple family: {family!r}")


def torus_base(family: GraphFamily) -> TorusBase:
    """Splay-based product torus of a family.

    Cycles of eye graphs and joined-cycle graphs, and the sides of a complete
    bipartite graph, carry splay states. Copies inherit the phase of their
    base vertex and pendant paths the phase of their anchor.
    """
    inner = _simple_phases(innermost(family))
    phases = inner[np.asarray(anchor_map(family), dtype=np.intp)]
    return TorusBase(partition=Partition.from_family(family), phases=reduce(phases))


# ============================================================================
# Aligned Equilibria
# ============================================================================


def aligned_equilibria(g: Graph) -> List[NDArray[np.float64]]:
    """All 2^(n-1) aligned configurations with theta_0 = 0.

    Every aligned configuration is an equilibrium since sin(0) = sin(pi) = 0.

    Raises:
        EnumerationLimitError: If n exceeds the enumeration guard.
    """
    if g.n > ALIGNED_ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"aligned enumeration for n={g.n} exceeds the limit of {ALIGNED_ENUMERATION_LIMIT}"
        )
    return [
        np.array((0.0,) + tuple(math.pi * b for b in bits))
        for bits in itertools.product((0, 1), repeat=g.n - 1)
    ]


def aligned_descent_gap(g: Graph, c: ArrayLike, x: float = 0.1) -> float:
    """Energy drop when the pi-side of an aligned configuration is rotated by x.

    The side is the set of vertices whose phase differs from theta_0 by pi.
    The drop equals |E(J, K)| (1 - cos x), positive whenever the two sides
    are joined by an edge.

    Raises:
        NotEquilibriumError: If c is not aligned.
    """
    theta = as_phases(c)
    if not is_aligned(theta):
        raise NotEquilibriumError("configuration is not aligned")
    flipped = np.abs(np.cos(theta - theta[0]) + 1.0) < 1e-6
    perturbed = theta + x * flipped
    return float(energy(g, theta)) - float(energy(g, perturbed))


# ============================================================================
# Complete Bipartite Graphs
# ============================================================================


class BipartiteCase(Enum):
    """Equilibrium cases on a complete bipartite graph."""

    BOTH_BALANCED = "both_balanced"
    K_BALANCED_ALIGNED_TO_J = "k_balanced_aligned_to_j"
    J_BALANCED_ALIGNED_TO_K = "j_balanced_aligned_to_k"
    ALIGNED = "aligned"
    NOT_EQUILIBRIUM = "not_equilibrium"


def classify_bipartite(
    c: ArrayLike, J: Iterable[int], K: Iterable[int], tol: float = BALANCE_TOL
) -> BipartiteCase:
    """Classify a configuration on the complete bipartite graph with sides J and K.

    Priority: ALIGNED, then BOTH_BALANCED (which absorbs a vanishing order
    parameter on either side), then the one-sided cases. At an equilibrium a
    non-balanced side is automatically aligned to the other side's order
    parameter; when neither side is balanced the whole configuration is
    aligned.

    Raises:
        PartitionError: If J and K do not partition the vertices of c.
    """
    theta = as_phases(c)
    j_idx, k_idx = sorted(set(J)), sorted(set(K))
    if not j_idx or not k_idx:
        raise PartitionError("both sides must be nonempty")
    if set(j_idx) & set(k_idx) or set(j_idx) | set(k_idx) != set(range(theta.size)):
        raise PartitionError(f"J={j_idx}, K={k_idx} do not partition 0..{theta.size - 1}")

    z_j = np.sum(np.exp(1j * theta[j_idx]))
    z_k = np.sum(np.exp(1j * theta[k_idx]))
    res_j = np.abs(np.imag(np.exp(-1j * theta[j_idx]) * z_k))
    res_k = np.abs(np.imag(np.exp(-1j * theta[k_idx]) * z_j))
    if max(float(np.max(res_j)), float(np.max(res_k))) > tol:
        return BipartiteCase.NOT_EQUILIBRIUM

    if is_aligned(theta, tol=tol):
        return BipartiteCase.ALIGNED
    j_bal, k_bal = abs(z_j) <= tol, abs(z_k) <= tol
    if j_bal and k_bal:
        return BipartiteCase.BOTH_BALANCED
    if k_bal:
        return BipartiteCase.K_BALANCED_ALIGNED_TO_J
    if j_bal:
        return BipartiteCase.J_BALANCED_ALIGNED_TO_K
    logger.debug("Neither side balanced at an equilibrium; classified as aligned")
    return BipartiteCase.ALIGNED


# ============================================================================
# Numerical Search
# ============================================================================


def seed_configurations(
    n: int, count: int, rng: np.random.Generator, lattice: bool = True
) -> NDArray[np.float64]:
    """Uniform random seeds, followed by the pi/3 lattice with theta_0 = 0.

    The lattice has 6^(n-1) points and is truncated to LATTICE_SEED_LIMIT.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    seeds = [rng.uniform(0.0, TWO_PI, size=(count, n))]
    if lattice:
        points = itertools.islice(itertools.product(range(6), repeat=n - 1), LATTICE_SEED_LIMIT)
        grid = np.array([(0,) + p for p in points], dtype=np.float64) * (math.pi / 3.0)
        seeds.append(grid.reshape(-1, n))
    return np.vstack(seeds)


@dataclass(frozen=True)
class Refinement:
    """Result of refining one seed.

    Attributes:
        phases: Refined configuration.
        residual: Max-norm of rhs at phases.
        iterations: Newton iterations used.
        converged: residual <= the requested Newton tolerance.
    """

    phases: NDArray[np.float64]
    residual: float
    iterations: int
    converged: bool


def _residual_descent(g: Graph, theta: NDArray[np.float64], steps: int) -> NDArray[np.float64]:
    """Gradient descent on 0.5 |rhs|^2 for a stack of configurations."""
    if steps <= 0 or g.edge_count == 0:
        return theta
    max_deg = float(np.max(g.degrees))
    eta = 1.0 / (2.0 * max_deg) ** 2
    y = theta.copy()
    for _ in range(steps):
        f = rhs(g, y)
        w = np.cos(y[..., g.dst] - y[..., g.src])
        df = f[..., g.dst] - f[..., g.src]
        # J f, evaluated edge by edge
        jf = (w * df) @ g.incidence.T
        y = y - eta * jf
    return reduce(y)


def _newton(
    g: Graph, theta: NDArray[np.float64], newton_tol: float, max_iter: int
) -> Refinement:
    y = theta.copy()
    f = rhs(g, y)
    norm = float(np.linalg.norm(f))
    iterations = 0

    for iterations in range(1, max_iter + 1):
        if float(np.max(np.abs(f))) <= min(1e-14, newton_tol):
            iterations -= 1
            break
        jac = jacobian(g, y)
        # Gauge: theta_0 stays fixed
        step = np.linalg.lstsq(jac[1:, 1:], -f[1:], rcond=None)[0]

        lam = 1.0
        accepted = False
        for _ in range(30):
            trial = y.copy()
            trial[1:] += lam * step
            f_trial = rhs(g, trial)
            norm_trial = float(np.linalg.norm(f_trial))
            if norm_trial < norm:
                y, f, norm = trial, f_trial, norm_trial
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break

    res = float(np.max(np.abs(f)))
    return Refinement(
        phases=reduce(y), residual=res, iterations=iterations, converged=res <= newton_tol
    )


def _snap(
    g: Graph,
    r: Refinement,
    components: Sequence[EquilibriumComponent],
    newton_tol: float,
) -> Refinement:
    """Replace a near-equilibrium by its projection onto the nearest component."""
    if not components or r.residual > SNAP_RESIDUAL:
        return r
    hit = nearest_member(r.phases, components, SNAP_DISTANCE)
    if hit is None:
        return r
    comp, member = hit
    res = float(residual(g, member))
    if res > max(newton_tol, r.residual):
        return r
    logger.debug(f"Snapped onto {comp.name}: residual {r.residual:.3e} -> {res:.3e}")
    return Refinement(
        phases=member, residual=res, iterations=r.iterations, converged=res <= newton_tol
    )


def refine_equilibrium(
    g: Graph,
    seed: ArrayLike,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    descent_steps: int = DESCENT_STEPS,
) -> Refinement:
    """Descent on the squared residual, then damped Newton in the gauge theta_0 fixed."""
    theta = as_phases(seed)
    if theta.size != g.n:
        raise DimensionMismatch(f"seed of length {theta.size} for n={g.n}")
    start = _residual_descent(g, theta[None, :], descent_steps)[0]
    return _newton(g, start, newton_tol, max_iter)


@dataclass
class SearchResult:
    """Outcome of an equilibrium search.

    Attributes:
        equilibria: Deduplicated refined equilibria, in seed order.
        refinements: Per-seed refinement results.
    """

    equilibria: List[NDArray[np.float64]]
    refinements: List[Refinement]

    @property
    def failed(self) -> int:
        """Seeds that did not reach the Newton tolerance."""
        return sum(1 for r in self.refinements if not r.converged)


def search_equilibria(
    g: Graph,
    seeds: ArrayLike,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    descent_steps: int = DESCENT_STEPS,
    dedup_distance: float = DEDUP_DISTANCE,
    max_workers: int = 1,
    components: Sequence[EquilibriumComponent] = (),
) -> SearchResult:
    """Refine every seed and merge the converged ones up to phase shift.

    Seeds are refined independently (in parallel when max_workers > 1); the
    merge runs in seed order so the result does not depend on scheduling.

    Args:
        components: Known equilibrium components of g. A refined point within
            SNAP_DISTANCE of one of them is replaced by its projection onto
            it, provided the projection is at least as good an equilibrium.
    """
    stack = reduce(np.atleast_2d(np.asarray(seeds, dtype=np.float64)))
    if stack.shape[1] != g.n:
        raise DimensionMismatch(f"seeds have length {stack.shape[1]}, graph has n={g.n}")

    descended = _residual_descent(g, stack, descent_steps)
    refinements = ordered_map(
        lambda y: _snap(g, _newton(g, y, newton_tol, max_iter), components, newton_tol),
        list(descended),
        max_workers,
    )

    collector = EquilibriumCollector(g.n, dedup_distance)
    for r in refinements:
        if r.converged:
            collector.add(r.phases)
        else:
            logger.debug(f"Seed not converged: residual {r.residual:.3e} after {r.iterations} iterations")

    result = SearchResult(equilibria=collector.snapshot(), refinements=refinements)
    if result.failed:
        logger.warning(f"{result.failed} of {len(refinements)} seeds did not converge")
    logger.info(f"Found {len(result.equilibria)} distinct equilibria from {len(refinements)} seeds")
    return result


def find_equilibria(
    g: Graph,
    seeds: ArrayLike,
    newton_tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    max_workers: int = 1,
    components: Sequence[EquilibriumComponent] = (),
) -> List[NDArray[np.float64]]:
    """Refined, deduplicated equilibria reached from the seeds.

    Non-converged seeds are logged and skipped.
    """
    return search_equilibria(
        g,
        seeds,
        newton_tol=newton_tol,
        max_iter=max_iter,
        max_workers=max_workers,
        components=components,
    ).equilibria


def is_completely_degenerate(g: Graph, c: ArrayLike, tol: float = 1e-8) -> bool:
    """True iff every Jacobian eigenvalue at the equilibrium c is within tol of zero.

    Raises:
        NotEquilibriumError: If residual(c) > tol.
    """
    res = float(residual(g, c))
    if res > tol:
        raise NotEquilibriumError(f"residual {res:.3e} exceeds {tol}")
    report = spectrum(jacobian(g, c), zero_tol=tol)
    return report.zero_count == report.n


def smallest_nonzero_magnitude(g: Graph, c: ArrayLike) -> float:
    """Smallest |lambda| outside the zero band, or 0 for a completely degenerate point."""
    nz = spectrum(jacobian(g, c)).nonzero()
    return float(np.min(np.abs(nz))) if nz.size else 0.0
