"""Numerical probing of connecting orbits between equilibrium components.

Every component is perturbed off its tangent space in random directions. The
perturbed states are integrated forward (revealing arcs out of the component)
and in reversed time (revealing arcs into it). An endpoint counts only when
it has settled (residual below the stop threshold) and lies on exactly one
cataloged component. Arcs always run from higher to strictly lower energy.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.components import EquilibriumComponent
from kuramoto_tori.defaults import (
    MEMBERSHIP_TOL,
    PROBE_DT,
    PROBE_EPS,
    PROBE_EPS_DEGENERATE,
    PROBE_T_END,
    PROBE_TRIALS,
    REPRESENTATIVE_CANDIDATES,
    STOP_RESIDUAL,
)
from kuramoto_tori.dynamics import Direction, integrate_batch
from kuramoto_tori.equilibria import is_completely_degenerate, smallest_nonzero_magnitude
from kuramoto_tori.graphs import Graph
from kuramoto_tori.phasecfg import canonicalize
from kuramoto_tori.workers import ordered_map

logger = logging.getLogger(__name__)


def identify_component(
    c: ArrayLike, components: Sequence[EquilibriumComponent], tol: float = MEMBERSHIP_TOL
) -> Optional[str]:
    """Name of the unique component containing c within tol, or None (unknown)."""
    hits = [comp.name for comp in components if comp.contains(c, tol)]
    return hits[0] if len(hits) == 1 else None


@dataclass(frozen=True)
class IntegratorParams:
    """Integration settings shared by all probes."""

    dt: float = PROBE_DT
    t_end: float = PROBE_T_END
    stop_residual: float = STOP_RESIDUAL


@dataclass(frozen=True)
class Witness:
    """Summary of one trajectory supporting an arc.

    Attributes:
        probed: Component that was perturbed.
        direction: Time direction of the integration.
        trial: Index of the perturbation.
        perturbation: Perturbation vector added to the representative.
        endpoint: Canonicalized settled state.
        final_distance: Distance of the endpoint to the component it was labeled with.
        stop_time: Integration time at which the trajectory settled.
    """

    probed: str
    direction: str
    trial: int
    perturbation: Tuple[float, ...]
    endpoint: Tuple[float, ...]
    final_distance: float
    stop_time: float


@dataclass
class Arc:
    """Observed connection with its supporting witnesses."""

    source: str
    target: str
    witness_count: int = 0
    witness: Optional[Witness] = None


@dataclass(frozen=True)
class Miss:
    """Trajectory whose endpoint could not be used."""

    probed: str
    direction: str
    trial: int
    reason: str
    endpoint: Tuple[float, ...]


@dataclass
class HeteroclinicDigraph:
    """Components as nodes, observed connections as arcs.

    Attributes:
        nodes: Component name to reference energy.
        arcs: (source, target) to Arc.
        misses: Trajectories that ended unsettled or unlabeled.
    """

    nodes: Dict[str, float] = field(default_factory=dict)
    arcs: Dict[Tuple[str, str], Arc] = field(default_factory=dict)
    misses: List[Miss] = field(default_factory=list)

    def node_order(self) -> List[str]:
        """Names sorted by energy descending, then name."""
        return sorted(self.nodes, key=lambda name: (-self.nodes[name], name))

    def sorted_arcs(self) -> List[Arc]:
        """Arcs in node order of source, then target."""
        rank = {name: i for i, name in enumerate(self.node_order())}
        return [self.arcs[k] for k in sorted(self.arcs, key=lambda k: (rank[k[0]], rank[k[1]]))]

    def arc_set(self) -> set[Tuple[str, str]]:
        """Set of (source, target) pairs."""
        return set(self.arcs)

    def record(self, source: str, target: str, witness: Witness) -> None:
        """Add a witness for source -> target, keeping the first witness as representative."""
        arc = self.arcs.setdefault((source, target), Arc(source=source, target=target))
        arc.witness_count += 1
        if arc.witness is None:
            arc.witness = witness


# ============================================================================
# Probing
# ============================================================================


@dataclass
class _Outcome:
    name: str
    arcs: List[Tuple[str, str, Witness]]
    misses: List[Miss]


def choose_representative(
    g: Graph, comp: EquilibriumComponent, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Member with the best-conditioned transversal spectrum among a few samples."""
    candidates = comp.sample(rng, REPRESENTATIVE_CANDIDATES)
    scores = [smallest_nonzero_magnitude(g, c) for c in candidates]
    return np.asarray(candidates[int(np.argmax(scores))])


def _tangent_free_directions(
    comp: EquilibriumComponent, rng: np.random.Generator, trials: int
) -> NDArray[np.float64]:
    q = comp.tangent_basis()
    dirs = rng.standard_normal((trials, comp.n))
    dirs -= (dirs @ q) @ q.T
    norms = np.linalg.norm(dirs, axis=1, keepdims=True)
    return np.asarray(dirs / np.where(norms > 0, norms, 1.0))


def _probe_component(
    g: Graph,
    comp: EquilibriumComponent,
    components: Sequence[EquilibriumComponent],
    perturb_eps: float,
    trials: int,
    integ: IntegratorParams,
    rng: np.random.Generator,
    membership_tol: float,
) -> _Outcome:
    by_name = {c.name: c for c in components}
    rep = choose_representative(g, comp, rng)
    eps = PROBE_EPS_DEGENERATE if is_completely_degenerate(g, rep) else perturb_eps
    perturbations = eps * _tangent_free_directions(comp, rng, trials)
    starts = rep + perturbations

    arcs: List[Tuple[str, str, Witness]] = []
    misses: List[Miss] = []
    direction: Direction
    for direction in ("forward", "reversed"):
        batch = integrate_batch(
            g,
            starts,
            dt=integ.dt,
            t_end=integ.t_end,
            direction=direction,
            stop_residual=integ.stop_residual,
        )
        for trial in range(trials):
            end = canonicalize(batch.final_states[trial])
            end_t = tuple(float(x) for x in end)
            if not batch.converged[trial]:
                misses.append(Miss(comp.name, direction, trial, "not settled", end_t))
                continue
            label = identify_component(end, components, membership_tol)
            if label is None:
                misses.append(Miss(comp.name, direction, trial, "unlabeled", end_t))
                continue
            if label == comp.name:
                continue

            source, target = (comp.name, label) if direction == "forward" else (label, comp.name)
            if not by_name[source].energy > by_name[target].energy:
                logger.debug(f"Discarding {source}->{target}: energy does not decrease")
                continue
            if not batch.monotone[trial]:
                logger.debug(f"Discarding {source}->{target}: energy not monotone")
                continue

            final_distance = by_name[label].distance(end)
            if final_distance > membership_tol:
                misses.append(Miss(comp.name, direction, trial, "far from component", end_t))
                continue
            witness = Witness(
                probed=comp.name,
                direction=direction,
                trial=trial,
                perturbation=tuple(float(x) for x in perturbations[trial]),
                endpoint=end_t,
                final_distance=final_distance,
                stop_time=float(batch.stop_times[trial]),
            )
            arcs.append((source, target, witness))

    logger.info(
        f"Probed {comp.name} (eps={eps:g}): {len(arcs)} witnesses, {len(misses)} misses"
    )
    return _Outcome(name=comp.name, arcs=arcs, misses=misses)


def probe(
    g: Graph,
    components: Sequence[EquilibriumComponent],
    perturb_eps: float = PROBE_EPS,
    trials: int = PROBE_TRIALS,
    integ: IntegratorParams = IntegratorParams(),
    seed: int = 0,
    membership_tol: float = MEMBERSHIP_TOL,
    max_workers: int = 1,
) -> HeteroclinicDigraph:
    """Map connections between components by perturb-and-integrate.

    Each component gets its own random stream spawned from seed, so the
    digraph is identical for a given seed whatever the worker count.

    Raises:
        NotEquilibriumError: If a component's sampled members are not equilibria.
    """
    streams = np.random.SeedSequence(seed).spawn(len(components) + 1)
    check_rng = np.random.default_rng(streams[-1])
    for comp in components:
        comp.verify(g, check_rng)

    jobs = list(zip(components, streams[:-1]))
    outcomes = ordered_map(
        lambda job: _probe_component(
            g,
            job[0],
            components,
            perturb_eps,
            trials,
            integ,
            np.random.default_rng(job[1]),
            membership_tol,
        ),
        jobs,
        max_workers,
    )

    h = HeteroclinicDigraph(nodes={c.name: c.energy for c in components})
    for outcome in outcomes:
        for source, target, witness in outcome.arcs:
            h.record(source, target, witness)
        h.misses.extend(outcome.misses)

    if h.misses:
        logger.warning(f"{len(h.misses)} probe trajectories ended unsettled or unlabeled")
    logger.info(f"Heteroclinic digraph: {len(h.nodes)} nodes, {len(h.arcs)} arcs")
    return h


# ============================================================================
# Export
# ============================================================================


def _quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def export_dot(h: HeteroclinicDigraph, comments: Sequence[str] = ()) -> str:
    """Deterministic DOT text; nodes carry energies, arcs carry witness counts.

    Args:
        h: Digraph to render.
        comments: Lines emitted as '// ...' before the graph.
    """
    lines = [f"// {line}" for line in comments]
    lines.append("digraph heteroclinic {")
    for name in h.node_order():
        lines.append(f'  {_quote(name)} [label="{name}\\nE={h.nodes[name]:g}"];')
    for arc in h.sorted_arcs():
        lines.append(f'  {_quote(arc.source)} -> {_quote(arc.target)} [label="{arc.witness_count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def digraph_to_dict(h: HeteroclinicDigraph) -> Dict[str, Any]:
    """JSON-ready arc list with witness metadata."""
    return {
        "nodes": [{"name": name, "energy": h.nodes[name]} for name in h.node_order()],
        "arcs": [
            {
                "source": arc.source,
                "target": arc.target,
                "witness_count": arc.witness_count,
                "witness": asdict(arc.witness) if arc.witness is not None else None,
            }
            for arc in h.sorted_arcs()
        ],
        "miss_count": len(h.misses),
    }


def export_json(h: HeteroclinicDigraph, meta: Optional[Dict[str, Any]] = None) -> str:
    """JSON text of digraph_to_dict, with an optional metadata block."""
    payload: Dict[str, Any] = {}
    if meta is not None:
        payload["meta"] = meta
    payload.update(digraph_to_dict(h))
    return json.dumps(payload, indent=2) + "\n"


def export_misses(h: HeteroclinicDigraph, meta: Optional[Dict[str, Any]] = None) -> str:
    """JSON text listing the trajectories that produced no usable endpoint."""
    payload: Dict[str, Any] = {}
    if meta is not None:
        payload["meta"] = meta
    payload["misses"] = [asdict(m) for m in h.misses]
    return json.dumps(payload, indent=2) + "\n"
