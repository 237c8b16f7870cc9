"""Graph representation and generators for the oscillator network families.

Vertices are labeled 0..n-1. A Graph is immutable once built; its numpy
views (edge endpoint arrays, incidence and adjacency matrices) are computed
lazily and marked read-only so that workers may share one instance.

Families are small frozen dataclasses. ``generate`` turns a family into a
Graph with a fixed vertex numbering:

- EyeGd(d): cycle i occupies 6i..6i+5 in cycle order; for i >= 1 the
  vertices 0 and 3 of cycle 0 are joined to vertices 6i and 6i+3.
- Blowup(base, k) and ParallelCopies(base, k): copy p of base vertex v is
  vertex v*k + p.
- AsymmetricEnlargement(base): the pendant path of base vertex j is
  appended after all earlier paths, nearest vertex first.
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Tuple, Union

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from kuramoto_tori.errors import GraphError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
Parts = Tuple[Tuple[int, ...], ...]


# ============================================================================
# Graph
# ============================================================================


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1.

    Attributes:
        n: Vertex count (>= 1).
        edges: Sorted tuple of (u, v) pairs with u < v. Any iterable of pairs
            is accepted at construction and normalized.
    """

    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self) -> None:
        """Normalize the edge set and validate it."""
        if self.n < 1:
            raise GraphError(f"vertex count must be positive, got {self.n}")

        normalized: List[Edge] = []
        for pair in self.edges:
            u, v = (int(x) for x in pair)
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside [0, {self.n})")
            normalized.append((min(u, v), max(u, v)))

        unique = sorted(set(normalized))
        if len(unique) != len(normalized):
            raise GraphError("duplicate edge in edge set")
        object.__setattr__(self, "edges", tuple(unique))

    @property
    def edge_count(self) -> int:
        """Number of undirected edges."""
        return len(self.edges)

    @cached_property
    def src(self) -> NDArray[np.intp]:
        """Smaller endpoint of every edge."""
        arr = np.array([e[0] for e in self.edges], dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def dst(self) -> NDArray[np.intp]:
        """Larger endpoint of every edge."""
        arr = np.array([e[1] for e in self.edges], dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def incidence(self) -> NDArray[np.float64]:
        """Signed n x m incidence matrix, +1 at the smaller endpoint, -1 at the larger."""
        b = np.zeros((self.n, self.edge_count))
        cols = np.arange(self.edge_count)
        b[self.src, cols] = 1.0
        b[self.dst, cols] = -1.0
        b.setflags(write=False)
        return b

    @cached_property
    def adjacency(self) -> NDArray[np.float64]:
        """Dense 0/1 adjacency matrix."""
        a = np.zeros((self.n, self.n))
        a[self.src, self.dst] = 1.0
        a[self.dst, self.src] = 1.0
        a.setflags(write=False)
        return a

    @cached_property
    def degrees(self) -> NDArray[np.int64]:
        """Vertex degrees."""
        deg = np.bincount(np.concatenate([self.src, self.dst]), minlength=self.n)
        deg = deg.astype(np.int64)
        deg.setflags(write=False)
        return deg

    @cached_property
    def _neighbor_sets(self) -> Tuple[FrozenSet[int], ...]:
        adj: List[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(s) for s in adj)

    def has_edge(self, u: int, v: int) -> bool:
        """Adjacency query."""
        return v in neighbors(self, u)

    def to_networkx(self) -> nx.Graph:
        """Build an equivalent networkx graph (all n vertices present)."""
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        """Build a Graph from a networkx graph whose nodes are 0..n-1."""
        n = g.number_of_nodes()
        if set(g.nodes) != set(range(n)):
            raise GraphError("networkx graph nodes must be labeled 0..n-1")
        return cls(n=n, edges=tuple((int(u), int(v)) for u, v in g.edges))


def neighbors(g: Graph, j: int) -> FrozenSet[int]:
    """Return the neighbor set N(j).

    Raises:
        GraphError: If j is not a vertex of g.
    """
    if not (0 <= j < g.n):
        raise GraphError(f"vertex {j} out of range [0, {g.n})")
    return g._neighbor_sets[j]


def is_connected(g: Graph) -> bool:
    """True iff g has exactly one connected component."""
    return bool(nx.is_connected(g.to_networkx()))


# ============================================================================
# Families
# ============================================================================


@dataclass(frozen=True)
class Cycle:
    """Cycle on n >= 3 vertices."""

    n: int


@dataclass(frozen=True)
class Complete:
    """Complete graph on n >= 1 vertices."""

    n: int


@dataclass(frozen=True)
class CompleteBipartite:
    """Complete bipartite graph; side J is 0..n-1, side K is n..n+m-1."""

    n: int
    m: int


@dataclass(frozen=True)
class EyeGd:
    """d six-cycles joined through the first and fourth vertex of cycle 0."""

    d: int


@dataclass(frozen=True)
class TwoFullyJoinedCycles:
    """Two disjoint n-cycles plus all n^2 edges between them."""

    n: int


@dataclass(frozen=True)
class Blowup:
    """Every base vertex replaced by k copies, adjacent copy classes joined completely."""

    base: "GraphFamily"
    k: int


@dataclass(frozen=True)
class ParallelCopies:
    """k copies of the base connected in parallel.

    Edges inside a natural part of the base are joined completely between
    copy classes (as in a blow-up). Edges between parts are kept only
    between the copy-0 vertices.
    """

    base: "GraphFamily"
    k: int


@dataclass(frozen=True)
class AsymmetricEnlargement:
    """Base graph with a pendant path of length j+1 attached to vertex j."""

    base: "GraphFamily"


GraphFamily = Union[
    Cycle,
    Complete,
    CompleteBipartite,
    EyeGd,
    TwoFullyJoinedCycles,
    Blowup,
    ParallelCopies,
    AsymmetricEnlargement,
]

# Named stable-torus graphs
PRESETS: Dict[str, GraphFamily] = {
    "h36": ParallelCopies(EyeGd(2), 3),
    "h60": ParallelCopies(EyeGd(2), 5),
    "h90": ParallelCopies(TwoFullyJoinedCycles(5), 9),
    "h36-blowup": Blowup(EyeGd(2), 3),
    "h60-blowup": Blowup(EyeGd(2), 5),
    "h90-blowup": Blowup(TwoFullyJoinedCycles(5), 9),
}

EXPERIMENTAL_PRESETS: FrozenSet[str] = frozenset({"h60", "h60-blowup"})


def validate_family(family: GraphFamily) -> None:
    """Check family parameters recursively.

    Raises:
        GraphError: On a nonpositive or otherwise invalid parameter.
    """
    if isinstance(family, Cycle):
        if family.n < 3:
            raise GraphError(f"Cycle needs n >= 3, got {family.n}")
    elif isinstance(family, Complete):
        if family.n < 1:
            raise GraphError(f"Complete needs n >= 1, got {family.n}")
    elif isinstance(family, CompleteBipartite):
        if family.n < 1 or family.m < 1:
            raise GraphError(f"CompleteBipartite needs n, m >= 1, got ({family.n}, {family.m})")
    elif isinstance(family, EyeGd):
        if family.d < 1:
            raise GraphError(f"EyeGd needs d >= 1, got {family.d}")
    elif isinstance(family, TwoFullyJoinedCycles):
        if family.n < 3:
            raise GraphError(f"TwoFullyJoinedCycles needs n >= 3, got {family.n}")
    elif isinstance(family, (Blowup, ParallelCopies)):
        if family.k < 1:
            raise GraphError(f"{type(family).__name__} needs k >= 1, got {family.k}")
        validate_family(family.base)
    elif isinstance(family, AsymmetricEnlargement):
        validate_family(family.base)
    else:
        raise GraphError(f"unknown graph family {family!r}")


def _cycle_edges(start: int, length: int) -> List[Edge]:
    return [(start + i, start + (i + 1) % length) for i in range(length)]


def generate(family: GraphFamily) -> Graph:
    """Build the graph of a family with the fixed vertex numbering.

    Args:
        family: Any GraphFamily value.

    Returns:
        The generated Graph. Identical family values give identical graphs.

    Raises:
        GraphError: If the family parameters are invalid.
    """
    validate_family(family)

    if isinstance(family, Cycle):
        return Graph.from_networkx(nx.cycle_graph(family.n))

    if isinstance(family, Complete):
        return Graph.from_networkx(nx.complete_graph(family.n))

    if isinstance(family, CompleteBipartite):
        return Graph.from_networkx(nx.complete_bipartite_graph(family.n, family.m))

    if isinstance(family, EyeGd):
        edges: List[Edge] = []
        for i in range(family.d):
            edges.extend(_cycle_edges(6 * i, 6))
        for i in range(1, family.d):
            for a in (0, 3):
                for b in (0, 3):
                    edges.append((a, 6 * i + b))
        return Graph(n=6 * family.d, edges=tuple(edges))

    if isinstance(family, TwoFullyJoinedCycles):
        n = family.n
        edges = _cycle_edges(0, n) + _cycle_edges(n, n)
        edges.extend((a, n + b) for a in range(n) for b in range(n))
        return Graph(n=2 * n, edges=tuple(edges))

    if isinstance(family, Blowup):
        base = generate(family.base)
        k = family.k
        edges = [(u * k + p, v * k + q) for u, v in base.edges for p in range(k) for q in range(k)]
        return Graph(n=base.n * k, edges=tuple(edges))

    if isinstance(family, ParallelCopies):
        base = generate(family.base)
        k = family.k
        part_of = _part_index(natural_partition(family.base), base.n)
        edges = []
        for u, v in base.edges:
            if part_of[u] == part_of[v]:
                edges.extend((u * k + p, v * k + q) for p in range(k) for q in range(k))
            else:
                edges.append((u * k, v * k))
        return Graph(n=base.n * k, edges=tuple(edges))

    # AsymmetricEnlargement
    base = generate(family.base)
    edges = list(base.edges)
    nxt = base.n
    for j in range(base.n):
        prev = j
        for _ in range(j + 1):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    return Graph(n=nxt, edges=tuple(edges))


def _part_index(parts: Parts, n: int) -> List[int]:
    index = [-1] * n
    for i, part in enumerate(parts):
        for v in part:
            index[v] = i
    return index


def natural_partition(family: GraphFamily) -> Parts:
    """Vertex parts whose relative phase shifts span the family's equilibrium torus.

    Cycles of an eye graph and of two joined cycles are separate parts, the
    two sides of a complete bipartite graph are separate when both have at
    least two vertices, copy classes follow their base vertex, and pendant
    paths follow their anchor.

    Returns:
        Tuple of sorted vertex tuples, in the order of the base construction.
    """
    validate_family(family)

    if isinstance(family, (Cycle, Complete)):
        return (tuple(range(family.n)),)

    if isinstance(family, CompleteBipartite):
        if family.n >= 2 and family.m >= 2:
            return (tuple(range(family.n)), tuple(range(family.n, family.n + family.m)))
        return (tuple(range(family.n + family.m)),)

    if isinstance(family, EyeGd):
        return tuple(tuple(range(6 * i, 6 * i + 6)) for i in range(family.d))

    if isinstance(family, TwoFullyJoinedCycles):
        n = family.n
        return (tuple(range(n)), tuple(range(n, 2 * n)))

    if isinstance(family, (Blowup, ParallelCopies)):
        k = family.k
        return tuple(
            tuple(sorted(v * k + p for v in part for p in range(k)))
            for part in natural_partition(family.base)
        )

    # AsymmetricEnlargement
    base_parts = natural_partition(family.base)
    base_n = sum(len(p) for p in base_parts)
    part_of = _part_index(base_parts, base_n)
    extra: List[List[int]] = [[] for _ in base_parts]
    nxt = base_n
    for j in range(base_n):
        for _ in range(j + 1):
            extra[part_of[j]].append(nxt)
            nxt += 1
    return tuple(tuple(sorted(list(p) + extra[i])) for i, p in enumerate(base_parts))


def anchor_map(family: GraphFamily) -> List[int]:
    """For every generated vertex, the vertex of the innermost simple family it descends from.

    Copies map to their base vertex and pendant path vertices to their anchor,
    recursively. Used to transport base phases onto derived graphs.
    """
    validate_family(family)

    if isinstance(family, (Blowup, ParallelCopies)):
        inner = anchor_map(family.base)
        return [inner[v] for v in range(len(inner)) for _ in range(family.k)]

    if isinstance(family, AsymmetricEnlargement):
        inner = anchor_map(family.base)
        out = list(inner)
        for j in range(len(inner)):
            out.extend([inner[j]] * (j + 1))
        return out

    return list(range(generate(family).n))


def innermost(family: GraphFamily) -> GraphFamily:
    """Strip Blowup, ParallelCopies and AsymmetricEnlargement wrappers."""
    while isinstance(family, (Blowup, ParallelCopies, AsymmetricEnlargement)):
        family = family.base
    return family


# ============================================================================
# Family Syntax and JSON Form
# ============================================================================

_SIMPLE_KEYS: Dict[str, Tuple[type, Tuple[str, ...]]] = {
    "cycle": (Cycle, ("n",)),
    "complete": (Complete, ("n",)),
    "bipartite": (CompleteBipartite, ("n", "m")),
    "eye": (EyeGd, ("d",)),
    "twocycles": (TwoFullyJoinedCycles, ("n",)),
}


def _parse_int(token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError as e:
        raise GraphError(f"{what} must be an integer, got '{token}'") from e


def parse_family(text: str) -> GraphFamily:
    """Parse the compact family syntax used on the command line.

    Accepted forms: ``cycle:N``, ``complete:N``, ``bipartite:N:M``, ``eye:D``,
    ``twocycles:N``, ``blowup:K:<family>``, ``parallel:K:<family>``,
    ``enlarge:<family>``, the preset names in PRESETS, or a JSON object as
    produced by family_to_dict.

    Raises:
        GraphError: If the text does not describe a valid family.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise GraphError(f"invalid JSON graph family: {e}") from e
        return family_from_dict(data)

    family = _parse_tokens(text.lower().split(":"), text)
    validate_family(family)
    return family


def _parse_tokens(tokens: List[str], text: str) -> GraphFamily:
    head, rest = tokens[0], tokens[1:]

    if head in PRESETS:
        if rest:
            raise GraphError(f"preset '{head}' takes no parameters: '{text}'")
        if head in EXPERIMENTAL_PRESETS:
            logger.warning(f"Graph preset '{head}' is experimental")
        return PRESETS[head]

    if head in _SIMPLE_KEYS:
        cls, fields = _SIMPLE_KEYS[head]
        if len(rest) != len(fields):
            raise GraphError(f"'{head}' expects {len(fields)} parameter(s): '{text}'")
        kwargs = {f: _parse_int(t, f) for f, t in zip(fields, rest)}
        return cls(**kwargs)  # type: ignore[no-any-return]

    if head in ("blowup", "parallel"):
        if len(rest) < 2:
            raise GraphError(f"'{head}' expects K and a base family: '{text}'")
        k = _parse_int(rest[0], "k")
        base = _parse_tokens(rest[1:], text)
        return Blowup(base, k) if head == "blowup" else ParallelCopies(base, k)

    if head == "enlarge":
        if not rest:
            raise GraphError(f"'enlarge' expects a base family: '{text}'")
        return AsymmetricEnlargement(_parse_tokens(rest, text))

    raise GraphError(f"unknown graph family '{head}' in '{text}'")


_FAMILY_NAMES: Dict[type, str] = {
    Cycle: "cycle",
    Complete: "complete",
    CompleteBipartite: "bipartite",
    EyeGd: "eye",
    TwoFullyJoinedCycles: "twocycles",
    Blowup: "blowup",
    ParallelCopies: "parallel",
    AsymmetricEnlargement: "enlarge",
}


def family_to_dict(family: GraphFamily) -> Dict[str, Any]:
    """JSON-ready form, e.g. ``{"family": "blowup", "k": 3, "base": {"family": "eye", "d": 2}}``."""
    out: Dict[str, Any] = {"family": _FAMILY_NAMES[type(family)]}
    for name, value in vars(family).items():
        out[name] = family_to_dict(value) if name == "base" else value
    return out


def family_from_dict(data: Dict[str, Any]) -> GraphFamily:
    """Inverse of family_to_dict.

    Raises:
        GraphError: On unknown family names, missing or extra fields.
    """
    if not isinstance(data, dict) or "family" not in data:
        raise GraphError(f"graph family object needs a 'family' key, got {data!r}")

    name = data["family"]
    classes = {v: k for k, v in _FAMILY_NAMES.items()}
    if name not in classes:
        raise GraphError(f"unknown graph family '{name}'")

    kwargs = {k: v for k, v in data.items() if k != "family"}
    if "base" in kwargs:
        kwargs["base"] = family_from_dict(kwargs["base"])
    try:
        family: GraphFamily = classes[name](**kwargs)
    except TypeError as e:
        raise GraphError(f"bad fields for '{name}': {e}") from e
    validate_family(family)
    return family


def family_label(family: GraphFamily) -> str:
    """Compact text form accepted by parse_family."""
    if isinstance(family, CompleteBipartite):
        return f"bipartite:{family.n}:{family.m}"
    if isinstance(family, (Blowup, ParallelCopies)):
        return f"{_FAMILY_NAMES[type(family)]}:{family.k}:{family_label(family.base)}"
    if isinstance(family, AsymmetricEnlargement):
        return f"enlarge:{family_label(family.base)}"
    value = next(iter(vars(family).values()))
    return f"{_FAMILY_NAMES[type(family)]}:{value}"


# ============================================================================
# Edge-List Text Format
# ============================================================================


def format_edge_list(g: Graph, comments: Iterable[str] = ()) -> str:
    """Render g as "n" followed by one "u v" line per edge, after '#' comment lines."""
    lines = [f"# {c}" for c in comments]
    lines.append(str(g.n))
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    """Parse the edge-list text format.

    Raises:
        GraphError: On malformed lines, loops, duplicates or out-of-range vertices.
    """
    rows = [
        (i + 1, line.split())
        for i, line in enumerate(text.splitlines())
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise GraphError("edge list is empty")

    lineno, first = rows[0]
    if len(first) != 1:
        raise GraphError(f"line {lineno}: expected vertex count, got '{' '.join(first)}'")
    n = _parse_int(first[0], "vertex count")

    edges: List[Edge] = []
    seen: set[Edge] = set()
    for lineno, tokens in rows[1:]:
        if len(tokens) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got '{' '.join(tokens)}'")
        u, v = _parse_int(tokens[0], "u"), _parse_int(tokens[1], "v")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge {u} {v}")
        seen.add(key)
        edges.append((u, v))

    return Graph(n=n, edges=tuple(edges))


def write_edge_list(g: Graph, path: Union[str, Path], comments: Iterable[str] = ()) -> str:
    """Write g in edge-list format.

    Returns:
        Absolute path of the written file.
    """
    p = Path(path)
    p.write_text(format_edge_list(g, comments))
    abs_path = str(p.resolve())
    logger.info(f"Wrote edge list ({g.n} vertices, {g.edge_count} edges) to {abs_path}")
    return abs_path


def read_edge_list(path: Union[str, Path]) -> Graph:
    """Read a graph from an edge-list file."""
    g = parse_edge_list(Path(path).read_text())
    logger.debug(f"Read edge list from {path}: {g.n} vertices, {g.edge_count} edges")
    return g
