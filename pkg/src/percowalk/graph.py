"""Regular graphs with direction labels, edge configurations and percolation.

Vertices are ``0..N-1``. Every vertex owns ``d`` direction slots; slot
``(a, c)`` points to the neighbour ``a (+) c`` and is governed by a single
undirected edge identified by an integer ``EdgeId``. Slots that never carry an
edge (the two boundary slots of a line) hold :data:`ABSENT`.

Edge configurations are stored as integer bitmasks: edge ``e`` is present
iff bit ``e`` is set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

ABSENT = -1

#: Enumeration over all 2^|E| configurations is refused at or above this
#: many edges.
MAX_ENUM_EDGES = 20


class GraphError(ValueError):
    """Invalid graph description."""


class EnumerationCapError(ValueError):
    """Raised when brute-force enumeration would exceed the configuration cap."""


@dataclass(frozen=True, eq=False)
class PercolationGraph:
    """A ``d``-regular graph with labelled directions.

    Attributes
    ----------
    N : int
        Number of vertices.
    d : int
        Regularity, which is also the coin dimension.
    edges : tuple of (int, int)
        Unordered vertex pairs, indexed by EdgeId.
    neighbors : ndarray of int, shape (N, d)
        ``neighbors[a, c]`` is ``a (+) c`` or :data:`ABSENT`.
    edge_ids : ndarray of int, shape (N, d)
        EdgeId governing slot ``(a, c)``, or :data:`ABSENT`.
    kind : {"cycle", "line", "general"}
    """

    N: int
    d: int
    edges: tuple
    neighbors: np.ndarray = field(repr=False)
    edge_ids: np.ndarray = field(repr=False)
    kind: str = "general"

    def __post_init__(self):
        self.neighbors.setflags(write=False)
        self.edge_ids.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def dim(self) -> int:
        """Dimension ``d*N`` of position (x) coin space."""
        return self.N * self.d

    def neighbor(self, a: int, c: int) -> int:
        return int(self.neighbors[a, c])

    def edge_id(self, a: int, c: int) -> int:
        return int(self.edge_ids[a, c])

    def same_structure(self, other: "PercolationGraph") -> bool:
        """True when both graphs have identical tables (``kind`` is ignored)."""
        return (
            self.N == other.N
            and self.d == other.d
            and tuple(self.edges) == tuple(other.edges)
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.edge_ids, other.edge_ids)
        )

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "N": self.N}
        if self.kind == "general":
            out["neighbors"] = self.neighbors.tolist()
        return out


def _assign_edge_ids(neighbors: np.ndarray):
    """Number edges in ascending (vertex, direction) order of first sighting."""
    N, d = neighbors.shape
    edge_ids = np.full((N, d), ABSENT, dtype=int)
    lookup = {}
    edges = []
    for a in range(N):
        for c in range(d):
            b = neighbors[a, c]
            if b == ABSENT:
                continue
            key = (int(min(a, b)), int(max(a, b)))
            if key not in lookup:
                lookup[key] = len(edges)
                edges.append(key)
            edge_ids[a, c] = lookup[key]
    return tuple(edges), edge_ids


def make_cycle(N: int) -> PercolationGraph:
    """Cycle on ``N`` vertices; direction 0 points to ``a-1``, direction 1 to ``a+1``.

    For ``N = 2`` both slots of both vertices are governed by one shared edge.
    """
    if N < 2:
        raise GraphError(f"cycle needs N >= 2, got {N}")
    a = np.arange(N)
    neighbors = np.stack([(a - 1) % N, (a + 1) % N], axis=1)
    edges, edge_ids = _assign_edge_ids(neighbors)
    return PercolationGraph(N, 2, edges, neighbors, edge_ids, kind="cycle")


def make_line(N: int) -> PercolationGraph:
    """Path on ``N`` vertices with permanently broken boundary slots."""
    if N < 2:
        raise GraphError(f"line needs N >= 2, got {N}")
    a = np.arange(N)
    neighbors = np.stack([a - 1, a + 1], axis=1)
    neighbors[0, 0] = ABSENT
    neighbors[N - 1, 1] = ABSENT
    edges, edge_ids = _assign_edge_ids(neighbors)
    return PercolationGraph(N, 2, edges, neighbors, edge_ids, kind="line")


def from_adjacency(N: int, d: int, neighbor_table: Sequence[Sequence[int]]) -> PercolationGraph:
    """Validate a direction-labelled neighbour table and build a graph.

    ``neighbor_table[a][c]`` is the vertex reached from ``a`` along direction
    ``c``. The table must describe a simple ``d``-regular undirected graph.
    """
    table = np.asarray(neighbor_table, dtype=int)
    if table.shape != (N, d):
        raise GraphError(f"neighbor table must have shape ({N}, {d}), got {table.shape}")
    if N < 2 or d < 1:
        raise GraphError("need N >= 2 and d >= 1")
    if table.min() < 0 or table.max() >= N:
        raise GraphError("neighbor index out of range")
    for a in range(N):
        row = table[a]
        if np.any(row == a):
            raise GraphError(f"self-loop at vertex {a}")
        if len(set(row.tolist())) != d:
            raise GraphError(f"vertex {a} has repeated neighbours (not simple or not {d}-regular)")
    for a in range(N):
        for b in table[a]:
            if a not in table[b]:
                raise GraphError(f"edge {a}->{b} has no reverse slot at {b}")
    edges, edge_ids = _assign_edge_ids(table)
    return PercolationGraph(N, d, edges, table, edge_ids, kind="general")


def graph_from_spec(spec: dict) -> PercolationGraph:
    """Build a graph from ``{"kind": ..., "N": ..., "neighbors": ...}``."""
    kind = spec.get("kind")
    if kind == "cycle":
        return make_cycle(int(spec["N"]))
    if kind == "line":
        return make_line(int(spec["N"]))
    if kind == "general":
        table = spec["neighbors"]
        N = int(spec.get("N", len(table)))
        return from_adjacency(N, len(table[0]), table)
    raise GraphError(f"unknown graph kind {kind!r}")


# -- configurations -----------------------------------------------------------

@dataclass(frozen=True)
class EdgeConfig:
    """Set of present edges, stored as a bitmask over EdgeIds."""

    mask: int

    @classmethod
    def from_edges(cls, present) -> "EdgeConfig":
        mask = 0
        for e in present:
            mask |= 1 << int(e)
        return cls(mask)

    @classmethod
    def full(cls, g: PercolationGraph) -> "EdgeConfig":
        return cls((1 << g.n_edges) - 1)

    @classmethod
    def empty(cls) -> "EdgeConfig":
        return cls(0)

    @property
    def present(self) -> frozenset:
        return frozenset(e for e in range(self.mask.bit_length()) if self.mask >> e & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, e: int) -> bool:
        return e >= 0 and bool(self.mask >> e & 1)

    def as_bool(self, g: PercolationGraph) -> np.ndarray:
        return np.array([(self.mask >> e) & 1 for e in range(g.n_edges)], dtype=bool)

    def check(self, g: PercolationGraph) -> None:
        if self.mask >> g.n_edges:
            raise GraphError("configuration contains edges outside the graph")


def config_probability(g: PercolationGraph, k: EdgeConfig, p: float) -> float:
    """Probability ``p^|k| (1-p)^(|E|-|k|)`` of drawing configuration ``k``."""
    n = len(k)
    return p**n * (1.0 - p) ** (g.n_edges - n)


def check_enumerable(g: PercolationGraph, cap: int = MAX_ENUM_EDGES) -> None:
    if g.n_edges >= cap:
        raise EnumerationCapError(
            f"cap exceeded: {g.n_edges} edges (2^{g.n_edges} configurations); "
            "use the local channel instead"
        )


def enumerate_configs(g: PercolationGraph, cap: int = MAX_ENUM_EDGES) -> list[EdgeConfig]:
    """All ``2^|E|`` configurations in ascending bitmask order."""
    check_enumerable(g, cap)
    return [EdgeConfig(m) for m in range(1 << g.n_edges)]


def iter_configs(g: PercolationGraph, cap: int = MAX_ENUM_EDGES) -> Iterator[EdgeConfig]:
    check_enumerable(g, cap)
    for m in range(1 << g.n_edges):
        yield EdgeConfig(m)


def sample_config(g: PercolationGraph, p: float, rng: np.random.Generator) -> EdgeConfig:
    """Draw each edge independently with probability ``p``."""
    present = rng.random(g.n_edges) < p
    return EdgeConfig.from_edges(np.flatnonzero(present))
