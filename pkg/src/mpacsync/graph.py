"""Random connected topologies for the node network.

Graphs are undirected and simple, with node ids ``0..N-1``.  A topology is
built by drawing a uniform random spanning tree of the complete graph
(Wilson's loop-erased random walk) and then topping it up with uniformly
chosen extra edges until the edge budget ``round(c * N(N-1)/2)`` is met.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "InfeasibleTopologyError",
    "NetworkTopology",
    "edge_budget",
    "min_connectivity",
    "generate_random_topology",
    "laplacian",
    "adjacency",
    "neighbors",
    "is_connected",
    "is_tree",
    "to_edge_list_text",
    "from_edge_list_text",
    "write_edge_list",
    "read_edge_list",
    "path_graph",
    "complete_graph",
    "star_graph",
    "cycle_graph",
]


class InfeasibleTopologyError(ValueError):
    """Raised when an (N, c) pair cannot produce a connected graph."""


def edge_budget(n_nodes: int, connectivity: float) -> int:
    """Number of edges for ``n_nodes`` at connectivity ratio ``connectivity``.

    Rounds half up.  The small slack absorbs float noise such as
    ``0.05 * 4950 == 247.50000000000003``.
    """
    total = n_nodes * (n_nodes - 1) / 2
    return int(math.floor(connectivity * total + 0.5 + 1e-9))


def min_connectivity(n_nodes: int) -> float:
    """Smallest connectivity ratio that still admits a spanning tree (2/N)."""
    if n_nodes < 2:
        raise ValueError("need at least two nodes")
    return 2.0 / n_nodes


def _check_feasible(n_nodes: int, connectivity: float) -> int:
    if int(n_nodes) != n_nodes or n_nodes < 1:
        raise ValueError(f"n_nodes must be a positive integer, got {n_nodes!r}")
    if not 0.0 <= connectivity <= 1.0:
        raise ValueError(f"connectivity must lie in [0, 1], got {connectivity!r}")
    budget = edge_budget(n_nodes, connectivity)
    if budget < n_nodes - 1:
        need = min_connectivity(n_nodes) if n_nodes >= 2 else 0.0
        raise InfeasibleTopologyError(
            f"connectivity {connectivity:g} gives {budget} edges for N={n_nodes}, "
            f"fewer than the N-1={n_nodes - 1} needed; minimum connectivity is {need:g}"
        )
    return budget


@dataclass(frozen=True)
class NetworkTopology:
    """Immutable undirected simple graph.

    ``edges`` holds each undirected edge once as a sorted pair ``(m, n)``
    with ``m < n``; the tuple itself is sorted lexicographically.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    connectivity: float = field(default=float("nan"))

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        canon = set()
        for m, n in self.edges:
            if m == n:
                raise ValueError(f"self-loop at node {m}")
            if not (0 <= m < self.n_nodes and 0 <= n < self.n_nodes):
                raise ValueError(f"edge ({m}, {n}) out of range for N={self.n_nodes}")
            key = (min(m, n), max(m, n))
            if key in canon:
                raise ValueError(f"duplicate edge {key}")
            canon.add(key)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        if math.isnan(self.connectivity):
            total = self.n_nodes * (self.n_nodes - 1) / 2
            object.__setattr__(
                self, "connectivity", len(canon) / total if total else 0.0
            )

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=int)
        for m, n in self.edges:
            deg[m] += 1
            deg[n] += 1
        deg.setflags(write=False)
        return deg

    @cached_property
    def adjacency_lists(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for m, n in self.edges:
            adj[m].append(n)
            adj[n].append(m)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays ``(src, dst, rev)`` over the 2|E| directed edges.

        Directed edge ``i`` goes ``src[i] -> dst[i]`` and ``rev[i]`` is the
        index of ``dst[i] -> src[i]``.  The first |E| entries follow
        ``edges`` in order (low id to high id), the next |E| reverse them.
        """
        e = np.array(self.edges, dtype=int).reshape(-1, 2)
        n_e = len(e)
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        rev = np.concatenate([np.arange(n_e, 2 * n_e), np.arange(n_e)])
        for a in (src, dst, rev):
            a.setflags(write=False)
        return src, dst, rev

    @cached_property
    def directed_index(self) -> dict[tuple[int, int], int]:
        """Map ``(m, n)`` to the index of directed edge ``m -> n``."""
        src, dst, _ = self.directed_edges
        return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(src, dst))}

    @property
    def average_degree(self) -> float:
        return 2.0 * self.n_edges / self.n_nodes


def generate_random_topology(
    n_nodes: int, connectivity: float, rng: np.random.Generator
) -> NetworkTopology:
    """Random connected graph with exactly ``edge_budget(n_nodes, connectivity)`` edges.

    Parameters
    ----------
    n_nodes : int
        Number of nodes N.
    connectivity : float
        Ratio c of active edges to N(N-1)/2.
    rng : numpy.random.Generator
        Source of randomness; the result is a deterministic function of its
        state.

    Raises
    ------
    InfeasibleTopologyError
        If the edge budget is below N-1 (e.g. N=5 with c < 0.4).
    """
    budget = _check_feasible(n_nodes, connectivity)
    edges = _wilson_spanning_tree(n_nodes, rng)
    extra = budget - len(edges)
    if extra > 0:
        present = set(edges)
        candidates = [
            (m, n)
            for m in range(n_nodes)
            for n in range(m + 1, n_nodes)
            if (m, n) not in present
        ]
        picks = rng.choice(len(candidates), size=extra, replace=False)
        edges.extend(candidates[i] for i in sorted(picks))
    return NetworkTopology(n_nodes, tuple(edges), connectivity)


def _wilson_spanning_tree(n_nodes: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    # Loop-erased random walks on the complete graph K_N.
    if n_nodes == 1:
        return []
    in_tree = np.zeros(n_nodes, dtype=bool)
    nxt = np.full(n_nodes, -1)
    in_tree[rng.integers(n_nodes)] = True
    for start in rng.permutation(n_nodes):
        u = start
        while not in_tree[u]:
            # uniform step to any other node
            v = rng.integers(n_nodes - 1)
            v = v + (v >= u)
            nxt[u] = v
            u = v
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    # every non-root node ends with exactly one live pointer
    return [
        (min(u, int(nxt[u])), max(u, int(nxt[u])))
        for u in range(n_nodes)
        if nxt[u] >= 0
    ]


def adjacency(topology: NetworkTopology) -> np.ndarray:
    """Dense 0/1 adjacency matrix."""
    a = np.zeros((topology.n_nodes, topology.n_nodes))
    for m, n in topology.edges:
        a[m, n] = a[n, m] = 1.0
    return a


def laplacian(topology: NetworkTopology) -> np.ndarray:
    """Graph Laplacian ``L = diag(degrees) - A``."""
    a = adjacency(topology)
    return np.diag(a.sum(axis=1)) - a


def neighbors(topology: NetworkTopology, node: int) -> list[int]:
    """Sorted neighbor ids of ``node``."""
    if not 0 <= node < topology.n_nodes:
        raise IndexError(f"node {node} out of range for N={topology.n_nodes}")
    return list(topology.adjacency_lists[node])


def is_connected(topology: NetworkTopology) -> bool:
    """Breadth-first reachability from node 0."""
    seen = {0}
    frontier = [0]
    adj = topology.adjacency_lists
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return len(seen) == topology.n_nodes


def is_tree(topology: NetworkTopology) -> bool:
    return topology.n_edges == topology.n_nodes - 1 and is_connected(topology)


def to_edge_list_text(topology: NetworkTopology) -> str:
    """Debug export: node count on the first line, then one ``m n`` per edge."""
    lines = [str(topology.n_nodes)]
    lines += [f"{m} {n}" for m, n in topology.edges]
    return "\n".join(lines) + "\n"


def from_edge_list_text(text: str) -> NetworkTopology:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty edge list")
    n_nodes = int(rows[0][0])
    edges = tuple((int(r[0]), int(r[1])) for r in rows[1:])
    return NetworkTopology(n_nodes, edges)


def write_edge_list(topology: NetworkTopology, path) -> None:
    Path(path).write_text(to_edge_list_text(topology))


def read_edge_list(path) -> NetworkTopology:
    return from_edge_list_text(Path(path).read_text())


# Small fixed graphs, mostly for tests and demos.

def path_graph(n_nodes: int) -> NetworkTopology:
    return NetworkTopology(n_nodes, tuple((i, i + 1) for i in range(n_nodes - 1)))


def cycle_graph(n_nodes: int) -> NetworkTopology:
    edges = [(i, i + 1) for i in range(n_nodes - 1)] + [(0, n_nodes - 1)]
    return NetworkTopology(n_nodes, tuple(edges))


def complete_graph(n_nodes: int) -> NetworkTopology:
    return NetworkTopology(
        n_nodes,
        tuple((m, n) for m in range(n_nodes) for n in range(m + 1, n_nodes)),
    )


def star_graph(n_nodes: int) -> NetworkTopology:
    """Star with hub 0 and ``n_nodes - 1`` leaves."""
    return NetworkTopology(n_nodes, tuple((0, i) for i in range(1, n_nodes)))
