"""Undirected simple graphs and the topology generators used by the simulator.

Nodes are 0-indexed. Edges are stored canonically as sorted ``(i, j)`` pairs
with ``i < j``, so identical constructions compare equal and iteration order
is deterministic everywhere.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .rng import make_rng

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on nodes ``0 .. n-1``."""

    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        seen: set[Edge] = set()
        for e in self.edges:
            i, j = e
            if not (0 <= i < j < self.n):
                raise ValueError(
                    f"edge {e} is not a sorted pair of distinct nodes in [0, {self.n})"
                )
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
        if list(self.edges) != sorted(self.edges):
            raise ValueError("edges must be in canonical sorted order")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        """Sorted adjacency lists."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for lst in adj:
            lst.sort()
        return adj


def make_graph(n: int, edges) -> Graph:
    """Build a Graph from any iterable of node pairs, normalizing order and duplicates."""
    canon: set[Edge] = set()
    for i, j in edges:
        i, j = int(i), int(j)
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        canon.add((min(i, j), max(i, j)))
    return Graph(int(n), tuple(sorted(canon)))


def build_ring(n: int) -> Graph:
    """Cycle on n >= 3 nodes; every node has degree 2."""
    if n < 3:
        raise ValueError(f"ring requires n >= 3, got {n}")
    edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    return Graph(n, tuple(sorted(edges)))


def build_path(n: int) -> Graph:
    """Path 0-1-...-(n-1)."""
    if n < 1:
        raise ValueError(f"path requires n >= 1, got {n}")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def build_star(n: int) -> Graph:
    """Star with node 0 at the center and n-1 leaves."""
    if n < 2:
        raise ValueError(f"star requires n >= 2, got {n}")
    return Graph(n, tuple((0, i) for i in range(1, n)))


def build_complete(n: int) -> Graph:
    """Complete graph on n >= 1 nodes."""
    if n < 1:
        raise ValueError(f"complete graph requires n >= 1, got {n}")
    return Graph(n, tuple(combinations(range(n), 2)))


def build_grid(rows: int, cols: int) -> Graph:
    """4-neighbor lattice with ``rows * cols`` nodes; node (r, c) is r*cols + c."""
    if rows < 1 or cols < 1:
        raise ValueError(f"grid requires rows, cols >= 1, got {rows}x{cols}")
    edges: list[Edge] = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, tuple(sorted(edges)))


def build_tree_random(n: int, seed: int) -> Graph:
    """Uniformly random labeled tree on n nodes, decoded from a random Prufer sequence."""
    if n < 1:
        raise ValueError(f"tree requires n >= 1, got {n}")
    if n == 1:
        return Graph(1, ())
    if n == 2:
        return Graph(2, ((0, 1),))
    rng = make_rng(seed)
    seq = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges: list[Edge] = []
    for x in seq:
        x = int(x)
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return Graph(n, tuple(sorted(edges)))


def build_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each unordered pair is an edge independently with probability p.

    Deterministic for fixed ``(n, p, seed)``. The result may be disconnected;
    callers that need connectivity must test and resample with a fresh seed.
    """
    if n < 1:
        raise ValueError(f"erdos_renyi requires n >= 1, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(iu.size) < p
    edges = tuple((int(i), int(j)) for i, j in zip(iu[mask], ju[mask]))
    return Graph(n, edges)


def is_connected(g: Graph) -> bool:
    """True iff a traversal from node 0 reaches all n nodes."""
    adj = g.neighbors()
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return bool(seen.all())


def degree(g: Graph, i: int) -> int:
    """Number of neighbors of node i."""
    if not 0 <= i < g.n:
        raise IndexError(f"node {i} out of range for graph with n={g.n}")
    return int(degrees(g)[i])


def degrees(g: Graph) -> np.ndarray:
    """Degree vector of all nodes."""
    deg = np.zeros(g.n, dtype=np.int64)
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    return deg


def adjacency_matrix(g: Graph) -> np.ndarray:
    """Dense 0/1 adjacency matrix."""
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return a


def to_edgelist(g: Graph) -> str:
    """Serialize: first line ``n m``, then one ``i j`` line per edge."""
    lines = [f"{g.n} {g.num_edges}"]
    lines.extend(f"{i} {j}" for i, j in g.edges)
    return "\n".join(lines) + "\n"


def from_edgelist(text: str) -> Graph:
    """Parse the edge-list format produced by :func:`to_edgelist`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty edge-list text")
    n, m = (int(x) for x in lines[0].split())
    edges = []
    for ln in lines[1:]:
        i, j = (int(x) for x in ln.split())
        edges.append((i, j))
    if len(edges) != m:
        raise ValueError(f"header declares {m} edges but {len(edges)} lines follow")
    return make_graph(n, edges)
