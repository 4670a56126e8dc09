"""Graph primitives: knowledge graphs, social networks and their generators.

Knowledge graphs are stored as dense boolean adjacency matrices over concept
ids, which keeps the distance-2 test used by the diffusion rule to a couple of
vectorised lookups. Social networks keep a CSR neighbour layout so the
compiled kernels can walk them without Python objects.
"""
from __future__ import annotations

import logging
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Raised for parameter combinations that cannot produce a valid object."""


class EdgelistError(ValueError):
    """Raised when an edgelist file cannot be parsed."""


class DisconnectedGraphWarning(UserWarning):
    pass


class DuplicateEdgeWarning(UserWarning):
    pass


class Belief(NamedTuple):
    """An unordered pair of concept ids, stored as ``lo < hi``."""

    lo: int
    hi: int

    @classmethod
    def of(cls, a: int, b: int) -> "Belief":
        a, b = int(a), int(b)
        if a == b:
            raise ValueError(f"a belief needs two distinct concepts, got ({a}, {b})")
        if a < 0 or b < 0:
            raise ValueError(f"concept ids must be non-negative, got ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=32)
def _upper_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = np.triu_indices(n, 1)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def _sample_pairs(n: int, m: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    idx = np.sort(rng.choice(n_pairs(n), size=m, replace=False))
    lo, hi = _upper_pairs(n)
    return lo[idx], hi[idx]


class KnowledgeGraph:
    """Simple undirected graph on ``n_concepts`` concept nodes.

    The adjacency matrix may be a view into a larger population array, in
    which case edge insertions write through to it.
    """

    __slots__ = ("adj",)

    def __init__(self, n_concepts: int, edges: Iterable = (), adj: np.ndarray | None = None):
        if adj is None:
            adj = np.zeros((n_concepts, n_concepts), dtype=np.bool_)
        elif adj.shape != (n_concepts, n_concepts):
            raise ValueError(f"adjacency shape {adj.shape} does not match {n_concepts} concepts")
        self.adj = adj
        for a, b in edges:
            self.add(a, b)

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "KnowledgeGraph":
        return cls(adj.shape[0], adj=adj)

    @classmethod
    def complete(cls, n_concepts: int) -> "KnowledgeGraph":
        adj = ~np.eye(n_concepts, dtype=np.bool_)
        return cls(n_concepts, adj=adj)

    @property
    def n_concepts(self) -> int:
        return self.adj.shape[0]

    def add(self, a: int, b: int) -> bool:
        """Insert a belief; return True if it was not already present."""
        lo, hi = Belief.of(a, b)
        if hi >= self.n_concepts:
            raise ValueError(f"concept {hi} outside universe of {self.n_concepts}")
        if self.adj[lo, hi]:
            return False
        self.adj[lo, hi] = self.adj[hi, lo] = True
        return True

    def has(self, a: int, b: int) -> bool:
        return bool(self.adj[a, b])

    def __contains__(self, belief) -> bool:
        return self.has(*belief)

    @property
    def edges(self) -> set[Belief]:
        lo, hi = np.nonzero(np.triu(self.adj, 1))
        return {Belief(int(a), int(b)) for a, b in zip(lo, hi)}

    def edge_array(self) -> np.ndarray:
        """Edges as a sorted ``(k, 2)`` int array in canonical order."""
        lo, hi = np.nonzero(np.triu(self.adj, 1))
        return np.stack([lo, hi], axis=1).astype(np.int64)

    def __len__(self) -> int:
        return int(np.count_nonzero(self.adj)) // 2

    def copy(self) -> "KnowledgeGraph":
        return KnowledgeGraph(self.n_concepts, adj=self.adj.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.adj.shape == other.adj.shape and bool(np.array_equal(self.adj, other.adj))

    def __repr__(self) -> str:
        return f"KnowledgeGraph(n_concepts={self.n_concepts}, n_edges={len(self)})"


def random_knowledge_graph(n_concepts: int, n_beliefs: int, rng: np.random.Generator) -> KnowledgeGraph:
    """Sample ``n_beliefs`` distinct edges uniformly from the complete graph."""
    if n_concepts < 0 or n_beliefs < 0:
        raise ConfigError("n_concepts and n_beliefs must be non-negative")
    if n_beliefs > n_pairs(n_concepts):
        raise ConfigError(
            f"{n_beliefs} beliefs requested but only {n_pairs(n_concepts)} exist on {n_concepts} concepts"
        )
    kg = KnowledgeGraph(n_concepts)
    if n_beliefs:
        lo, hi = _sample_pairs(n_concepts, n_beliefs, rng)
        kg.adj[lo, hi] = True
        kg.adj[hi, lo] = True
    return kg


def bounded_distance(graph: KnowledgeGraph, a: int, b: int, bound: int) -> int | None:
    """Shortest-path length between ``a`` and ``b`` if it is at most ``bound``, else None.

    Breadth-first search that stops expanding once the frontier reaches depth
    ``bound``.
    """
    n = graph.n_concepts
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"concepts ({a}, {b}) outside universe of {n}")
    if a == b:
        return 0
    adj = graph.adj
    seen = np.zeros(n, dtype=np.bool_)
    seen[a] = True
    frontier = np.array([a])
    for depth in range(1, bound + 1):
        reach = adj[frontier].any(axis=0) & ~seen
        if reach[b]:
            return depth
        if not reach.any():
            return None
        seen |= reach
        frontier = np.flatnonzero(reach)
    return None


@dataclass(frozen=True)
class SocialNetwork:
    """Undirected, simple, connected graph of agents.

    ``indptr``/``indices`` hold the sorted neighbour lists in CSR form.
    """

    n_agents: int
    edges: tuple[tuple[int, int], ...]
    indptr: np.ndarray = field(repr=False, compare=False)
    indices: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n_agents: int, edges: Iterable[tuple[int, int]], require_connected: bool = True
                   ) -> "SocialNetwork":
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ConfigError(f"self-loop on agent {u}")
            if not (0 <= u < n_agents and 0 <= v < n_agents):
                raise ConfigError(f"edge ({u}, {v}) outside {n_agents} agents")
            canon.add((u, v) if u < v else (v, u))
        edge_tuple = tuple(sorted(canon))
        nbrs: list[list[int]] = [[] for _ in range(n_agents)]
        for u, v in edge_tuple:
            nbrs[u].append(v)
            nbrs[v].append(u)
        indptr = np.zeros(n_agents + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(x) for x in nbrs])
        indices = np.array([v for x in nbrs for v in sorted(x)], dtype=np.int64)
        net = cls(n_agents, edge_tuple, indptr, indices)
        if require_connected and not net.is_connected():
            raise ConfigError("social network is not connected")
        return net

    def neighbors(self, agent: int) -> np.ndarray:
        return self.indices[self.indptr[agent]:self.indptr[agent + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_connected(self) -> bool:
        return self.n_agents == 0 or bool((self.distances_from(0) >= 0).all())

    def distances_from(self, source: int) -> np.ndarray:
        """Hop distances from ``source``; -1 marks unreachable agents."""
        dist = np.full(self.n_agents, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.neighbors(u):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def mean_shortest_path(self) -> float:
        total = sum(int(self.distances_from(s).sum()) for s in range(self.n_agents))
        return total / (self.n_agents * (self.n_agents - 1))

    def diameter(self) -> int:
        return max(int(self.distances_from(s).max()) for s in range(self.n_agents))

    def average_clustering(self) -> float:
        return average_clustering(self.adjacency_matrix())

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n_agents, self.n_agents), dtype=np.bool_)
        if self.edges:
            e = np.array(self.edges)
            adj[e[:, 0], e[:, 1]] = adj[e[:, 1], e[:, 0]] = True
        return adj


def average_clustering(adj: np.ndarray) -> float:
    """Mean local clustering coefficient; nodes with degree < 2 contribute 0."""
    a = adj.astype(np.float64)
    deg = a.sum(axis=1)
    if len(deg) == 0:
        raise ValueError("clustering of an empty graph is undefined")
    tri = np.einsum("ij,jk,ki->i", a, a, a) / 2.0
    possible = deg * (deg - 1) / 2.0
    local = np.divide(tri, possible, out=np.zeros_like(tri), where=possible > 0)
    return float(local.mean())


def gnm_random_connected(n_agents: int, degree_avg: float, rng: np.random.Generator,
                         max_tries: int = 100_000) -> SocialNetwork:
    """Uniform G(n, m) graph conditioned on connectivity, with m = floor(n * deg / 2).

    Whole graphs are redrawn until one is connected.
    """
    if n_agents < 2:
        raise ConfigError("need at least 2 agents")
    m = int(n_agents * degree_avg / 2)
    if m < n_agents - 1:
        raise ConfigError(f"{m} edges cannot connect {n_agents} agents")
    if m > n_pairs(n_agents):
        raise ConfigError(f"{m} edges exceed the {n_pairs(n_agents)} possible on {n_agents} agents")
    for attempt in range(1, max_tries + 1):
        lo, hi = _sample_pairs(n_agents, m, rng)
        net = SocialNetwork.from_edges(n_agents, zip(lo.tolist(), hi.tolist()), require_connected=False)
        if net.is_connected():
            if attempt > 1:
                log.debug("connected G(n=%d, m=%d) after %d draws", n_agents, m, attempt)
            return net
    raise ConfigError(f"no connected G(n={n_agents}, m={m}) in {max_tries} draws")


# Dodecahedral graph in LCF notation.
_DODECAHEDRON_LCF = [10, 7, 4, -4, -7, 10, -4, 7, -7, 4] * 2


def lcf_graph(n: int, shifts: list[int]) -> SocialNetwork:
    edges = [(i, (i + 1) % n) for i in range(n)]
    for i in range(n):
        edges.append((i, (i + shifts[i % len(shifts)]) % n))
    return SocialNetwork.from_edges(n, edges)


def dodecahedron() -> SocialNetwork:
    return lcf_graph(20, _DODECAHEDRON_LCF)


def caveman_ring(n_caves: int = 5, cave_size: int = 4) -> SocialNetwork:
    """Regular connected caveman graph.

    Each cave is a clique with the edge between its first and last member
    removed; the last member of every cave is linked to the first member of
    the next one around the ring, so every agent keeps degree
    ``cave_size - 1``. The defaults give the 20-agent, 3-regular network with
    average clustering 0.5.
    """
    if n_caves < 2 or cave_size < 3:
        raise ConfigError(f"need n_caves >= 2 and cave_size >= 3, got {n_caves}, {cave_size}")
    edges = []
    for c in range(n_caves):
        base = c * cave_size
        members = range(base, base + cave_size)
        edges.extend((u, v) for u in members for v in members if u < v)
        edges.remove((base, base + cave_size - 1))
        edges.append((base + cave_size - 1, ((c + 1) % n_caves) * cave_size))
    return SocialNetwork.from_edges(n_caves * cave_size, edges)


def check_caveman_instance(net: SocialNetwork, clustering: float = 0.5, path_length: float = 4.0,
                           degree: int = 3) -> bool:
    """Check the target properties of the 20-agent caveman network.

    The targets are stated to one decimal (clustering 0.5) and to the nearest
    step (path length 4), so they are compared at that precision.
    """
    return (
        bool((net.degrees() == degree).all())
        and round(net.average_clustering(), 1) == clustering
        and round(net.mean_shortest_path()) == path_length
    )


def load_edgelist(path: str | Path, require_connected: bool = True) -> SocialNetwork:
    """Read a whitespace-separated edgelist; node ids are compacted to ``[0, n)``.

    Duplicate edges are dropped with a warning. A disconnected graph raises
    ``ConfigError`` unless ``require_connected`` is False, in which case a
    warning is issued instead.
    """
    path = Path(path)
    raw: list[tuple[int, int]] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgelistError(f"{path}:{lineno}: expected two node ids, got {text!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgelistError(f"{path}:{lineno}: node ids must be integers, got {text!r}") from None
            if u < 0 or v < 0:
                raise EdgelistError(f"{path}:{lineno}: node ids must be non-negative")
            if u == v:
                raise EdgelistError(f"{path}:{lineno}: self-loop on node {u}")
            raw.append((u, v))
    if not raw:
        raise EdgelistError(f"{path}: no edges")
    ids = sorted({x for e in raw for x in e})
    remap = {old: new for new, old in enumerate(ids)}
    seen = set()
    dupes = 0
    edges = []
    for u, v in raw:
        key = (min(remap[u], remap[v]), max(remap[u], remap[v]))
        if key in seen:
            dupes += 1
            continue
        seen.add(key)
        edges.append(key)
    if dupes:
        warnings.warn(f"{path}: dropped {dupes} duplicate edge(s)", DuplicateEdgeWarning, stacklevel=2)
    net = SocialNetwork.from_edges(len(ids), edges, require_connected=False)
    if not net.is_connected():
        if require_connected:
            raise ConfigError(f"{path}: social network is not connected")
        warnings.warn(f"{path}: social network is not connected", DisconnectedGraphWarning, stacklevel=2)
    return net


def save_edgelist(net: SocialNetwork, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for u, v in net.edges:
            fh.write(f"{u} {v}\n")
