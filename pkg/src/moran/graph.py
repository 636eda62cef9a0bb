"""Graph representation, generators, edge-list I/O and degree-derived quantities."""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np


class GraphError(ValueError):
    """Raised for graphs that are not simple, connected, undirected and of order >= 2."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple connected undirected graph on vertices ``0..n-1``.

    Build one with :meth:`from_edges` or a generator; the constructor validates
    the adjacency lists it is given. Alongside the tuple-based adjacency a CSR
    copy (``indptr``/``indices``) and the reciprocal degree table are cached
    for the simulation kernels.
    """

    adjacency: tuple[tuple[int, ...], ...]
    n: int = field(init=False)
    degree: tuple[int, ...] = field(init=False)
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)
    inv_degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        adj = tuple(tuple(sorted(nbrs)) for nbrs in self.adjacency)
        n = len(adj)
        if n < 2:
            raise GraphError(f"graph must have at least 2 vertices, got {n}")
        for x, nbrs in enumerate(adj):
            if len(set(nbrs)) != len(nbrs):
                raise GraphError(f"duplicate neighbour in adjacency of vertex {x}")
            for y in nbrs:
                if not 0 <= y < n:
                    raise GraphError(f"vertex {x} has out-of-range neighbour {y}")
                if y == x:
                    raise GraphError(f"self-loop at vertex {x}")
                if x not in adj[y]:
                    raise GraphError(f"edge {x}-{y} is not symmetric")
        unreached = n - len(_reachable(adj, 0))
        if unreached:
            raise GraphError(f"graph is disconnected ({unreached} vertices unreachable from 0)")

        deg = tuple(len(nbrs) for nbrs in adj)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.fromiter((y for nbrs in adj for y in nbrs), dtype=np.int64, count=int(indptr[-1]))
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "degree", deg)
        object.__setattr__(self, "indptr", _frozen(indptr))
        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(self, "inv_degree", _frozen(1.0 / np.asarray(deg, dtype=np.float64)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build from an edge iterable; duplicate edges are collapsed."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(s) for s in nbrs))

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` pairs with ``u < v``, sorted lexicographically."""
        return [(x, y) for x, nbrs in enumerate(self.adjacency) for y in nbrs if x < y]

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash(self.adjacency)


def _reachable(adj: Sequence[Sequence[int]], source: int) -> set[int]:
    seen = {source}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


# --------------------------------------------------------------------------- I/O


def parse_edge_list(text: Union[str, bytes, io.IOBase]) -> Graph:
    """Parse ``u v`` lines into a :class:`Graph`.

    Blank lines and lines starting with ``#`` are skipped. The vertex count is
    one more than the largest id seen, so an id gap leaves an isolated vertex
    and is reported as a disconnection.
    """
    if hasattr(text, "read"):
        text = text.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphError(f"line {lineno}: expected 2 vertex ids, got {len(tokens)} tokens")
        try:
            u, v = (int(t) for t in tokens)
        except ValueError:
            raise GraphError(f"line {lineno}: unparseable token in {line!r}") from None
        if u < 0 or v < 0 or not (tokens[0].isdigit() and tokens[1].isdigit()):
            raise GraphError(f"line {lineno}: vertex ids must be non-negative integers")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key not in seen:
            seen.add(key)
            edges.append(key)
        max_id = max(max_id, u, v)

    n = max_id + 1
    if n < 2:
        raise GraphError("graph must have at least 2 vertices")
    return Graph.from_edges(n, edges)


def to_edge_list(g: Graph) -> str:
    """Canonical text form: one ``u v`` line per edge, ``u < v``, sorted, LF endings."""
    return "".join(f"{u} {v}\n" for u, v in g.edges())


# --------------------------------------------------------------------------- generators


def _require(n: int, minimum: int, kind: str) -> None:
    if n < minimum:
        raise GraphError(f"{kind} needs n >= {minimum}, got {n}")


def gen_clique(n: int) -> Graph:
    _require(n, 2, "clique")
    return Graph.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def gen_cycle(n: int) -> Graph:
    _require(n, 3, "cycle")
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def gen_path(n: int) -> Graph:
    _require(n, 2, "path")
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def gen_star(n: int) -> Graph:
    """Star with centre 0 and leaves ``1..n-1``."""
    _require(n, 2, "star")
    return Graph.from_edges(n, ((0, i) for i in range(1, n)))


def gen_double_star(n: int) -> Graph:
    """Two stars whose centres 0 and 1 are adjacent.

    Centre 0 gets ``ceil((n-2)/2)`` leaves (vertices ``2..``), centre 1 the rest.
    """
    _require(n, 4, "double-star")
    big = (n - 1) // 2  # == ceil((n - 2) / 2)
    edges = [(0, 1)]
    edges += [(0, v) for v in range(2, 2 + big)]
    edges += [(1, v) for v in range(2 + big, n)]
    return Graph.from_edges(n, edges)


def double_star_halves(g: Graph) -> tuple[frozenset[int], frozenset[int]]:
    """Vertex sets of the two stars of a :func:`gen_double_star` graph (centre 0's first)."""
    big = (g.n - 1) // 2
    first = frozenset([0, *range(2, 2 + big)])
    return first, frozenset(range(g.n)) - first


def gen_random_connected(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Random spanning tree (random attachment) plus each remaining pair with probability ``p``."""
    _require(n, 2, "random graph")
    order = rng.permutation(n)
    edges = {tuple(sorted((int(order[i]), int(order[rng.integers(i)])))) for i in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.add((u, v))
    return Graph.from_edges(n, edges)


GENERATORS = {
    "clique": gen_clique,
    "cycle": gen_cycle,
    "path": gen_path,
    "star": gen_star,
    "double-star": gen_double_star,
}


# --------------------------------------------------------------------------- scalars


def total_fitness(g: Graph, X: Iterable[int], r: float) -> float:
    """W(X) = r|X| + (n - |X|)."""
    k = len(set(X))
    return r * k + (g.n - k)


def potential(g: Graph, X: Iterable[int]) -> float:
    """Sum of reciprocal degrees over ``X``; ``potential(g, range(g.n))`` is the graph potential."""
    return float(sum(g.inv_degree[x] for x in set(X)))


def graph_potential(g: Graph) -> float:
    return float(g.inv_degree.sum())


def phi_prime_0(g: Graph) -> float:
    """Mean of squared reciprocal degrees, i.e. the expected squared potential of one random mutant."""
    return float(np.mean(g.inv_degree**2))


def q_value(g: Graph, x: int) -> float:
    """Sum of ``1/deg y`` over the neighbours ``y`` of ``x``."""
    return float(g.inv_degree[g.indices[g.indptr[x] : g.indptr[x + 1]]].sum())


def q_values(g: Graph) -> np.ndarray:
    """:func:`q_value` for every vertex."""
    return np.add.reduceat(g.inv_degree[g.indices], g.indptr[:-1])
