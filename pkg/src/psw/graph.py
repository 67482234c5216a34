"""Immutable simple undirected graphs on dense vertex ids ``0..n-1``.

Adjacency is stored in CSR form (numpy) so that million-vertex instances
stay cheap; small graphs can ask for plain Python adjacency lists.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptySubset, MalformedEdge, PreconditionFailed

VertexSet = frozenset


class Graph:
    """Simple undirected graph with vertices ``0..n-1``.

    Instances are immutable: the edge arrays are flagged read-only and
    every derived view (induced subgraph, vertex deletion) returns a new
    graph together with an explicit id table.
    """

    __slots__ = ("n", "_u", "_v", "_indptr", "_indices", "_keys", "_adj", "_csr")

    def __init__(self, n: int, u: np.ndarray, v: np.ndarray):
        # callers guarantee u < v, lexicographically sorted, no duplicates
        self.n = int(n)
        self._u = u
        self._v = v
        self._u.flags.writeable = False
        self._v.flags.writeable = False
        self._keys = u.astype(np.int64) * max(self.n, 1) + v
        self._keys.flags.writeable = False
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        order = np.lexsort((dst, src))
        self._indices = dst[order]
        counts = np.bincount(src, minlength=self.n) if self.n else np.zeros(0, np.int64)
        self._indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=self._indptr[1:])
        self._indices.flags.writeable = False
        self._indptr.flags.writeable = False
        self._adj = None
        self._csr = None

    # -- basic queries -------------------------------------------------
    @property
    def vertex_count(self) -> int:
        return self.n

    @property
    def edge_count(self) -> int:
        return int(self._u.shape[0])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._u, other._u)
            and np.array_equal(self._v, other._v)
        )

    def __hash__(self) -> int:
        return hash((self.n, self._keys.tobytes()))

    def edge_array(self) -> np.ndarray:
        """``(m, 2)`` array of edges ``(u, v)`` with ``u < v``, sorted."""
        return np.stack([self._u, self._v], axis=1)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self._u.tolist(), self._v.tolist()))

    @property
    def indptr(self) -> np.ndarray:
        return self._indptr

    @property
    def indices(self) -> np.ndarray:
        return self._indices

    def neighbors(self, v: int) -> np.ndarray:
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def adjacency(self) -> list[list[int]]:
        """Sorted neighbour lists as Python lists (cached)."""
        if self._adj is None:
            flat = self._indices.tolist()
            ptr = self._indptr.tolist()
            self._adj = [flat[ptr[i]:ptr[i + 1]] for i in range(self.n)]
        return self._adj

    def degree(self, v: int) -> int:
        return int(self._indptr[v + 1] - self._indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    def has_edge(self, a: int, b: int) -> bool:
        if a == b:
            return False
        if a > b:
            a, b = b, a
        key = a * max(self.n, 1) + b
        i = np.searchsorted(self._keys, key)
        return bool(i < self._keys.shape[0] and self._keys[i] == key)

    def has_edges(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Vectorised ``has_edge`` over two equal-length id arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        keys = lo * max(self.n, 1) + hi
        if self._keys.shape[0] == 0:
            return np.zeros(keys.shape, dtype=bool)
        i = np.searchsorted(self._keys, keys)
        i = np.minimum(i, self._keys.shape[0] - 1)
        return (self._keys[i] == keys) & (a != b)

    def csr(self) -> csr_matrix:
        if self._csr is None:
            data = np.ones(self._indices.shape[0], dtype=np.int8)
            self._csr = csr_matrix((data, self._indices, self._indptr), shape=(self.n, self.n))
        return self._csr

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", np.ndarray]:
        """Return ``(sub, old_ids)`` where ``old_ids[new] = old``."""
        old_ids = np.unique(np.fromiter(vertices, dtype=np.int64))
        new_of = np.full(self.n, -1, dtype=np.int64)
        new_of[old_ids] = np.arange(old_ids.shape[0])
        keep = (new_of[self._u] >= 0) & (new_of[self._v] >= 0)
        u = new_of[self._u[keep]]
        v = new_of[self._v[keep]]
        return _from_canonical(old_ids.shape[0], u, v), old_ids


def _from_canonical(n: int, u: np.ndarray, v: np.ndarray) -> Graph:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))
    return Graph(n, np.ascontiguousarray(lo[order]), np.ascontiguousarray(hi[order]))


def build_graph(n: int, edge_list: Iterable[Sequence[int]] | np.ndarray) -> Graph:
    """Build a graph, rejecting out-of-range ids, self-loops and duplicates."""
    if n < 0:
        raise MalformedEdge(f"negative vertex count {n}")
    arr = np.asarray(edge_list if isinstance(edge_list, np.ndarray) else list(edge_list), dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise MalformedEdge("edge list must contain pairs")
    u, v = arr[:, 0], arr[:, 1]
    bad = (u < 0) | (u >= n) | (v < 0) | (v >= n)
    if bad.any():
        i = int(np.argmax(bad))
        raise MalformedEdge(f"edge {tuple(arr[i].tolist())} has an id outside 0..{n - 1}")
    loops = u == v
    if loops.any():
        i = int(np.argmax(loops))
        raise MalformedEdge(f"self-loop at vertex {int(u[i])}")
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
    if dup.any():
        i = int(np.argmax(dup))
        raise MalformedEdge(f"duplicate edge ({int(lo[i])}, {int(hi[i])})")
    return Graph(n, np.ascontiguousarray(lo), np.ascontiguousarray(hi))


def _as_id_array(g: Graph, s: Iterable[int]) -> np.ndarray:
    if isinstance(s, np.ndarray):
        arr = s.astype(np.int64, copy=False)
    else:
        arr = np.fromiter(s, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= g.n):
        raise PreconditionFailed(f"vertex set is not contained in V(G) = 0..{g.n - 1}")
    return arr


def component_labels(g: Graph, removed: Iterable[int] = ()) -> tuple[np.ndarray, int]:
    """Label the components of ``G - removed``.

    Returns ``(labels, k)``: ``labels[v]`` is in ``0..k-1`` for surviving
    vertices (components numbered by smallest member) and ``-1`` for
    removed ones.
    """
    gone = np.zeros(g.n, dtype=bool)
    gone[_as_id_array(g, removed)] = True
    keep = ~(gone[g._u] | gone[g._v])
    u, v = g._u[keep], g._v[keep]
    mat = csr_matrix((np.ones(u.shape[0], dtype=np.int8), (u, v)), shape=(g.n, g.n))
    _, raw = connected_components(mat, directed=False)
    raw = np.where(gone, -1, raw)
    # renumber so that component order follows the smallest member
    alive = np.flatnonzero(~gone)
    if alive.size == 0:
        return raw, 0
    _, first = np.unique(raw[alive], return_index=True)
    firsts = np.sort(alive[first])
    remap = np.full(raw.max() + 1, -1, dtype=np.int64)
    remap[raw[firsts]] = np.arange(firsts.shape[0])
    labels = np.where(gone, -1, remap[np.maximum(raw, 0)])
    return labels, int(firsts.shape[0])


def components_avoiding(g: Graph, removed: Iterable[int] = ()) -> list[VertexSet]:
    """Connected components of ``G - removed``, ordered by smallest member."""
    labels, k = component_labels(g, removed)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(k + 1), side="left")
    return [frozenset(order[bounds[i]:bounds[i + 1]].tolist()) for i in range(k)]


def _expand(g: Graph, frontier: np.ndarray) -> np.ndarray:
    starts = g._indptr[frontier]
    lens = g._indptr[frontier + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
    return g._indices[offsets]


def bfs_distances(g: Graph, sources: Iterable[int], targets: Iterable[int] | None = None,
                  max_depth: int | None = None) -> np.ndarray:
    """Multi-source breadth-first distances; ``-1`` marks unreached vertices.

    The sweep stops early once every vertex of ``targets`` has been reached
    or the frontier passes ``max_depth``.
    """
    dist = np.full(g.n, -1, dtype=np.int64)
    frontier = np.unique(_as_id_array(g, sources))
    dist[frontier] = 0
    want = None if targets is None else np.unique(_as_id_array(g, targets))
    d = 0
    while frontier.size:
        if want is not None and (dist[want] >= 0).all():
            break
        if max_depth is not None and d >= max_depth:
            break
        nbrs = _expand(g, frontier)
        nbrs = np.unique(nbrs[dist[nbrs] < 0])
        d += 1
        dist[nbrs] = d
        frontier = nbrs
    return dist


def distance(g: Graph, a: int, b: int) -> float:
    d = bfs_distances(g, [a], [b])[b]
    return math.inf if d < 0 else int(d)


def diameter_of_subset(g: Graph, r: Iterable[int]) -> float:
    """``max dist_G(v, w)`` over ``v, w`` in ``r``; ``math.inf`` if disconnected."""
    members = np.unique(_as_id_array(g, r))
    if members.size == 0:
        raise EmptySubset("diameter of an empty set is undefined")
    best = 0
    for s in members.tolist():
        dist = bfs_distances(g, [s], members)
        reached = dist[members]
        if (reached < 0).any():
            return math.inf
        best = max(best, int(reached.max()))
    return best


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    _, k = component_labels(g)
    return k == 1


def is_tree(g: Graph) -> bool:
    return g.n >= 1 and g.edge_count == g.n - 1 and is_connected(g)


def neighborhood(g: Graph, s: Iterable[int]) -> VertexSet:
    """``N_G(S)``: vertices outside ``S`` adjacent to some member of ``S``."""
    arr = np.unique(_as_id_array(g, s))
    if arr.size == 0:
        return frozenset()
    nb = np.unique(_expand(g, arr))
    inside = np.zeros(g.n, dtype=bool)
    inside[arr] = True
    return frozenset(nb[~inside[nb]].tolist())


def path_graph(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> Graph:
    return build_graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def quotient_graph(g: Graph, owner: np.ndarray, k: int) -> Graph:
    """Graph on ``0..k-1`` joining ``owner[u]`` and ``owner[v]`` for every edge ``uv``."""
    a, b = owner[g._u], owner[g._v]
    keep = a != b
    lo, hi = np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])
    keys = np.unique(lo * max(k, 1) + hi)
    return _from_canonical(k, keys // max(k, 1), keys % max(k, 1))
