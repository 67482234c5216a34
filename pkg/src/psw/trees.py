"""Complete binary trees, the family G_h, and subdivided grids.

``T_h`` uses implicit heap indexing: the root is 0 and the children of
``v`` are ``2v+1`` (left) and ``2v+2`` (right).  Within a level, heap order
is left-to-right order, so every structural query is O(1) or O(h).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import BudgetExceeded, HeightTooLarge, NotUnrelated, PreconditionFailed
from .graph import Graph, _from_canonical, build_graph

DEFAULT_VERTEX_BUDGET = 1 << 25


def depth_of(v: int) -> int:
    return (v + 1).bit_length() - 1


@dataclass(frozen=True)
class CompleteBinaryTree:
    height: int

    root: int = field(default=0, init=False)

    @property
    def h(self) -> int:
        return self.height

    @property
    def vertex_count(self) -> int:
        return (1 << (self.height + 1)) - 1

    @property
    def leaf_count(self) -> int:
        return 1 << self.height

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.vertex_count

    def depth(self, v: int) -> int:
        return (v + 1).bit_length() - 1

    def vertex_height(self, v: int) -> int:
        return self.height - self.depth(v)

    def parent(self, v: int) -> int:
        if v == 0:
            raise PreconditionFailed("the root has no parent")
        return (v - 1) >> 1

    def left(self, v: int) -> int:
        return 2 * v + 1

    def right(self, v: int) -> int:
        return 2 * v + 2

    def children(self, v: int) -> tuple[int, ...]:
        if self.is_leaf(v):
            return ()
        return (2 * v + 1, 2 * v + 2)

    def is_leaf(self, v: int) -> bool:
        return self.depth(v) == self.height

    def level(self, d: int) -> range:
        """Depth-``d`` vertices in left-to-right order."""
        return range((1 << d) - 1, (1 << (d + 1)) - 1)

    def leaves(self) -> range:
        return self.level(self.height)

    def ancestor_at_depth(self, v: int, d: int) -> int:
        dv = self.depth(v)
        if d > dv:
            raise PreconditionFailed(f"vertex {v} has depth {dv} < {d}")
        return ((v + 1) >> (dv - d)) - 1

    def is_ancestor(self, a: int, v: int, proper: bool = False) -> bool:
        """True iff ``a`` lies on the path from ``v`` to the root."""
        da, dv = self.depth(a), self.depth(v)
        if da > dv or (proper and da == dv):
            return False
        return ((v + 1) >> (dv - da)) == a + 1

    def lca(self, a: int, b: int) -> int:
        a1, b1 = a + 1, b + 1
        da, db = a1.bit_length(), b1.bit_length()
        if da > db:
            a1 >>= da - db
        else:
            b1 >>= db - da
        while a1 != b1:
            a1 >>= 1
            b1 >>= 1
        return a1 - 1

    def dist(self, a: int, b: int) -> int:
        c = self.lca(a, b)
        return self.depth(a) + self.depth(b) - 2 * self.depth(c)

    def leaf_interval(self, v: int) -> tuple[int, int]:
        """Half-open interval of leaf ranks (0-based, left to right) below ``v``."""
        shift = self.height - self.depth(v)
        lo = ((v + 1) << shift) - (1 << self.height)
        return lo, lo + (1 << shift)

    def leftmost_path(self, v: int) -> list[int]:
        """``v`` followed by left children down to a leaf."""
        path = [v]
        for _ in range(self.vertex_height(v)):
            path.append(2 * path[-1] + 1)
        return path

    def subtree_vertices(self, v: int) -> Iterable[int]:
        dv = self.depth(v)
        for k in range(self.height - dv + 1):
            first = ((v + 1) << k) - 1
            yield from range(first, first + (1 << k))

    def in_subtree(self, r: int, members: Iterable[int]) -> list[int]:
        return [s for s in members if self.is_ancestor(r, s)]

    @cached_property
    def graph(self) -> Graph:
        n = self.vertex_count
        child = np.arange(1, n, dtype=np.int64)
        return _from_canonical(n, (child - 1) >> 1, child)


def build_binary_tree(h: int, budget: int = DEFAULT_VERTEX_BUDGET) -> CompleteBinaryTree:
    if h < 0:
        raise PreconditionFailed("height must be non-negative")
    if (1 << (h + 1)) - 1 > budget:
        raise HeightTooLarge(f"T_{h} has {(1 << (h + 1)) - 1} vertices, budget is {budget}")
    return CompleteBinaryTree(h)


def _interval_keys(t: CompleteBinaryTree, b: Iterable[int]) -> list[tuple[int, int, int]]:
    out = []
    for v in b:
        if v not in t:
            raise PreconditionFailed(f"vertex {v} is not in T_{t.height}")
        lo, hi = t.leaf_interval(v)
        out.append((lo, hi, v))
    out.sort()
    return out


def is_unrelated(t: CompleteBinaryTree, b: Iterable[int]) -> bool:
    """No member is an ancestor of another (leaf intervals pairwise disjoint)."""
    keys = _interval_keys(t, set(b))
    return all(keys[i][1] <= keys[i + 1][0] for i in range(len(keys) - 1))


def left_to_right_order(t: CompleteBinaryTree, b: Iterable[int]) -> list[int]:
    keys = _interval_keys(t, set(b))
    for i in range(len(keys) - 1):
        if keys[i][1] > keys[i + 1][0]:
            raise NotUnrelated(f"{keys[i][2]} and {keys[i + 1][2]} are related")
    return [v for _, _, v in keys]


@dataclass(frozen=True)
class GhGraph:
    """``T_h`` plus a left-to-right path ``D_i`` through every level ``i >= 1``."""

    tree: CompleteBinaryTree
    graph: Graph

    @property
    def h(self) -> int:
        return self.tree.height

    @property
    def n(self) -> int:
        return self.graph.n

    def level_path(self, i: int) -> range:
        if not 1 <= i <= self.h:
            raise PreconditionFailed(f"D_{i} is defined for 1 <= i <= {self.h}")
        return self.tree.level(i)

    @property
    def level_paths(self) -> list[range]:
        return [self.tree.level(i) for i in range(1, self.h + 1)]

    def depth_array(self) -> np.ndarray:
        return depth_array(self.h)


def depth_array(h: int) -> np.ndarray:
    """``depth[v]`` for every vertex of ``T_h``."""
    starts = (1 << np.arange(h + 1, dtype=np.int64)) - 1
    ids = np.arange((1 << (h + 1)) - 1, dtype=np.int64)
    return np.searchsorted(starts, ids, side="right") - 1


def gh_edge_arrays(h: int) -> tuple[np.ndarray, np.ndarray]:
    n = (1 << (h + 1)) - 1
    child = np.arange(1, n, dtype=np.int64)
    tu, tv = (child - 1) >> 1, child
    ids = np.arange(n, dtype=np.int64)
    # consecutive ids on one level: v and v+1 with v+1 not the first of a level
    nxt = ids[:-1] + 1
    same_level = ((nxt + 1) & nxt) != 0
    du, dv = ids[:-1][same_level], nxt[same_level]
    return np.concatenate([tu, du]), np.concatenate([tv, dv])


def build_gh(h: int, budget: int = DEFAULT_VERTEX_BUDGET) -> GhGraph:
    if h < 1:
        raise PreconditionFailed("G_h is defined for h >= 1")
    tree = build_binary_tree(h, budget)
    u, v = gh_edge_arrays(h)
    return GhGraph(tree, _from_canonical(tree.vertex_count, u, v))


@dataclass(frozen=True)
class SubdividedGrid:
    """An ``x`` by ``y`` grid whose horizontal edges carry subdivision chains.

    Columns and rows are 1-based as in the usual grid notation.  Grid
    vertex ``(i, j)`` gets id ``(i-1)*y + (j-1)``; subdivision vertices
    follow, chain by chain, in ``(i, j)`` order.  The chain of horizontal
    edge ``(i, j)`` runs from ``(i, j)`` towards ``(i+1, j)``.
    """

    x: int
    y: int
    grid_vertices: Mapping[tuple[int, int], int]
    subdivision_vertices: Mapping[tuple[int, int], tuple[int, ...]]
    graph: Graph

    def grid_id(self, i: int, j: int) -> int:
        return (i - 1) * self.y + (j - 1)

    def column(self, i: int) -> list[int]:
        return [self.grid_id(i, j) for j in range(1, self.y + 1)]

    @property
    def grid_vertex_count(self) -> int:
        return self.x * self.y

    def is_subdivision(self, v: int) -> bool:
        return self.grid_vertex_count <= v < self.graph.n

    def column_of(self, v: int) -> int | None:
        if self.is_subdivision(v):
            return None
        return v // self.y + 1

    def contracted(self) -> Graph:
        """Contract every chain back into its horizontal edge."""
        edges = []
        for i in range(1, self.x + 1):
            for j in range(1, self.y):
                edges.append((self.grid_id(i, j), self.grid_id(i, j + 1)))
        for (i, j), chain in self.subdivision_vertices.items():
            edges.append((self.grid_id(i, j), self.grid_id(i + 1, j)))
        return build_graph(self.grid_vertex_count, edges)


Divisions = int | Mapping[tuple[int, int], int] | Callable[[int, int], int]


def build_subdivided_grid(x: int, y: int, divisions: Divisions = 0,
                          budget: int = DEFAULT_VERTEX_BUDGET) -> SubdividedGrid:
    """Grid ``G_{x×y}`` with ``divisions(i, j)`` vertices on horizontal edge ``(i, j)``.

    ``divisions`` may be one count for every edge, a mapping keyed by the
    left endpoint ``(i, j)`` (missing keys mean 0), or a callable.
    """
    if x < 1 or y < 1:
        raise PreconditionFailed("grid dimensions must be positive")
    if isinstance(divisions, int):
        count = lambda i, j: divisions  # noqa: E731
    elif callable(divisions):
        count = divisions
    else:
        for (i, j) in divisions:
            if not (1 <= i < x and 1 <= j <= y):
                raise PreconditionFailed(f"({i}, {j}) is not a horizontal edge of the {x}x{y} grid")
        count = lambda i, j: divisions.get((i, j), 0)  # noqa: E731
    total = x * y
    plan = []
    for i in range(1, x):
        for j in range(1, y + 1):
            k = int(count(i, j))
            if k < 0:
                raise PreconditionFailed("subdivision counts must be non-negative")
            plan.append((i, j, k))
            total += k
    if total > budget:
        raise BudgetExceeded(f"subdivided grid would have {total} vertices, budget is {budget}")

    gid = lambda i, j: (i - 1) * y + (j - 1)  # noqa: E731
    grid_vertices = {(i, j): gid(i, j) for i in range(1, x + 1) for j in range(1, y + 1)}
    edges = []
    for i in range(1, x + 1):
        for j in range(1, y):
            edges.append((gid(i, j), gid(i, j + 1)))
    nxt = x * y
    chains = {}
    for i, j, k in plan:
        chain = tuple(range(nxt, nxt + k))
        nxt += k
        walk = [gid(i, j), *chain, gid(i + 1, j)]
        edges.extend(zip(walk, walk[1:]))
        chains[(i, j)] = chain
    return SubdividedGrid(x, y, grid_vertices, chains, build_graph(nxt, edges))
