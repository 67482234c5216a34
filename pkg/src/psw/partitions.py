"""H-partitions, layerings, strong products and the conversions between them.

An ``HPartition`` stores an owner array (subject vertex -> host vertex), so
disjointness and coverage hold by construction and million-vertex
partitions stay compact.  Empty parts are allowed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    CellTooLarge,
    Disconnected,
    EmptySubset,
    HostMismatch,
    InvalidEmbedding,
    InvalidLayering,
    NotAPartition,
    PreconditionFailed,
)
from .graph import Graph, _from_canonical, bfs_distances, component_labels, diameter_of_subset, is_tree
from .trees import DEFAULT_VERTEX_BUDGET, GhGraph, depth_array


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    arr.flags.writeable = False
    return arr


def _owner_from_parts(parts: Mapping[int, Iterable[int]] | Sequence[Iterable[int]],
                      n: int, part_count: int) -> np.ndarray:
    items = parts.items() if isinstance(parts, Mapping) else enumerate(parts)
    owner = np.full(n, -1, dtype=np.int64)
    for x, members in items:
        if not 0 <= int(x) < part_count:
            raise NotAPartition(f"part index {x} is outside 0..{part_count - 1}")
        ids = np.fromiter((int(v) for v in members), dtype=np.int64)
        if ids.size == 0:
            continue
        if ids.min() < 0 or ids.max() >= n:
            raise NotAPartition(f"part {x} names a vertex outside 0..{n - 1}")
        if np.unique(ids).size != ids.size or (owner[ids] >= 0).any():
            clash = ids[owner[ids] >= 0]
            v = int(clash[0]) if clash.size else int(ids[0])
            raise NotAPartition(f"vertex {v} appears in more than one part")
        owner[ids] = int(x)
    missing = np.flatnonzero(owner < 0)
    if missing.size:
        raise NotAPartition(f"vertex {int(missing[0])} is not covered by any part")
    return owner


class _Grouping:
    """Shared machinery for owner-array partitions."""

    owner: np.ndarray
    part_count: int

    def _groups(self):
        cached = getattr(self, "_group_cache", None)
        if cached is None:
            order = np.argsort(self.owner, kind="stable")
            bounds = np.searchsorted(self.owner[order], np.arange(self.part_count + 1))
            cached = (order, bounds)
            object.__setattr__(self, "_group_cache", cached)
        return cached

    def members(self, x: int) -> np.ndarray:
        """Sorted member ids of part ``x``."""
        order, bounds = self._groups()
        return order[bounds[x]:bounds[x + 1]]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.part_count)

    @property
    def subject_vertex_count(self) -> int:
        return int(self.owner.shape[0])


@dataclass(frozen=True, eq=False)
class HPartition(_Grouping):
    """Partition of a subject graph's vertices indexed by the vertices of ``host``."""

    host: Graph
    owner: np.ndarray

    def __post_init__(self):
        owner = _frozen(self.owner)
        if owner.size and (owner.min() < 0 or owner.max() >= self.host.n):
            raise NotAPartition("owner array names a host vertex that does not exist")
        object.__setattr__(self, "owner", owner)

    @classmethod
    def from_parts(cls, host: Graph, parts: Mapping[int, Iterable[int]] | Sequence[Iterable[int]],
                   subject_vertex_count: int) -> "HPartition":
        return cls(host, _owner_from_parts(parts, subject_vertex_count, host.n))

    @property
    def part_count(self) -> int:
        return self.host.n

    def part(self, x: int) -> frozenset:
        return frozenset(self.members(x).tolist())

    @property
    def parts(self) -> dict[int, frozenset]:
        return {x: self.part(x) for x in range(self.host.n)}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HPartition):
            return NotImplemented
        return self.host == other.host and np.array_equal(self.owner, other.owner)


@dataclass(frozen=True, eq=False)
class Layering(_Grouping):
    """Path-partition: layer ``k`` of vertex ``v`` is ``layer_of[v]``."""

    layer_of: np.ndarray
    layer_count: int

    def __post_init__(self):
        arr = _frozen(self.layer_of)
        if arr.size and (arr.min() < 0 or arr.max() >= self.layer_count):
            raise NotAPartition("layer index out of range")
        object.__setattr__(self, "layer_of", arr)

    @property
    def owner(self) -> np.ndarray:
        return self.layer_of

    @property
    def part_count(self) -> int:
        return self.layer_count

    @classmethod
    def from_layers(cls, layers: Sequence[Iterable[int]], subject_vertex_count: int) -> "Layering":
        return cls(_owner_from_parts(layers, subject_vertex_count, len(layers)), len(layers))

    @property
    def layers(self) -> list[frozenset]:
        return [frozenset(self.members(k).tolist()) for k in range(self.layer_count)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Layering):
            return NotImplemented
        return self.layer_count == other.layer_count and np.array_equal(self.layer_of, other.layer_of)


@dataclass(frozen=True, eq=False)
class ProductEmbedding:
    """Injective map of ``subject`` into ``H ⊠ P ⊠ K_c``.

    ``factor_p_length`` is the number of path positions (0-based layer
    indices); ``coords[v] = (h-vertex, path position, clique slot)``.
    """

    subject: Graph
    factor_h: Graph
    factor_p_length: int
    clique_size: int
    coords: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.coords, dtype=np.int64).reshape(-1, 3)
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @property
    def map(self) -> dict[int, tuple[int, int, int]]:
        return {v: tuple(row) for v, row in enumerate(self.coords.tolist())}


def partition_width(p: HPartition | Layering) -> int:
    sizes = p.sizes()
    return int(sizes.max()) if sizes.size else 0


def validate_hpartition(g: Graph, p: HPartition) -> list[tuple[int, int]]:
    """Edges ``vw`` of ``g`` whose parts are distinct and non-adjacent in the host."""
    if p.subject_vertex_count != g.n:
        raise NotAPartition(f"partition covers {p.subject_vertex_count} vertices, graph has {g.n}")
    e = g.edge_array()
    a, b = p.owner[e[:, 0]], p.owner[e[:, 1]]
    ok = (a == b) | p.host.has_edges(a, b)
    return [tuple(row) for row in e[~ok].tolist()]


def validate_layering(g: Graph, lay: Layering) -> list[tuple[int, int]]:
    """Edges of ``g`` whose endpoints are more than one layer apart."""
    if lay.subject_vertex_count != g.n:
        raise NotAPartition(f"layering covers {lay.subject_vertex_count} vertices, graph has {g.n}")
    e = g.edge_array()
    gap = np.abs(lay.layer_of[e[:, 0]] - lay.layer_of[e[:, 1]])
    return [tuple(row) for row in e[gap > 1].tolist()]


def is_tree_partition(g: Graph, p: HPartition) -> bool:
    return is_tree(p.host) and not validate_hpartition(g, p)


def bfs_layering(g: Graph, root: int) -> Layering:
    dist = bfs_distances(g, [root])
    if (dist < 0).any():
        raise Disconnected(f"vertex {int(np.argmax(dist < 0))} is unreachable from {root}")
    return Layering(dist, int(dist.max()) + 1)


def depth_layering(gh: GhGraph) -> Layering:
    return Layering(depth_array(gh.h), gh.h + 1)


def strong_product(g1: Graph, g2: Graph, budget: int = DEFAULT_VERTEX_BUDGET) -> tuple[Graph, np.ndarray]:
    """``G1 ⊠ G2`` with ``coords[id] = (v, x)`` and ``id = v * |V2| + x``."""
    n1, n2 = g1.n, g2.n
    if n1 == 0 or n2 == 0:
        raise PreconditionFailed("strong product factors must be non-empty")
    if n1 * n2 > budget:
        raise BudgetExceeded(f"product would have {n1 * n2} vertices, budget is {budget}")
    e1, e2 = g1.edge_array(), g2.edge_array()
    xs = np.arange(n2, dtype=np.int64)
    vs = np.arange(n1, dtype=np.int64)
    parts_u, parts_v = [], []
    # (i) vw in E1, x = y
    parts_u.append((e1[:, 0, None] * n2 + xs[None, :]).ravel())
    parts_v.append((e1[:, 1, None] * n2 + xs[None, :]).ravel())
    # (ii) v = w, xy in E2
    parts_u.append((vs[:, None] * n2 + e2[None, :, 0]).ravel())
    parts_v.append((vs[:, None] * n2 + e2[None, :, 1]).ravel())
    # (iii) vw in E1 and xy in E2, both orientations of xy
    for s, t in ((0, 1), (1, 0)):
        parts_u.append((e1[:, 0, None] * n2 + e2[None, :, s]).ravel())
        parts_v.append((e1[:, 1, None] * n2 + e2[None, :, t]).ravel())
    u = np.concatenate(parts_u)
    v = np.concatenate(parts_v)
    coords = np.stack([np.repeat(vs, n2), np.tile(xs, n1)], axis=1)
    return _from_canonical(n1 * n2, u, v), coords


def embedding_violations(e: ProductEmbedding) -> list[str]:
    g, c = e.subject, e.coords
    problems = []
    if c.shape[0] != g.n:
        return [f"map has {c.shape[0]} rows for {g.n} subject vertices"]
    if g.n == 0:
        return []
    if (c[:, 0] < 0).any() or (c[:, 0] >= e.factor_h.n).any():
        problems.append("H coordinate out of range")
    if (c[:, 1] < 0).any() or (c[:, 1] >= e.factor_p_length).any():
        problems.append("path coordinate out of range")
    if (c[:, 2] < 0).any() or (c[:, 2] >= e.clique_size).any():
        problems.append("clique slot out of range")
    if problems:
        return problems
    keys = (c[:, 0] * e.factor_p_length + c[:, 1]) * e.clique_size + c[:, 2]
    if np.unique(keys).size != keys.size:
        problems.append("map is not injective")
    ed = g.edge_array()
    a, b = c[ed[:, 0]], c[ed[:, 1]]
    h_ok = (a[:, 0] == b[:, 0]) | e.factor_h.has_edges(a[:, 0], b[:, 0])
    p_ok = np.abs(a[:, 1] - b[:, 1]) <= 1
    bad = ed[~(h_ok & p_ok)]
    for u, v in bad[:5].tolist():
        problems.append(f"edge ({u}, {v}) is not carried to a product edge")
    return problems


def partitions_to_embedding(g: Graph, hp: HPartition, lay: Layering, c: int) -> ProductEmbedding:
    """Witness ``G ⊑ H ⊠ P ⊠ K_c`` from an H-partition and a layering.

    Clique slots number the members of each cell ``B_x ∩ P_y`` in
    increasing vertex id.
    """
    if validate_hpartition(g, hp):
        raise PreconditionFailed("H-partition is not valid for the graph")
    if validate_layering(g, lay):
        raise PreconditionFailed("layering is not valid for the graph")
    if c < 1:
        raise PreconditionFailed("c must be at least 1")
    L = lay.layer_count
    cell = hp.owner * L + lay.layer_of
    order = np.lexsort((np.arange(g.n), cell))
    sorted_cells = cell[order]
    uniq, first, counts = np.unique(sorted_cells, return_index=True, return_counts=True)
    if counts.size and counts.max() > c:
        i = int(np.argmax(counts > c))
        raise CellTooLarge(int(uniq[i] // L), int(uniq[i] % L), int(counts[i]), c)
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n) - np.repeat(first, counts)
    coords = np.stack([hp.owner, lay.layer_of, rank], axis=1)
    return ProductEmbedding(g, hp.host, L, c, coords)


def embedding_to_partitions(e: ProductEmbedding) -> tuple[HPartition, Layering, int]:
    problems = embedding_violations(e)
    if problems:
        raise InvalidEmbedding("; ".join(problems))
    return (HPartition(e.factor_h, e.coords[:, 0].copy()),
            Layering(e.coords[:, 1].copy(), e.factor_p_length),
            e.clique_size)


def cell_sizes(hp: HPartition, lay: Layering) -> dict[tuple[int, int], int]:
    L = lay.layer_count
    keys, counts = np.unique(hp.owner * L + lay.layer_of, return_counts=True)
    return {(int(k // L), int(k % L)): int(n) for k, n in zip(keys, counts)}


def max_cell(hp: HPartition, lay: Layering) -> tuple[int, int, int]:
    """``(x, y, |B_x ∩ P_y|)`` for a largest cell (smallest key on ties)."""
    L = lay.layer_count
    keys, counts = np.unique(hp.owner * L + lay.layer_of, return_counts=True)
    i = int(np.argmax(counts))
    return int(keys[i] // L), int(keys[i] % L), int(counts[i])


def compose_tree_partition(g: Graph, hp: HPartition, tp: HPartition) -> HPartition:
    """Push an H-partition of ``g`` through a tree-partition ``tp`` of ``H``.

    The part at tree node ``u`` is the union of ``B_x`` over the host
    vertices ``x`` that ``tp`` places at ``u``; empty unions stay as empty
    parts.
    """
    if tp.subject_vertex_count != hp.host.n:
        raise HostMismatch(f"tp partitions {tp.subject_vertex_count} vertices, H has {hp.host.n}")
    if not is_tree(tp.host):
        raise PreconditionFailed("tp's host is not a tree")
    if validate_hpartition(g, hp):
        raise PreconditionFailed("hp is not a valid H-partition of g")
    if validate_hpartition(hp.host, tp):
        raise PreconditionFailed("tp is not a valid tree-partition of H")
    return HPartition(tp.host, tp.owner[hp.owner])


@dataclass(frozen=True)
class SpreadResult:
    layer: int
    count: int
    bound: int
    diameter: float


def spread_bound(size: int, diameter: float) -> int:
    """``ceil(size / (diameter + 1))``; an unbounded diameter still yields 1."""
    if size <= 0:
        return 0
    if math.isinf(diameter):
        return 1
    return -(-size // (int(diameter) + 1))


def diameter_spread(g: Graph, r: Iterable[int], lay: Layering, diameter: float | None = None) -> SpreadResult:
    """A layer ``L`` maximising ``|R ∩ L|`` together with the pigeonhole bound.

    ``diameter`` may be supplied as any upper bound on ``diam_G(R)``; by
    default the exact value is computed.
    """
    members = np.unique(np.fromiter(r, dtype=np.int64))
    if members.size == 0:
        raise EmptySubset("R must be non-empty")
    counts = np.bincount(lay.layer_of[members], minlength=lay.layer_count)
    best = int(np.argmax(counts))
    if diameter is None:
        diameter = diameter_of_subset(g, members)
    return SpreadResult(best, int(counts[best]), spread_bound(int(members.size), diameter), diameter)


def shared_neighbor_bag(g: Graph, tp: HPartition, x: int, v: int, w: int,
                        labels: np.ndarray | None = None, check_partition: bool = True) -> int:
    """Host node ``y`` adjacent to ``x`` whose part holds both ``v`` and ``w``.

    Requires ``v, w`` in ``N_G(B_x)`` and in one component of ``G - B_x``;
    ``labels`` may carry precomputed component labels of ``G - B_x``.
    """
    if check_partition and not is_tree_partition(g, tp):
        raise PreconditionFailed("tp is not a valid tree-partition of g")
    owner = tp.owner
    for u in (v, w):
        if owner[u] == x:
            raise PreconditionFailed(f"vertex {u} lies in B_x itself")
        if not (owner[g.neighbors(u)] == x).any():
            raise PreconditionFailed(f"vertex {u} is not in N(B_x)")
    if v != w:
        if labels is None:
            labels, _ = component_labels(g, tp.members(x))
        if labels[v] != labels[w]:
            raise PreconditionFailed(f"{v} and {w} lie in different components of G - B_x")
    y = int(owner[v])
    if int(owner[w]) != y or not tp.host.has_edge(x, y):
        raise PreconditionFailed("neighbour parts disagree; the tree-partition must be invalid")
    return y


def is_tree_host(p: HPartition) -> bool:
    return is_tree(p.host)
