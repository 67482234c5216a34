"""An outerplanar-host product embedding of G_h, structural checks on the
host, and a suite of tree-partitions of G_h used to drive the pipeline.
"""
from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx
import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import Disconnected, PreconditionFailed
from .graph import Graph, bfs_distances, build_graph, component_labels, is_tree, quotient_graph
from .partitions import HPartition, Layering, depth_layering, validate_hpartition
from .trees import GhGraph, depth_array


@dataclass
class StructureVerdict:
    treewidth_le_2: bool | None
    outerplanar: bool | None = None  # None means undecided
    witness: object = None
    trace: list = field(default_factory=list)


# -- chain partition -------------------------------------------------------------

def build_leftmost_path_partition(gh: GhGraph) -> tuple[HPartition, Layering]:
    """Split ``T_h`` into maximal left-child chains, with the depth layering.

    Every chain ends at a distinct leaf; the part index is that leaf's
    left-to-right rank, so the root chain is part 0.  Each chain meets
    every depth at most once, hence every cell has at most one vertex.
    """
    h = gh.h
    depth = depth_array(h)
    ids = np.arange(gh.n, dtype=np.int64)
    owner = ((ids + 1) << (h - depth)) - (1 << h)
    host = quotient_graph(gh.graph, owner, 1 << h)
    return HPartition(host, owner), depth_layering(gh)


# -- treewidth <= 2 ------------------------------------------------------------

def treewidth_at_most_2(g: Graph) -> StructureVerdict:
    """Series-parallel reduction: delete degree <= 1, bypass degree 2.

    Always acts on the lowest-id eligible vertex, so traces are
    deterministic.  The graph has treewidth at most 2 iff nothing is left;
    otherwise the stalled core (min degree 3) is the witness.
    """
    adj = {v: set(nb) for v, nb in enumerate(g.adjacency())}
    ready = [v for v in adj if len(adj[v]) <= 2]
    heapq.heapify(ready)
    trace = []
    while ready:
        v = heapq.heappop(ready)
        if v not in adj or len(adj[v]) > 2:
            continue
        nbrs = sorted(adj.pop(v))
        for u in nbrs:
            adj[u].discard(v)
        if len(nbrs) == 2:
            a, b = nbrs
            adj[a].add(b)
            adj[b].add(a)
            trace.append(("bypass", v, a, b))
        else:
            trace.append(("delete", v))
        for u in nbrs:
            if len(adj[u]) <= 2:
                heapq.heappush(ready, u)
    if adj:
        return StructureVerdict(False, False, sorted(adj), trace)
    return StructureVerdict(True, None, None, trace)


# -- outerplanarity ---------------------------------------------------------------

def _to_nx(g: Graph) -> nx.Graph:
    out = nx.Graph()
    out.add_nodes_from(range(g.n))
    out.add_edges_from(g.edges())
    return out


def outerplanarity_check_small(g: Graph, budget: int = 1024) -> StructureVerdict:
    """Decide outerplanarity for graphs with at most ``budget`` vertices.

    A graph is outerplanar iff adding one vertex adjacent to everything
    keeps it planar.  On success the witness is the cyclic order of the
    vertices around the added one (the outer face); on failure it is a
    Kuratowski subgraph of the augmented graph, or the stalled core when
    the series-parallel reduction already fails.
    """
    if g.n > budget:
        return StructureVerdict(None, None, f"{g.n} vertices exceed the budget of {budget}")
    tw = treewidth_at_most_2(g)
    if not tw.treewidth_le_2:
        return tw
    aug = _to_nx(g)
    apex = g.n
    aug.add_edges_from((apex, v) for v in range(g.n))
    planar, cert = nx.check_planarity(aug, counterexample=True)
    if planar:
        order = list(cert.neighbors_cw_order(apex)) if g.n else []
        return StructureVerdict(True, True, order, tw.trace)
    return StructureVerdict(True, False, sorted(tuple(sorted(e)) for e in cert.edges()), tw.trace)


def has_minor_bruteforce(g: Graph, pattern: Graph) -> bool:
    """Exhaustive branch-set search; only for graphs with a handful of vertices."""
    k, n = pattern.n, g.n
    if k > n:
        return False
    adj = g.adjacency()
    need = pattern.edges()
    for assign in itertools.product(range(k + 1), repeat=n):
        sets = [[v for v in range(n) if assign[v] == i] for i in range(k)]
        if any(not s for s in sets):
            continue
        if any(not _connected_within(adj, s) for s in sets):
            continue
        if all(any(assign[w] == b for v in sets[a] for w in adj[v]) for a, b in need):
            return True
    return False


def _connected_within(adj: list[list[int]], s: list[int]) -> bool:
    inside = set(s)
    seen = {s[0]}
    stack = [s[0]]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in inside and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(inside)


def outerplanar_by_minors(g: Graph) -> bool:
    from .graph import complete_bipartite, complete_graph

    return not (has_minor_bruteforce(g, complete_graph(4)) or has_minor_bruteforce(g, complete_bipartite(2, 3)))


# -- neighbourhood spread of the chain partition ---------------------------------

@dataclass(frozen=True)
class NeighbourSpread:
    part: int
    component: frozenset
    boundary: frozenset  # N(B) inside the component
    max_per_part: int


def obs6_failure_witness(gh: GhGraph, hp: HPartition, parts: list[int] | None = None) -> NeighbourSpread | None:
    """A part ``B`` and component ``X`` of ``G - B`` with ``|N(B) ∩ X| >= h``
    although every other part meets ``N(B) ∩ X`` at most once."""
    g = gh.graph
    for x in (range(hp.part_count) if parts is None else parts):
        B = hp.members(x)
        if B.size == 0:
            continue
        labels, k = component_labels(g, B)
        inside = np.zeros(g.n, dtype=bool)
        inside[B] = True
        nb = np.unique(g.indices[np.concatenate([np.arange(g.indptr[v], g.indptr[v + 1]) for v in B.tolist()])])
        nb = nb[~inside[nb]]
        for comp in range(k):
            bd = nb[labels[nb] == comp]
            if bd.size < gh.h:
                continue
            per = int(np.bincount(hp.owner[bd]).max())
            if per <= 1:
                members = frozenset(np.flatnonzero(labels == comp).tolist())
                return NeighbourSpread(x, members, frozenset(bd.tolist()), per)
    return None


# -- tree-partition generators ------------------------------------------------------

def one_bag_partition(g: Graph) -> HPartition:
    return HPartition(build_graph(1, []), np.zeros(g.n, dtype=np.int64))


def singleton_partition(g: Graph) -> HPartition:
    """Every vertex its own part over ``g`` itself (a tree-partition only if ``g`` is a tree)."""
    return HPartition(g, np.arange(g.n, dtype=np.int64))


def level_partition(gh: GhGraph) -> HPartition:
    """One part per depth, hosted by a path."""
    return HPartition(build_graph(gh.h + 1, [(i, i + 1) for i in range(gh.h)]), depth_array(gh.h))


def bfs_tree_partition(g: Graph, root: int | Iterable[int] = 0) -> HPartition:
    """Tree-partition from breadth-first layers around ``root`` (a vertex or a set).

    Vertices at distance ``i`` are grouped by their component in the
    subgraph induced by distances ``>= i``.  Each group has exactly one
    neighbouring group one layer up, so the quotient is a tree as long as
    the sources induce a connected subgraph.
    """
    dist = bfs_distances(g, [root] if isinstance(root, (int, np.integer)) else root)
    if (dist < 0).any():
        raise Disconnected("bfs_tree_partition needs a connected graph")
    mat = g.csr()
    key = np.empty(g.n, dtype=np.int64)
    next_id = 0
    for i in range(int(dist.max()) + 1):
        sel = np.flatnonzero(dist >= i)
        _, lab = connected_components(mat[sel][:, sel], directed=False)
        on_layer = dist[sel] == i
        lab_here = lab[on_layer]
        uniq, inv = np.unique(lab_here, return_inverse=True)
        # number groups by smallest member for determinism
        firsts = np.full(uniq.size, g.n, dtype=np.int64)
        np.minimum.at(firsts, inv, sel[on_layer])
        rank = np.empty(uniq.size, dtype=np.int64)
        rank[np.argsort(firsts)] = np.arange(uniq.size)
        key[sel[on_layer]] = next_id + rank[inv]
        next_id += uniq.size
    host = quotient_graph(g, key, next_id)
    if not is_tree(host):
        raise PreconditionFailed("layered grouping did not produce a tree")
    return HPartition(host, key)


def contract_host_edges(tp: HPartition, fraction: float, seed: int) -> HPartition:
    """Merge the endpoints of a random ``fraction`` of host edges.

    Contracting edges of a tree gives a tree, so the result is again a
    tree-partition of the same graph.
    """
    rng = random.Random(seed)
    edges = tp.host.edges()
    chosen = rng.sample(edges, int(round(fraction * len(edges))))
    parent = list(range(tp.host.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in chosen:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(a) for a in range(tp.host.n)], dtype=np.int64)
    uniq, relabel = np.unique(roots, return_inverse=True)
    host = quotient_graph(tp.host, relabel, uniq.size)
    return HPartition(host, relabel[tp.owner])


def composed_partition(gh: GhGraph, inner: HPartition | None = None) -> HPartition:
    """Chain partition pushed through a tree-partition of its host.

    ``inner`` is a tree-partition of the chain host; the default groups
    the host by breadth-first layers from the root chain.
    """
    from .partitions import compose_tree_partition

    hp, _ = build_leftmost_path_partition(gh)
    inner = bfs_tree_partition(hp.host, 0) if inner is None else inner
    return compose_tree_partition(gh.graph, hp, inner)


def partition_suite(gh: GhGraph, seed: int = 0) -> dict[str, HPartition]:
    """Named tree-partitions (and one non-tree H-partition) of ``G_h``."""
    composed = composed_partition(gh)
    suite = {
        "one-bag": one_bag_partition(gh.graph),
        "singletons-over-gh": singleton_partition(gh.graph),
        "levels": level_partition(gh),
        "composed-chain": composed,
        "composed-chain-coarsened": contract_host_edges(composed, 0.25, seed),
        # seeded with a vertical root-to-leaf separator, so T_Y is nearly a path
        "bfs-vertical": bfs_tree_partition(gh.graph, [0, *gh.tree.leftmost_path(2)]),
    }
    for name, p in suite.items():
        if validate_hpartition(gh.graph, p):
            raise PreconditionFailed(f"generator {name} produced an invalid partition")
    return suite
