"""Brute-force ground truth for tiny instances."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, PreconditionFailed
from .graph import Graph, build_graph
from .partitions import HPartition, Layering, ProductEmbedding, partitions_to_embedding
from .percolation import CompactFamily, ceil_log2, find_escape, find_two_escapes, grow_compact, validate_compact
from .trees import CompleteBinaryTree, GhGraph, build_subdivided_grid

# -- minimum clique factor ---------------------------------------------------------


@dataclass
class MinProductResult:
    c: int
    tree_partition: HPartition
    layering: Layering
    embedding: ProductEmbedding


def _bfs_vertex_order(g: Graph) -> list[int]:
    adj = g.adjacency()
    seen, order = set(), []
    for s in range(g.n):
        if s in seen:
            continue
        seen.add(s)
        queue = [s]
        for v in queue:
            order.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


class _Forest:
    """Edges of the part quotient; acyclicity is rechecked from scratch."""

    def __init__(self):
        self.edges: set[tuple[int, int]] = set()

    def acyclic_with(self, new: set[tuple[int, int]]) -> bool:
        parent: dict[int, int] = {}

        def find(a):
            while parent.get(a, a) != a:
                a = parent[a]
            return a

        for a, b in self.edges | new:
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True


def _feasible(g: Graph, c: int, max_parts: int, positions: int):
    order = _bfs_vertex_order(g)
    adj = g.adjacency()
    n = g.n
    part = [-1] * n
    layer = [0] * n
    cells: dict[tuple[int, int], int] = {}
    forest = _Forest()

    def rec(i: int, used: int, lo: int, hi: int):
        if i == n:
            return list(part), [y - lo for y in layer]
        v = order[i]
        earlier = [w for w in adj[v] if part[w] >= 0]
        if earlier:
            cand = set(range(layer[earlier[0]] - 1, layer[earlier[0]] + 2))
            for w in earlier[1:]:
                cand &= {layer[w] - 1, layer[w], layer[w] + 1}
        else:
            cand = set(range(hi - positions + 1, lo + positions)) if i else {0}
        for y in sorted(cand):
            nlo, nhi = min(lo, y), max(hi, y)
            if nhi - nlo + 1 > positions:
                continue
            for x in range(min(used + 1, max_parts)):
                if cells.get((x, y), 0) >= c:
                    continue
                new = {(min(x, part[w]), max(x, part[w])) for w in earlier if part[w] != x}
                new -= forest.edges
                if new and not forest.acyclic_with(new):
                    continue
                part[v], layer[v] = x, y
                cells[(x, y)] = cells.get((x, y), 0) + 1
                forest.edges |= new
                out = rec(i + 1, max(used, x + 1), nlo, nhi)
                if out is not None:
                    return out
                forest.edges -= new
                cells[(x, y)] -= 1
                part[v] = -1
        return None

    return rec(0, 0, 0, 0), forest.edges


def min_product_c(g: Graph, max_tree_vertices: int | None = None, max_path_length: int | None = None,
                  max_vertices: int = 8) -> MinProductResult:
    """Least ``c`` with ``g ⊑ T ⊠ P ⊠ K_c`` for a tree ``T`` on at most
    ``max_tree_vertices`` vertices and a path ``P`` with at most
    ``max_path_length`` edges.

    Searches (tree-partition, layering) pairs directly: vertices are
    assigned a part and a layer one at a time, rejecting any cell above
    ``c`` and any cycle among the parts.  A forest of parts is joined
    into a tree at the end.
    """
    if g.n > max_vertices:
        raise BudgetExceeded(f"{g.n} vertices exceed the oracle guard of {max_vertices}")
    if g.n == 0:
        raise PreconditionFailed("the empty graph has no embedding to minimise")
    max_parts = g.n if max_tree_vertices is None else max_tree_vertices
    positions = g.n if max_path_length is None else max_path_length + 1
    if max_parts < 1 or positions < 1:
        raise PreconditionFailed("T and P need at least one vertex")
    for c in range(1, g.n + 1):
        found, edges = _feasible(g, c, max_parts, positions)
        if found is None:
            continue
        part, layer = found
        k = max(part) + 1
        # join forest components into one tree
        comp = list(range(k))

        def find(a):
            while comp[a] != a:
                a = comp[a]
            return a

        tree_edges = sorted(edges)
        for a, b in tree_edges:
            comp[find(a)] = find(b)
        for a in range(1, k):
            if find(a) != find(0):
                tree_edges.append((0, a))
                comp[find(a)] = find(0)
        host = build_graph(k, tree_edges)
        tp = HPartition(host, np.array(part, dtype=np.int64))
        lay = Layering(np.array(layer, dtype=np.int64), max(layer) + 1)
        return MinProductResult(c, tp, lay, partitions_to_embedding(g, tp, lay, c))
    raise PreconditionFailed(f"no embedding with at most {max_parts} tree vertices and {positions} path positions")


# -- balanced separators -------------------------------------------------------------


@dataclass
class SeparatorSearch:
    separators: list[frozenset]
    complete: bool  # False when the budget stopped the search early
    examined: int


def _masks(g: Graph) -> list[int]:
    out = [0] * g.n
    for u, v in g.edges():
        out[u] |= 1 << v
        out[v] |= 1 << u
    return out


def _largest_component(nbr: list[int], alive: int) -> int:
    best = 0
    rest = alive
    while rest:
        low = rest & -rest
        comp = frontier = low
        while frontier:
            grow = 0
            f = frontier
            while f:
                b = f & -f
                grow |= nbr[b.bit_length() - 1]
                f ^= b
            frontier = grow & alive & ~comp
            comp |= frontier
        best = max(best, comp.bit_count())
        rest &= ~comp
    return best


def is_balanced_separator(g: Graph, s) -> bool:
    nbr = _masks(g)
    alive = (1 << g.n) - 1
    for v in s:
        alive &= ~(1 << v)
    return 2 * _largest_component(nbr, alive) <= g.n


def minimal_balanced_separators(gh: GhGraph, max_size: int, budget: int = 2_000_000,
                                strict: bool = False) -> SeparatorSearch:
    """All inclusion-minimal balanced separators with at most ``max_size`` vertices.

    Subsets are examined by increasing size; a balanced set is minimal iff
    it contains no smaller minimal one.  When ``budget`` subsets have been
    examined the search stops; ``strict`` turns that into an error.
    """
    if gh.h > 5:
        raise BudgetExceeded("separator enumeration is limited to h <= 5")
    g = gh.graph
    nbr = _masks(g)
    full = (1 << g.n) - 1
    found: list[int] = []
    examined = 0
    for k in range(0, min(max_size, g.n) + 1):
        for combo in itertools.combinations(range(g.n), k):
            examined += 1
            if examined > budget:
                if strict:
                    raise BudgetExceeded(f"more than {budget} subsets")
                return SeparatorSearch([_bits(m) for m in found], False, examined - 1)
            mask = 0
            for v in combo:
                mask |= 1 << v
            if any(f & mask == f for f in found):
                continue
            if 2 * _largest_component(nbr, full & ~mask) <= g.n:
                found.append(mask)
    return SeparatorSearch([_bits(m) for m in found], True, examined)


def _bits(mask: int) -> frozenset:
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask ^= b
    return frozenset(out)


# -- exact treewidth -------------------------------------------------------------------


def exact_treewidth_tiny(g: Graph, max_vertices: int = 8) -> int:
    """Treewidth by dynamic programming over elimination prefixes.

    ``TW(S)`` is the best width when ``S`` is eliminated first; eliminating
    ``v`` after ``S`` costs the number of vertices outside ``S ∪ {v}``
    reachable from ``v`` through ``S``.
    """
    n = g.n
    if n > max_vertices:
        raise BudgetExceeded(f"{n} vertices exceed the oracle guard of {max_vertices}")
    if n == 0:
        return -1
    nbr = _masks(g)

    def q(s: int, v: int) -> int:
        seen = 1 << v
        stack = [v]
        out = 0
        while stack:
            u = stack.pop()
            m = nbr[u] & ~seen
            while m:
                b = m & -m
                m ^= b
                seen |= b
                w = b.bit_length() - 1
                if s >> w & 1:
                    stack.append(w)
                else:
                    out |= b
        return out.bit_count()

    @lru_cache(maxsize=None)
    def tw(s: int) -> int:
        if s == 0:
            return -1
        best = n
        m = s
        while m:
            b = m & -m
            m ^= b
            v = b.bit_length() - 1
            rest = s & ~b
            best = min(best, max(tw(rest), q(rest, v)))
        return best

    return tw((1 << n) - 1)


# -- sweeps -------------------------------------------------------------------------------


ROW_HEADERS = {
    5: ("size", "depth", "bound"),
    6: ("size", "depth", "bound"),
    11: ("size", "q_before", "q_after", "ell_after", "ell_bound"),
}


@dataclass
class SweepReport:
    lemma: int
    instances: int = 0
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)  # one CSV row per instance, see ROW_HEADERS

    @property
    def ok(self) -> bool:
        return not self.failures


def _free_leaf_path(h: int, v: int, blocked: set[int]) -> bool:
    stack = [v]
    while stack:
        u = stack.pop()
        if u in blocked:
            continue
        if (u + 1).bit_length() - 1 == h:
            return True
        stack.extend((2 * u + 1, 2 * u + 2))
    return False


def _escape_ok(h: int, v: int, s: set[int], depth_factor: int) -> str | None:
    depth = (v + 1).bit_length() - 1
    if v == 0:
        return "escape is the root"
    if (v - 1) // 2 not in s and (v - 1) // 2 != 0:
        return "parent outside S and not the root"
    if (1 << depth) > depth_factor * len(s):
        return f"depth {depth} exceeds the bound"
    if not _free_leaf_path(h, v, s):
        return "no leaf path avoiding S"
    return None


def _subsets(n: int, max_size: int):
    for k in range(1, max_size + 1):
        yield from itertools.combinations(range(n), k)


def _sweep_single_escape(h: int, exhaustive: bool, samples: int, seed: int) -> SweepReport:
    rep = SweepReport(5)
    t = CompleteBinaryTree(h)
    n = t.vertex_count
    limit = (1 << h) - 1
    rng = random.Random(seed)
    gen = _subsets(n, limit) if exhaustive else (
        tuple(rng.sample(range(n), rng.randint(1, limit))) for _ in range(samples))
    worst = Fraction(0)
    for s in gen:
        rep.instances += 1
        S = set(s)
        e = find_escape(t, S)
        bad = _escape_ok(h, e.vertex, S, 2)
        if bad:
            rep.failures.append((sorted(S), e.vertex, bad))
        worst = max(worst, Fraction(1 << e.depth, 2 * len(S)))
        rep.rows.append((len(S), e.depth, (2 * len(S)).bit_length() - 1))
    rep.stats["max 2^depth / (2|S|)"] = str(worst)
    return rep


def _sweep_two_escapes(h: int, exhaustive: bool, samples: int, seed: int) -> SweepReport:
    rep = SweepReport(6)
    t = CompleteBinaryTree(h)
    n = t.vertex_count
    limit = (1 << (h - 1)) - 1
    rng = random.Random(seed)
    if limit < 1:
        return rep
    gen = _subsets(n, limit) if exhaustive else (
        tuple(rng.sample(range(n), rng.randint(1, limit))) for _ in range(samples))
    worst = Fraction(0)
    for s in gen:
        rep.instances += 1
        S = set(s)
        e1, e2 = find_two_escapes(t, S)
        for e in (e1, e2):
            bad = _escape_ok(h, e.vertex, S, 4)
            if bad:
                rep.failures.append((sorted(S), e.vertex, bad))
            worst = max(worst, Fraction(1 << e.depth, 4 * len(S)))
            rep.rows.append((len(S), e.depth, (4 * len(S)).bit_length() - 1))
        a, b = e1.vertex, e2.vertex
        if t.is_ancestor(a, b) or t.is_ancestor(b, a):
            rep.failures.append((sorted(S), (a, b), "escapes are related"))
    rep.stats["max 2^depth / (4|S|)"] = str(worst)
    return rep


def _plain_components(n: int, edges: list[tuple[int, int]], removed: set[int]) -> list[int]:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    label = [-1] * n
    k = 0
    for s in range(n):
        if s in removed or label[s] >= 0:
            continue
        label[s] = k
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in removed and label[w] < 0:
                    label[w] = k
                    stack.append(w)
        k += 1
    return label


def _sweep_grid(samples: int, seed: int, max_x: int = 5, max_y: int = 5) -> SweepReport:
    from .witness import grid_connectivity

    rep = SweepReport(7)
    rng = random.Random(seed)
    shortest_margin = None
    while rep.instances < samples:
        x, y = rng.randint(1, max_x), rng.randint(1, max_y)
        sg = build_subdivided_grid(x, y, lambda i, j: rng.randint(0, 2))
        subdiv = list(range(sg.grid_vertex_count, sg.graph.n))
        p = rng.randint(1, x + 1)
        s = rng.sample(subdiv, rng.randint(0, min(len(subdiv), p * y - 1)))
        rep.instances += 1
        run = grid_connectivity(sg, s, p)
        need = -(-x // p)
        if run.length < need:
            rep.failures.append((x, y, p, sorted(s), "run too short"))
        labels = _plain_components(sg.graph.n, sg.graph.edges(), set(s))
        cols = {labels[sg.grid_id(i, j)] for i in range(run.first, run.last + 1) for j in range(1, y + 1)}
        comp = {v for v in range(sg.graph.n) if labels[v] == labels[sg.grid_id(run.first, 1)]}
        if len(cols) != 1 or comp != set(run.component):
            rep.failures.append((x, y, p, sorted(s), "component mismatch"))
        margin = run.length - need
        shortest_margin = margin if shortest_margin is None else min(shortest_margin, margin)
    rep.stats["min (run - ceil(x/p))"] = shortest_margin
    return rep


def _sweep_separators(heights, max_size: int, budget: int) -> SweepReport:
    from .witness import check_separator_depths, separator_i0
    from .trees import build_gh

    rep = SweepReport(9)
    for h in heights:
        gh = build_gh(h)
        search = minimal_balanced_separators(gh, max_size, budget)
        rep.stats[f"h={h}"] = {"separators": len(search.separators), "complete": search.complete,
                               "examined": search.examined,
                               "min size": min((len(s) for s in search.separators), default=None)}
        for s in search.separators:
            rep.instances += 1
            if not is_balanced_separator(gh.graph, s):
                rep.failures.append((h, sorted(s), "not balanced"))
                continue
            report = check_separator_depths(gh, s)
            if not report.passed:
                rep.failures.append((h, sorted(s), "misses a depth"))
            if len(s) < max(0, h - separator_i0(len(s), h) + 1):
                rep.failures.append((h, sorted(s), "size below h - i0 + 1"))
    return rep


def random_compact_family(rng: random.Random, h: int) -> tuple[CompactFamily, set[int]]:
    """A random compact family on ``T_h`` with a set ``s`` meeting the growth precondition."""
    t = CompleteBinaryTree(h)
    while True:
        m = rng.randint(3, h)
        ell = rng.randint(0, max(0, m - 4))
        room = (1 << (m - ell - 2)) - 1  # |s| must stay below 2^(m-ell-2)
        if room < 1:
            continue
        d_anchor = rng.randint(0, h - m)
        level = list(t.level(d_anchor))
        anchors = sorted(rng.sample(level, rng.randint(1, min(len(level), room))))
        k = rng.choice([1, 2])
        parts = []
        for a in anchors:
            rel = rng.randint(0, ell)
            below = list(range(((a + 1) << rel) - 1, ((a + 1) << rel) - 1 + (1 << rel)))
            if len(below) < k:
                break
            parts.append(tuple(sorted(rng.sample(below, rng.randint(k, min(len(below), k + 1))))))
        else:
            union = {v for p in parts for v in p}
            if len(union) > room:
                continue
            fam = CompactFamily(t, tuple(parts), tuple(anchors), k, ell, m)
            extra = rng.sample(range(t.vertex_count), rng.randint(0, room - len(union)))
            s = union | set(extra)
            if len(s) > room:
                continue
            if validate_compact(fam).ok:
                return fam, s


def _sweep_growth(samples: int, seed: int, heights=range(6, 11)) -> SweepReport:
    rep = SweepReport(11)
    rng = random.Random(seed)
    heights = list(heights)
    for _ in range(samples):
        h = rng.choice(heights)
        fam, s = random_compact_family(rng, h)
        rep.instances += 1
        out = grow_compact(fam, s)
        rep.rows.append((len(s), fam.q, out.q, out.ell, fam.ell + ceil_log2(len(s)) + 2))
        if out.k != 2 * fam.k or out.m != fam.m or out.ell != fam.ell + ceil_log2(len(s)) + 2:
            rep.failures.append((h, "parameters"))
        if not validate_compact(out).ok:
            rep.failures.append((h, validate_compact(out).violations[0]))
        if out.anchors != fam.anchors:
            rep.failures.append((h, "anchors changed"))
        for v in out.union():
            if v == 0 or (v - 1) // 2 not in s or not _free_leaf_path(h, v, s):
                rep.failures.append((h, v, "not compatible"))
    return rep


def exhaustive_lemma_sweep(lemma: int, height: int = 3, exhaustive: bool = True, samples: int = 10_000,
                           seed: int = 42, heights=None, max_size: int = 6, budget: int = 2_000_000) -> SweepReport:
    """Run one operation over every (or ``samples`` random) admissible input.

    ``lemma`` picks the operation: 5 single escapes, 6 paired escapes,
    7 grid connectivity, 9 separator depths, 11 compact-family growth.
    """
    if lemma == 5:
        if exhaustive and height > 4:
            raise BudgetExceeded("exhaustive sweeps are limited to h <= 4")
        return _sweep_single_escape(height, exhaustive, samples, seed)
    if lemma == 6:
        if exhaustive and height > 4:
            raise BudgetExceeded("exhaustive sweeps are limited to h <= 4")
        return _sweep_two_escapes(height, exhaustive, samples, seed)
    if lemma == 7:
        return _sweep_grid(samples, seed)
    if lemma == 9:
        return _sweep_separators(heights or range(2, 6), max_size, budget)
    if lemma == 11:
        return _sweep_growth(samples, seed, heights or range(6, 11))
    raise PreconditionFailed(f"no sweep for lemma {lemma}; choose 5, 6, 7, 9 or 11")
