"""Lower-bound pipeline on G_h: balanced bags, separator depths, grid
connectivity, the startup family, and certificate extraction.

Every inequality the argument relies on is evaluated with exact integers
or ``Fraction`` values before it is used.  When one fails the pipeline
returns an ``Infeasible`` value naming it instead of guessing.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Literal

import numpy as np
from scipy.sparse.csgraph import depth_first_order

from .errors import (
    EmptySubset,
    NotBalancedSeparator,
    PreconditionFailed,
    PSWError,
    SNotSubdivisionOnly,
    TooManyRemoved,
    WidthTooLarge,
)
from .graph import Graph, component_labels, is_tree
from .partitions import HPartition, Layering, partition_width, shared_neighbor_bag, spread_bound
from .percolation import CompactFamily, ceil_log2, find_escape, grow_compact, validate_compact
from .trees import GhGraph, SubdividedGrid, build_subdivided_grid, left_to_right_order

CERT_FORMAT = "psw-certificate/1"


class InternalError(PSWError):
    """A proven step failed; this indicates a bug, never bad input."""


# -- exact arithmetic helpers ------------------------------------------------

def ceil_sqrt_log2(h: int) -> int:
    """Smallest integer ``s >= 0`` with ``s*s >= log2(h)``, i.e. ``2**(s*s) >= h``."""
    s = 0
    while (1 << (s * s)) < h:
        s += 1
    return s


def default_c(h: int) -> int:
    """``2**ceil(sqrt(log2 h))``: an integer upper bound on ``2**sqrt(log2 h)``."""
    return 1 << ceil_sqrt_log2(h)


def fceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def ffloor(x: Fraction) -> int:
    return x.numerator // x.denominator


def compute_t1(q1: int, c: int) -> int:
    """``floor(log_{10c}(q1/3))`` exactly: the largest ``t`` with ``3(10c)^t <= q1``."""
    if q1 <= 0:
        raise PreconditionFailed("q1 must be positive")
    base = 10 * c
    t = 0
    if 3 <= q1:
        while 3 * base ** (t + 1) <= q1:
            t += 1
        return t
    while Fraction(3) * Fraction(base) ** t > q1:
        t -= 1
    return t


def compute_t2(h: int) -> int:
    """``floor(h / (10(sqrt(log2 h) + log2 h) + 2))`` with both logarithms rounded up."""
    return h // (10 * (ceil_sqrt_log2(h) + ceil_log2(h)) + 2)


_OPS = {
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
}


@dataclass(frozen=True)
class Inequality:
    name: str
    lhs: Fraction
    op: str
    rhs: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lhs", Fraction(self.lhs))
        object.__setattr__(self, "rhs", Fraction(self.rhs))
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    @property
    def holds(self) -> bool:
        return _OPS[self.op](self.lhs, self.rhs)

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": str(self.lhs), "op": self.op,
                "rhs": str(self.rhs), "holds": self.holds}

    @classmethod
    def from_json(cls, d: dict) -> "Inequality":
        return cls(d["name"], Fraction(d["lhs"]), d["op"], Fraction(d["rhs"]))


@dataclass(frozen=True)
class Infeasible:
    stage: str
    inequality: Inequality
    detail: str = ""

    def to_json(self) -> dict:
        return {"stage": self.stage, "inequality": self.inequality.to_json(), "detail": self.detail}


def tree_defect(host: Graph) -> Inequality:
    """``components + cycle rank == 1`` holds exactly for trees."""
    _, comps = component_labels(host)
    rank = host.edge_count - host.n + comps
    return Inequality("host is a tree: components(T) + cycle_rank(T) == 1", comps + rank, "==", 1)


# -- depths met by a balanced separator --------------------------------------------

def separator_i0(s_size: int, h: int) -> int:
    """``ceil(max(2 log2|S| + 2, log2(1 + (h+2)|S|) - 1))`` in integers."""
    if s_size < 1:
        raise EmptySubset("S must be non-empty")
    first = 2 + ceil_log2(s_size * s_size)
    second = ceil_log2(1 + (h + 2) * s_size) - 1
    return max(first, second)


@dataclass(frozen=True)
class SeparatorDepthReport:
    s_size: int
    i0: int
    hits: dict  # depth i -> S meets D_i

    @property
    def passed(self) -> bool:
        return all(self.hits.values())


def is_balanced(g: Graph, s: Iterable[int], labels: np.ndarray | None = None) -> bool:
    if labels is None:
        labels, _ = component_labels(g, s)
    alive = labels[labels >= 0]
    if alive.size == 0:
        return True
    return 2 * int(np.bincount(alive).max()) <= g.n


def check_separator_depths(gh: GhGraph, s: Iterable[int], check_balance: bool = True) -> SeparatorDepthReport:
    members = sorted(set(int(v) for v in s))
    if not members:
        raise EmptySubset("S must be non-empty")
    if check_balance and not is_balanced(gh.graph, members):
        raise NotBalancedSeparator("G_h - S has a component with more than |V|/2 vertices")
    i0 = separator_i0(len(members), gh.h)
    depths = {gh.tree.depth(v) for v in members}
    return SeparatorDepthReport(len(members), i0, {i: i in depths for i in range(i0, gh.h + 1)})


# -- balanced bag ----------------------------------------------------------------

class _RootedHost:
    """DFS intervals of a host tree, for 'which neighbour leads to z' queries."""

    def __init__(self, host: Graph):
        order, pred = depth_first_order(host.csr(), 0, directed=False, return_predecessors=True)
        self.parent = pred
        self.tin = np.empty(host.n, dtype=np.int64)
        self.tin[order] = np.arange(order.shape[0])
        size = np.ones(host.n, dtype=np.int64)
        for v in order[::-1].tolist():
            p = pred[v]
            if p >= 0:
                size[p] += size[v]
        self.size = size
        self.children: dict[int, list[int]] = {}
        for v in order.tolist():
            p = int(pred[v])
            if p >= 0:
                self.children.setdefault(p, []).append(v)

    def step_towards(self, x: int, z: int) -> int:
        if self.tin[x] < self.tin[z] < self.tin[x] + self.size[x]:
            for ch in self.children.get(x, ()):
                if self.tin[ch] <= self.tin[z] < self.tin[ch] + self.size[ch]:
                    return ch
        return int(self.parent[x])


def _balanced_bag(g: Graph, tp: HPartition, start: int = 0) -> tuple[int, np.ndarray, int]:
    if not is_tree(tp.host):
        raise PreconditionFailed("tree-partition host is not a tree")
    rooted = _RootedHost(tp.host)
    x = start
    for steps in range(tp.host.n + 1):
        labels, k = component_labels(g, tp.members(x))
        alive = labels[labels >= 0]
        if alive.size == 0:
            return x, labels, steps
        sizes = np.bincount(alive, minlength=k)
        big = int(np.argmax(sizes))
        if 2 * int(sizes[big]) <= g.n:
            return x, labels, steps
        u = int(np.argmax(labels == big))
        x = rooted.step_towards(x, int(tp.owner[u]))
    raise InternalError("centroid walk did not terminate")


def find_balanced_bag(g: Graph, tp: HPartition) -> int:
    """Host node ``x`` with every component of ``G - B_x`` of size ``<= |V|/2``.

    Walks from host node 0 towards the unique oversized component.
    """
    return _balanced_bag(g, tp)[0]


# -- grid connectivity ---------------------------------------------------------

@dataclass(frozen=True)
class GridRun:
    component: frozenset
    first: int  # 1-based column indices, inclusive
    last: int

    @property
    def length(self) -> int:
        return self.last - self.first + 1


def column_runs(sg: SubdividedGrid, s: Iterable[int]) -> list[tuple[int, int, int]]:
    """Maximal runs ``(first, last, label)`` of consecutive columns sharing a component."""
    labels, _ = component_labels(sg.graph, list(s))
    col = [int(labels[sg.grid_id(i, 1)]) for i in range(1, sg.x + 1)]
    runs = []
    start = 1
    for i in range(2, sg.x + 2):
        if i == sg.x + 1 or col[i - 1] != col[start - 1]:
            runs.append((start, i - 1, col[start - 1]))
            start = i
    return runs


def _check_grid_removal(sg: SubdividedGrid, s: list[int], p: Fraction) -> None:
    if any(not sg.is_subdivision(v) for v in s):
        raise SNotSubdivisionOnly("S contains a grid vertex")
    if len(s) >= p * sg.y:
        raise TooManyRemoved(f"|S| = {len(s)} is not < p*y = {p * sg.y}")


def grid_connectivity(sg: SubdividedGrid, s: Iterable[int], p: Fraction | int) -> GridRun:
    """Longest run of consecutive columns inside one component of ``G - S``.

    ``p`` is a positive integer and ``S`` must consist of subdivision
    vertices with ``|S| < p*y``; the run
    then has at least ``ceil(x/p)`` columns.
    """
    p = Fraction(p)
    members = sorted(set(s))
    if p < 1 or p.denominator != 1:
        # with fractional p a single cut can already beat ceil(x/p)
        raise PreconditionFailed("p must be a positive integer")
    _check_grid_removal(sg, members, p)
    labels, _ = component_labels(sg.graph, members)
    runs = column_runs(sg, members)
    first, last, lab = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
    if last - first + 1 < fceil(Fraction(sg.x) / p):
        raise InternalError("column run shorter than ceil(x/p)")
    comp = frozenset(np.flatnonzero(labels == lab).tolist())
    return GridRun(comp, first, last)


def escape_grid(gh: GhGraph, columns: list[tuple[int, ...]], top_depth: int) -> tuple[SubdividedGrid, np.ndarray]:
    """Subdivided grid spanned by downward paths and level paths.

    ``columns`` are vertex-to-leaf paths of unrelated start vertices in
    left-to-right order; rows are the level paths at depths
    ``top_depth..h`` restricted to the spanned interval.  Returns the grid
    and ``to_gh[grid id] = G_h id``.
    """
    t = gh.tree
    h = gh.h
    y = h - top_depth + 1
    x = len(columns)
    at = [[path[d - t.depth(path[0])] for d in range(top_depth, h + 1)] for path in columns]
    divisions = {}
    for i in range(1, x):
        for j in range(1, y + 1):
            gap = at[i][j - 1] - at[i - 1][j - 1] - 1
            if gap < 0:
                raise InternalError("columns are not in left-to-right order")
            divisions[(i, j)] = gap
    sg = build_subdivided_grid(x, y, divisions, budget=max(gh.n, 1))
    to_gh = np.empty(sg.graph.n, dtype=np.int64)
    for i in range(1, x + 1):
        for j in range(1, y + 1):
            to_gh[sg.grid_id(i, j)] = at[i - 1][j - 1]
    for (i, j), chain in sg.subdivision_vertices.items():
        left = at[i - 1][j - 1]
        for off, v in enumerate(chain, start=1):
            to_gh[v] = left + off
    return sg, to_gh


# -- startup family ------------------------------------------------------------

@dataclass
class StartupResult:
    x: int  # balanced bag
    x_prime: int  # bag holding R
    R: list[int]
    branch: str
    record: dict = field(default_factory=dict)
    inequalities: list[Inequality] = field(default_factory=list)


def _startup(gh: GhGraph, tp: HPartition, alpha: Fraction, c: int) -> StartupResult | Infeasible:
    g, t, h = gh.graph, gh.tree, gh.h
    ineqs: list[Inequality] = []
    rec: dict = {}
    x, labels, steps = _balanced_bag(g, tp)
    B = tp.members(x).tolist()
    Bset = set(B)
    rec.update(balanced_bag=x, bag_size=len(B), centroid_steps=steps)
    if not B:
        raise InternalError("a balanced bag of the connected graph G_h cannot be empty")
    report = check_separator_depths(gh, B, check_balance=False)
    if not report.passed:
        raise InternalError(f"separator misses a depth in {report.i0}..{h}")
    Y = [v for v in B if 4 * t.vertex_height(v) >= h]
    y_bound = max(0, (3 * h) // 4 - report.i0 + 1)
    rec.update(i0=report.i0, Y=len(Y), Y_bound=y_bound)
    ineqs.append(Inequality("|Y| >= floor(3h/4) - i0 + 1", len(Y), ">=", y_bound))

    # minimal subtree spanning Y and its childless vertices L
    span: set[int] = set()
    if Y:
        top = Y[0]
        for v in Y[1:]:
            top = t.lca(top, v)
        for v in Y:
            while v not in span:
                span.add(v)
                if v == top:
                    break
                v = t.parent(v)
    has_child = {t.parent(v) for v in span if v != 0 and t.parent(v) in span}
    L = [v for v in span if v not in has_child]
    if not set(L) <= Bset:
        raise InternalError("a leaf of the spanning subtree is outside Y")
    rec["L"] = len(L)
    threshold = alpha * alpha * h / c
    target = Inequality("|R| >= alpha^2 h / c", 0, ">=", threshold)

    def finish(R: list[int], x_prime: int, branch: str) -> StartupResult:
        final = Inequality(target.name, len(R), ">=", threshold)
        heights = Inequality("min height(R) >= alpha h", min(t.vertex_height(v) for v in R), ">=", alpha * h)
        return StartupResult(x, x_prime, left_to_right_order(t, R), branch, rec, [*ineqs, final, heights])

    if len(L) >= alpha * h:
        ineqs.append(Inequality("|L| >= alpha h", len(L), ">=", alpha * h))
        return finish(L, x, "L")

    Y_inner = [v for v in Y if v in has_child]
    Z = [ch for v in Y_inner for ch in t.children(v) if ch not in span]
    rec["Z"] = len(Z)
    ineqs.append(Inequality("|Z| >= |Y| - 2|L|", len(Z), ">=", len(Y) - 2 * len(L)))

    escapes: list[tuple[int, tuple[int, ...]]] = []
    skipped = 0
    for r in Z:
        S_r = [b for b in B if t.is_ancestor(r, b)]
        if not S_r:
            escapes.append((r, tuple(t.leftmost_path(r))))
            continue
        if len(S_r) >= 1 << t.vertex_height(r):
            skipped += 1
            continue
        e = find_escape(t, S_r, root=r)
        if t.parent(e.vertex) in Bset:
            escapes.append((e.vertex, e.path))
        else:
            escapes.append((r, (r, *e.path)))
    tall = [(v, path) for v, path in escapes if t.vertex_height(v) >= alpha * h]
    rec.update(escape_skipped=skipped, Z_prime=len(escapes), Z_prime_tall=len(tall))

    def fallback(why: Inequality) -> StartupResult | Infeasible:
        if L and len(L) >= threshold:
            ineqs.append(why)
            return finish(L, x, "L-fallback")
        return Infeasible("startup", why, "escape-grid route fell short and |L| is too small")

    if not tall:
        return fallback(Inequality(target.name, 0, ">=", threshold))
    order = {v: i for i, v in enumerate(left_to_right_order(t, [v for v, _ in tall]))}
    tall.sort(key=lambda vp: order[vp[0]])
    rows = math.ceil(alpha * h)
    sg, to_gh = escape_grid(gh, [path for _, path in tall], h - rows + 1)
    in_b = np.zeros(g.n, dtype=bool)
    in_b[B] = True
    S_grid = [v for v in range(sg.grid_vertex_count, sg.graph.n) if in_b[to_gh[v]]]
    p = len(S_grid) // sg.y + 1
    run = grid_connectivity(sg, S_grid, p)
    rec.update(grid_x=sg.x, grid_y=sg.y, S_grid=len(S_grid), p=p, run=[run.first, run.last])
    ineqs.append(Inequality("|S_grid| < p y", len(S_grid), "<", p * sg.y))
    ineqs.append(Inequality("run >= ceil(x/p)", run.length, ">=", fceil(Fraction(sg.x, p))))
    R = [tall[i - 1][0] for i in range(run.first, run.last + 1)]
    if len(R) < threshold:
        return fallback(Inequality(target.name, len(R), ">=", threshold))
    y = shared_neighbor_bag(g, tp, x, R[0], R[0], labels=labels, check_partition=False)
    for w in R[1:]:
        if shared_neighbor_bag(g, tp, x, R[0], w, labels=labels, check_partition=False) != y:
            raise InternalError("escape vertices landed in different bags")
    return finish(R, y, "Z")


def startup(gh: GhGraph, tp: HPartition, alpha: Fraction | str | float = Fraction(1, 5),
            c: int | None = None) -> StartupResult | Infeasible:
    """Find a bag holding a large unrelated set of tall vertices.

    Requires ``0 < alpha < 1/4`` and ``width(tp) < c*h``.  Returns an
    ``Infeasible`` naming the first explicit inequality that fails.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < Fraction(1, 4):
        raise PreconditionFailed("alpha must lie in the open interval (0, 1/4)")
    c = default_c(gh.h) if c is None else c
    defect = tree_defect(tp.host)
    if not defect.holds:
        return Infeasible("input", defect, "shared neighbour bags need a tree host")
    if partition_width(tp) >= c * gh.h:
        raise WidthTooLarge(f"width {partition_width(tp)} is not < c*h = {c * gh.h}")
    return _startup(gh, tp, alpha, c)


# -- certificates ----------------------------------------------------------------

def partition_digest(p: HPartition) -> str:
    hsh = hashlib.sha256()
    hsh.update(np.int64(p.host.n).tobytes())
    hsh.update(p.host.edge_array().astype("<i8").tobytes())
    hsh.update(p.owner.astype("<i8").tobytes())
    return hsh.hexdigest()


def layering_digest(lay: Layering) -> str:
    hsh = hashlib.sha256()
    hsh.update(np.int64(lay.layer_count).tobytes())
    hsh.update(lay.layer_of.astype("<i8").tobytes())
    return hsh.hexdigest()


@dataclass
class WitnessConfig:
    alpha: Fraction = Fraction(1, 5)
    c: int | None = None  # default: 2**ceil(sqrt(log2 h))
    rounds: Literal["strict", "adaptive"] = "strict"
    max_rounds: int = 64


@dataclass
class WitnessCertificate:
    h: int
    c: int
    alpha: Fraction
    branch: str  # "main" | "early-exit" | "infeasible"
    rounds: str
    inputs: dict
    inequalities: list = field(default_factory=list)
    startup: dict | None = None
    stages: list = field(default_factory=list)
    t: int | None = None
    t1: int | None = None
    t2: int | None = None
    final: dict | None = None
    infeasible: dict | None = None

    @property
    def n(self) -> int:
        return (1 << (self.h + 1)) - 1

    def to_json(self) -> dict:
        d = asdict(self)
        d["alpha"] = str(self.alpha)
        d["n"] = self.n
        d["c_rule"] = "2^ceil(sqrt(log2 h))" if self.c == default_c(self.h) else "fixed"
        d["format"] = CERT_FORMAT
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, d: dict) -> "WitnessCertificate":
        if d.get("format") != CERT_FORMAT:
            raise PSWError(f"not a certificate (format {d.get('format')!r})")
        keys = {f for f in cls.__dataclass_fields__}
        kw = {k: v for k, v in d.items() if k in keys}
        kw["alpha"] = Fraction(kw["alpha"])
        return cls(**kw)


def _family_json(f: CompactFamily) -> dict:
    return {"parts": [list(p) for p in f.parts], "anchors": list(f.anchors),
            "k": f.k, "ell": f.ell, "m": f.m, "q": f.q}


def _complete_parts(run_first: int, run_last: int, block: int, q: int) -> list[int]:
    return [b for b in range(q) if b * block + 1 >= run_first and (b + 1) * block <= run_last]


def _grow_round(gh: GhGraph, tp: HPartition, fam: CompactFamily, x_i: int, i: int, c: int,
                adaptive: bool) -> tuple[CompactFamily, int, dict, list[Inequality]] | Infeasible:
    """One round: grow against ``B_{x_i}``, route through the escape grid, hop bags."""
    g, t, h = gh.graph, gh.tree, gh.h
    S = tp.members(x_i).tolist()
    ineqs = []
    rec: dict = {"round": i, "x": x_i, "bag_size": len(S)}
    step = ceil_log2(c * h) + 2
    if not adaptive:
        exp = fam.m - fam.ell - 2
        size_ok = Inequality("|B_x| < 2^(m - ell - 2)", len(S), "<", Fraction(2) ** exp)
        if not size_ok.holds:
            return Infeasible(f"round {i}", size_ok, "compact growth needs a small bag")
        ineqs.append(size_ok)
    try:
        grown = grow_compact(fam, S, local=adaptive)
    except PreconditionFailed as exc:
        raise InternalError(f"compact growth rejected a checked input: {exc}") from exc
    rec["grown_parts"] = grown.q
    if grown.q == 0:
        return Infeasible(f"round {i}", Inequality("q+ >= 1", 0, ">=", 1), "every part lost an escape")
    ineqs.append(Inequality("ell_{i+1} <= i (ceil(log2(ch)) + 2)", grown.ell, "<=", i * step))
    union = grown.union()
    columns = [grown.paths[v] for v in union]
    m_vert = min(t.vertex_height(v) for v in union)
    sg, to_gh = escape_grid(gh, columns, h - m_vert)
    in_b = np.zeros(g.n, dtype=bool)
    in_b[S] = True
    S_grid = [v for v in range(sg.grid_vertex_count, sg.graph.n) if in_b[to_gh[v]]]
    p = len(S_grid) // sg.y + 1
    _check_grid_removal(sg, S_grid, Fraction(p))
    runs = column_runs(sg, S_grid)
    longest = max(r[1] - r[0] + 1 for r in runs)
    ineqs.append(Inequality("|S_grid| < p y", len(S_grid), "<", p * sg.y))
    ineqs.append(Inequality("longest run >= ceil(x/p)", longest, ">=", fceil(Fraction(sg.x, p))))
    block = 1 << i
    best = max(runs, key=lambda r: (len(_complete_parts(r[0], r[1], block, grown.q)), r[1] - r[0], -r[0]))
    keep = _complete_parts(best[0], best[1], block, grown.q)
    q_prev, q_new = fam.q, len(keep)
    rec.update(grid_x=sg.x, grid_y=sg.y, S_grid=len(S_grid), p=p, run=[best[0], best[1]],
               m_vertices=m_vert, q_prev=q_prev, q=q_new)
    growth = Inequality("q_{i+1} > q_i/(10c) - 2", q_new, ">", Fraction(q_prev, 10 * c) - 2)
    if not growth.holds:
        return Infeasible(f"round {i}", growth, "too few parts survived the grid")
    if q_new == 0:
        return Infeasible(f"round {i}", Inequality("q_{i+1} >= 1", 0, ">=", 1), "no complete part in any run")
    ineqs.extend([growth, Inequality("q_{i+1} >= 1", q_new, ">=", 1)])
    new = CompactFamily(t, tuple(grown.parts[b] for b in keep), tuple(grown.anchors[b] for b in keep),
                        grown.k, grown.ell, grown.m)
    labels, _ = component_labels(g, S)
    members = new.union()
    y = shared_neighbor_bag(g, tp, x_i, members[0], members[0], labels=labels, check_partition=False)
    for w in members[1:]:
        if shared_neighbor_bag(g, tp, x_i, members[0], w, labels=labels, check_partition=False) != y:
            raise InternalError("surviving parts landed in different bags")
    return new, y, rec, ineqs


def extract_witness(gh: GhGraph, tp: HPartition, lay: Layering,
                    config: WitnessConfig | None = None, inputs: dict | None = None) -> WitnessCertificate:
    """Run the lower-bound argument on one (tree-partition, layering) pair.

    Returns a certificate whose branch is ``"early-exit"`` (a huge bag
    already forces a big cell), ``"main"`` (compact families were grown
    and a cell certified), or ``"infeasible"`` (a named inequality failed).
    """
    from .partitions import validate_hpartition, validate_layering

    cfg = config or WitnessConfig()
    alpha = Fraction(cfg.alpha)
    h, t, g = gh.h, gh.tree, gh.graph
    c = default_c(h) if cfg.c is None else int(cfg.c)
    if validate_hpartition(g, tp):
        raise PreconditionFailed("tree-partition is not a valid H-partition of G_h")
    if validate_layering(g, lay):
        raise PreconditionFailed("layering is not valid for G_h")
    meta = {"tree_partition_sha256": partition_digest(tp), "layering_sha256": layering_digest(lay),
            "host_nodes": tp.host.n, "layers": lay.layer_count}
    meta.update(inputs or {})
    cert = WitnessCertificate(h, c, alpha, "infeasible", cfg.rounds, meta)

    sizes = tp.sizes()
    x0 = int(np.argmax(sizes))
    big = Inequality("|B_x| >= c h", int(sizes[x0]), ">=", c * h)
    if big.holds:
        B = tp.members(x0)
        counts = np.bincount(lay.layer_of[B], minlength=lay.layer_count)
        y = int(np.argmax(counts))
        bound = spread_bound(int(B.size), 2 * h)
        cert.branch = "early-exit"
        cert.inequalities = [big.to_json(),
                             Inequality("cell >= ceil(|B_x| / (2h + 1))", int(counts[y]), ">=", bound).to_json(),
                             Inequality("bound >= 1", bound, ">=", 1).to_json()]
        cert.final = {"x": x0, "y": y, "cell": int(counts[y]), "bound": bound, "bag_size": int(B.size),
                      "diameter_bound": 2 * h}
        return cert
    cert.inequalities = [Inequality("|B_x| < c h", int(sizes[x0]), "<", c * h).to_json()]

    defect = tree_defect(tp.host)
    if not defect.holds:
        cert.infeasible = Infeasible("input", defect, "shared neighbour bags need a tree host").to_json()
        return cert
    st = _startup(gh, tp, alpha, c)
    if isinstance(st, Infeasible):
        cert.infeasible = st.to_json()
        return cert
    cert.startup = {"x": st.x, "x_prime": st.x_prime, "R": st.R, "branch": st.branch, **st.record,
                    "inequalities": [q.to_json() for q in st.inequalities]}
    if not all(q.holds for q in st.inequalities):
        raise InternalError("startup recorded a failing inequality")

    q1 = len(st.R)
    m = min(t.vertex_height(v) for v in st.R)
    fam = CompactFamily.singletons(t, st.R, m)
    t1, t2 = compute_t1(q1, c), compute_t2(h)
    cert.t1, cert.t2 = t1, t2
    if cfg.rounds not in ("strict", "adaptive"):
        raise PreconditionFailed(f"unknown rounds mode {cfg.rounds!r}")
    adaptive = cfg.rounds == "adaptive"
    rounds = cfg.max_rounds if adaptive else max(0, min(t1, t2))
    x_i = st.x_prime
    cert.stages = [{"round": 1, "x": x_i, **_family_json(fam), "inequalities": []}]
    done = 0
    for i in range(1, rounds + 1):
        out = _grow_round(gh, tp, fam, x_i, i, c, adaptive)
        if isinstance(out, Infeasible):
            if adaptive:
                break
            cert.infeasible = out.to_json()
            cert.t = rounds
            return cert
        fam, x_i, rec, ineqs = out
        cert.stages.append({**rec, "round": i + 1, "x": x_i, "x_prev": rec["x"], **_family_json(fam),
                            "inequalities": [q.to_json() for q in ineqs]})
        done = i
    cert.t = done

    B = tp.members(x_i)
    best = None
    for part, a in zip(fam.parts, fam.anchors):
        counts = np.bincount(lay.layer_of[list(part)], minlength=lay.layer_count)
        y = int(np.argmax(counts))
        if best is None or counts[y] > best[2]:
            best = (part, a, int(counts[y]), y)
    part, a, r_cell, y = best
    ell = max(t.depth(v) - t.depth(a) for v in part)
    cell = int(np.count_nonzero(lay.layer_of[B] == y))
    bound = spread_bound(len(part), 2 * ell)
    closed_form_bound = spread_bound(1 << done, 2 * done * (ceil_log2(c * h) + 2))
    cert.branch = "main"
    cert.final = {"x": x_i, "y": y, "cell": cell, "bound": bound, "closed_form_bound": closed_form_bound,
                  "R": list(part), "anchor": a, "ell": ell, "R_in_layer": r_cell,
                  "inequalities": [
                      Inequality("cell >= |R cap P_y|", cell, ">=", r_cell).to_json(),
                      Inequality("|R cap P_y| >= ceil(|R| / (2 ell + 1))", r_cell, ">=", bound).to_json(),
                      Inequality("bound >= ceil(2^t / (2t(ceil(log2(ch)) + 2) + 1))", bound, ">=",
                                 closed_form_bound).to_json(),
                      Inequality("closed-form bound >= 1", closed_form_bound, ">=", 1).to_json(),
                  ]}
    return cert


# -- final report ----------------------------------------------------------------

def lower_bound_report(cert: WitnessCertificate, c: int, delta: int, treewidth: int) -> dict:
    """Compare a claimed ``G_h ⊑ H ⊠ P ⊠ K_c`` against a certified cell.

    A tree-partition of ``H`` of width ``24Δ(t+1)`` turns the claim into
    ``G_h ⊑ T ⊠ P ⊠ K_{24cΔ(t+1)}``, so every cell of the matching
    partition pair holds at most that many vertices.
    """
    implied = 24 * c * delta * (treewidth + 1)
    cell = cert.final["cell"] if cert.final else None
    out = {"h": cert.h, "n": cert.n, "claim": {"c": c, "delta": delta, "treewidth": treewidth},
           "implied_tree_product_width": implied, "certified_cell": cell, "branch": cert.branch}
    if cell is None:
        out["verdict"] = "no certified cell"
        return out
    out["verdict"] = ("claim refuted for this partition pair" if implied < cell
                      else "claim consistent with this partition pair")
    # cell <= 24 c Δ (t+1) forces c Δ (t+1) >= ceil(cell / 24)
    out["min_c_delta_tplus1"] = -(-cell // 24)
    return out
