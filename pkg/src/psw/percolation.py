"""Escape vertices in complete binary trees and compact-family growth.

Every routine here works on the subtree of ``T_h`` rooted at an arbitrary
vertex; the set ``s`` may name vertices anywhere in the tree and only its
members inside that subtree matter.  Depth bounds are checked in the exact
integer form ``2**depth <= 2*|S|`` (one escape) or ``<= 4*|S|`` (two).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import NoEscape, PreconditionFailed, RootHasNoParent
from .trees import CompleteBinaryTree, is_unrelated, left_to_right_order


@dataclass(frozen=True)
class Escape:
    vertex: int
    path: tuple[int, ...]  # vertex -> leaf, disjoint from S
    depth: int  # relative to the subtree root


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 0 else 0


def _restrict(t: CompleteBinaryTree, s: Iterable[int], root: int) -> set[int]:
    return {v for v in s if t.is_ancestor(root, v)}


def _one_escape(t: CompleteBinaryTree, r: int, S: set[int]) -> tuple[int, list[int]]:
    # S lies in the subtree of r and 1 <= |S| < 2**height(r)
    hh = t.vertex_height(r)
    if hh == 1:
        for child in (2 * r + 1, 2 * r + 2):
            if child not in S:
                return child, [child]
        raise NoEscape(f"both children of {r} are blocked")
    dr = t.depth(r)
    per_depth = [0] * (hh + 1)
    for v in S:
        per_depth[t.depth(v) - dr] += 1
    per_depth[0] = 1  # r itself counts as present
    ell = 0
    while ell + 1 <= hh and per_depth[ell + 1] == 1 << (ell + 1):
        ell += 1
    level = dr + ell + 1
    below = {}
    for v in S:
        dv = t.depth(v)
        if dv >= level:
            a = ((v + 1) >> (dv - level)) - 1
            below[a] = below.get(a, 0) + 1
    first = ((r + 1) << (ell + 1)) - 1
    # leftmost least-loaded subtree
    r2 = min(range(first, first + (1 << (ell + 1))), key=lambda a: (below.get(a, 0), a))
    sub = {v for v in S if t.is_ancestor(r2, v)}
    if not sub:
        return r2, t.leftmost_path(r2)
    v2, path = _one_escape(t, r2, sub)
    if t.parent(v2) in S:
        return v2, path
    return r2, [r2, *path]


def find_escape(t: CompleteBinaryTree, s: Iterable[int], root: int = 0) -> Escape:
    """Escape vertex below ``root`` avoiding ``S = s ∩ subtree(root)``.

    The result ``v`` is not ``root``, has relative depth at most
    ``log2|S| + 1``, its parent is in ``S ∪ {root}``, and ``path`` runs
    from ``v`` to a leaf avoiding ``S``.  ``root`` may itself belong to
    ``S``; it is counted in ``|S|``.
    """
    S = _restrict(t, s, root)
    hh = t.vertex_height(root)
    if not 1 <= len(S) < (1 << hh):
        raise NoEscape(f"need 1 <= |S| < 2^{hh}, got |S| = {len(S)}")
    v, path = _one_escape(t, root, S)
    return Escape(v, tuple(path), t.depth(v) - t.depth(root))


def find_two_escapes(t: CompleteBinaryTree, s: Iterable[int], root: int = 0) -> tuple[Escape, Escape]:
    """Two unrelated escapes, one under each child of ``root``.

    Needs ``1 <= |S| < 2**(height(root) - 1)``; each escape has relative
    depth at most ``log2|S| + 2``.
    """
    S = _restrict(t, s, root)
    hh = t.vertex_height(root)
    if hh < 1 or not 1 <= len(S) < (1 << (hh - 1)):
        raise NoEscape(f"need 1 <= |S| < 2^{hh - 1}, got |S| = {len(S)}")
    d0 = t.depth(root)
    out = []
    for child in (2 * root + 1, 2 * root + 2):
        sub = {v for v in S if t.is_ancestor(child, v)}
        if not sub:
            v, path = child, t.leftmost_path(child)
        else:
            v, path = _one_escape(t, child, sub)
            if t.parent(v) not in S:
                v, path = child, [child, *path]
        out.append(Escape(v, tuple(path), t.depth(v) - d0))
    return out[0], out[1]


def free_path(t: CompleteBinaryTree, v: int, s: set[int] | frozenset[int]) -> list[int] | None:
    """A downward path from ``v`` to a leaf avoiding ``s`` (leftmost first)."""
    if v in s:
        return None
    if t.is_leaf(v):
        return [v]
    for child in (2 * v + 1, 2 * v + 2):
        rest = free_path(t, child, s)
        if rest is not None:
            return [v, *rest]
    return None


def is_compatible(t: CompleteBinaryTree, v: int, s: Iterable[int]) -> tuple[bool, list[int] | None]:
    """Parent of ``v`` lies in ``s`` and ``T_h - s`` has a ``v``-to-leaf path."""
    if v == 0:
        raise RootHasNoParent("the root has no parent")
    s = s if isinstance(s, (set, frozenset)) else set(s)
    if t.parent(v) not in s:
        return False, None
    path = free_path(t, v, s)
    return path is not None, path


@dataclass(frozen=True)
class CompactFamily:
    """Parts ``R_1..R_q`` with anchors; see ``validate_compact`` for the clauses."""

    tree: CompleteBinaryTree
    parts: tuple[tuple[int, ...], ...]
    anchors: tuple[int, ...]
    k: int
    ell: int
    m: int
    paths: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def q(self) -> int:
        return len(self.parts)

    def union(self) -> list[int]:
        return [v for part in self.parts for v in part]

    @classmethod
    def singletons(cls, tree: CompleteBinaryTree, vertices: Sequence[int], m: int) -> "CompactFamily":
        order = left_to_right_order(tree, vertices)
        return cls(tree, tuple((v,) for v in order), tuple(order), 1, 0, m)


@dataclass
class CompactReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_compact(f: CompactFamily) -> CompactReport:
    t = f.tree
    bad = []
    if len(f.parts) != len(f.anchors):
        return CompactReport([f"{len(f.parts)} parts but {len(f.anchors)} anchors"])
    for i, (part, a) in enumerate(zip(f.parts, f.anchors)):
        if any(v not in t for v in part) or a not in t:
            bad.append(f"part {i}: vertex outside T_{t.height}")
            continue
        if len(set(part)) != len(part) or not is_unrelated(t, part):
            bad.append(f"clause 1: part {i} is not unrelated")
        if len(part) < f.k:
            bad.append(f"clause 1: part {i} has {len(part)} < k={f.k} members")
        for v in part:
            if not t.is_ancestor(a, v):
                bad.append(f"clause 2: anchor {a} is not an ancestor of {v}")
            elif t.depth(v) - t.depth(a) > f.ell:
                bad.append(f"clause 2: dist({v}, {a}) > ell={f.ell}")
        if t.vertex_height(a) < f.m:
            bad.append(f"clause 3: anchor {a} has height {t.vertex_height(a)} < m={f.m}")
    if bad:
        return CompactReport(bad)
    if len(set(f.anchors)) != len(f.anchors) or not is_unrelated(t, f.anchors):
        return CompactReport(["clause 3: anchors are not unrelated"])
    union = f.union()
    if len(set(union)) != len(union) or not is_unrelated(t, union):
        bad.append("consequence (i): union of parts is not unrelated")
    else:
        which = {v: i for i, part in enumerate(f.parts) for v in part}
        anchor_rank = {a: r for r, a in enumerate(left_to_right_order(t, f.anchors))}
        seq = [anchor_rank[f.anchors[which[v]]] for v in left_to_right_order(t, union)]
        if seq != sorted(seq):
            bad.append("consequence (ii): parts are not blockwise in left-to-right order")
    return CompactReport(bad)


def grow_compact(f: CompactFamily, s: Iterable[int], local: bool = False) -> CompactFamily:
    """Replace every member ``r`` by the two escapes below it.

    The result is ``(2k, ell + ceil(log2|s|) + 2, m)``-compact, keeps the
    anchors, and every new vertex is compatible with ``s`` (witness paths
    are kept in ``paths``).

    With ``local=True`` the global size condition ``|s| < 2**(m-ell-2)`` is
    replaced by the per-member condition each escape actually needs;
    parts containing a member that fails it are dropped and ``ell`` is set
    to the largest anchor distance that occurs.
    """
    s = set(s)
    t = f.tree
    report = validate_compact(f)
    if not report.ok:
        raise PreconditionFailed("input family is not compact: " + report.violations[0])
    if not set(f.union()) <= s:
        raise PreconditionFailed("the parts are not contained in s")
    if not s:
        raise PreconditionFailed("s must be non-empty")
    if not local:
        exp = f.m - f.ell - 2
        if exp < 0 or len(s) >= 1 << exp:
            raise PreconditionFailed(f"need |s| < 2^(m-ell-2) = 2^{exp}, got |s| = {len(s)}")

    parts, anchors, paths = [], [], {}
    for part, a in zip(f.parts, f.anchors):
        new = []
        try:
            for r in part:
                e1, e2 = find_two_escapes(t, s, root=r)
                new.extend((e1.vertex, e2.vertex))
                paths[e1.vertex] = e1.path
                paths[e2.vertex] = e2.path
        except NoEscape:
            if not local:
                raise
            continue
        parts.append(tuple(left_to_right_order(t, new)))
        anchors.append(a)
    if local:
        reach = [t.depth(v) - t.depth(a) for part, a in zip(parts, anchors) for v in part]
        ell = max([f.ell, *reach])
    else:
        ell = f.ell + ceil_log2(len(s)) + 2
    kept = {v for part in parts for v in part}
    return CompactFamily(t, tuple(parts), tuple(anchors), 2 * f.k, ell, f.m,
                         {v: p for v, p in paths.items() if v in kept})
