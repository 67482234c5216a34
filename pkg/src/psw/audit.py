"""Independent replay of witness certificates.

The auditor recomputes every quantity a certificate relies on from the
stored partitions using only graph primitives and heap-index arithmetic.
It never calls the pipeline that produced the certificate.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .graph import component_labels, is_tree
from .partitions import HPartition, Layering, validate_hpartition, validate_layering
from .trees import build_gh

_OPS = {">=": lambda a, b: a >= b, ">": lambda a, b: a > b, "<=": lambda a, b: a <= b,
        "<": lambda a, b: a < b, "==": lambda a, b: a == b}


# replaying several certificates of one height reuses the (read-only) graph
_cached_gh = lru_cache(maxsize=2)(build_gh)


def _depth(v: int) -> int:
    return (v + 1).bit_length() - 1


def _is_ancestor(a: int, v: int) -> bool:
    da, dv = _depth(a), _depth(v)
    return da <= dv and ((v + 1) >> (dv - da)) == a + 1


def _unrelated(vs: list[int]) -> bool:
    return len(set(vs)) == len(vs) and not any(
        _is_ancestor(a, b) for a in vs for b in vs if a != b)


def _clog2(n: int) -> int:
    return (n - 1).bit_length() if n > 0 else 0


def _cdiv(a: int, b: int) -> int:
    return -(-a // b)


def _reaches_leaf(v: int, h: int, blocked: set[int]) -> bool:
    stack = [v]
    while stack:
        u = stack.pop()
        if u in blocked:
            continue
        if _depth(u) == h:
            return True
        stack.extend((2 * u + 1, 2 * u + 2))
    return False


@dataclass
class AuditReport:
    failures: list[str] = field(default_factory=list)
    checks: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def expect(self, cond: bool, msg: str) -> None:
        self.checks += 1
        if not cond:
            self.failures.append(msg)


def _check_inequality(rep: AuditReport, d: dict, where: str, want: bool = True) -> bool:
    try:
        lhs, rhs = Fraction(d["lhs"]), Fraction(d["rhs"])
        value = _OPS[d["op"]](lhs, rhs)
    except (KeyError, ValueError, ZeroDivisionError):
        rep.expect(False, f"{where}: malformed inequality {d!r}")
        return False
    rep.expect(value == d.get("holds"), f"{where}: '{d['name']}' records holds={d.get('holds')} but evaluates {value}")
    rep.expect(value == want, f"{where}: '{d['name']}' evaluates {value}")
    return value


def _match(rep: AuditReport, d: dict, name: str, lhs, rhs, where: str) -> None:
    """The recorded inequality ``name`` must carry exactly the recomputed numbers."""
    hits = [q for q in d if q.get("name") == name]
    if not hits:
        rep.expect(False, f"{where}: inequality '{name}' missing")
        return
    q = hits[0]
    rep.expect(Fraction(q["lhs"]) == Fraction(lhs) and Fraction(q["rhs"]) == Fraction(rhs),
               f"{where}: '{name}' records {q['lhs']} {q['op']} {q['rhs']}, recomputed {lhs} vs {rhs}")


def _digest_partition(p: HPartition) -> str:
    hsh = hashlib.sha256()
    hsh.update(np.int64(p.host.n).tobytes())
    hsh.update(p.host.edge_array().astype("<i8").tobytes())
    hsh.update(p.owner.astype("<i8").tobytes())
    return hsh.hexdigest()


def _digest_layering(lay: Layering) -> str:
    hsh = hashlib.sha256()
    hsh.update(np.int64(lay.layer_count).tobytes())
    hsh.update(lay.layer_of.astype("<i8").tobytes())
    return hsh.hexdigest()


def audit_certificate(cert, tp: HPartition, lay: Layering) -> AuditReport:
    """Replay ``cert`` (a certificate object or its JSON dict) against the inputs."""
    d = cert.to_json() if hasattr(cert, "to_json") else cert
    rep = AuditReport()
    try:
        _audit(d, tp, lay, rep)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        rep.expect(False, f"certificate is malformed: {exc!r}")
    return rep


def _audit(d: dict, tp: HPartition, lay: Layering, rep: AuditReport) -> None:
    h = int(d["h"])
    n = (1 << (h + 1)) - 1
    rep.expect(d.get("n") == n, f"n = {d.get('n')} but 2^(h+1) - 1 = {n}")
    c = int(d["c"])
    if d.get("c_rule") == "2^ceil(sqrt(log2 h))":
        s = 0
        while (1 << (s * s)) < h:
            s += 1
        rep.expect(c == 1 << s, f"c = {c} does not follow the recorded rule")
    alpha = Fraction(d["alpha"])
    rep.expect(0 < alpha < Fraction(1, 4), f"alpha = {alpha} is outside (0, 1/4)")
    inputs = d["inputs"]
    rep.expect(inputs.get("tree_partition_sha256") == _digest_partition(tp), "tree-partition differs from the audited one")
    rep.expect(inputs.get("layering_sha256") == _digest_layering(lay), "layering differs from the audited one")
    gh = _cached_gh(h)
    g = gh.graph
    if tp.subject_vertex_count != n or lay.subject_vertex_count != n:
        rep.expect(False, "partitions do not cover G_h")
        return
    rep.expect(not validate_hpartition(g, tp), "tree-partition is not a valid H-partition of G_h")
    rep.expect(not validate_layering(g, lay), "layering is not valid for G_h")
    if not rep.ok:
        return

    branch = d["branch"]
    infeasible = d.get("infeasible")
    failing = infeasible["inequality"] if infeasible else None
    for q in d.get("inequalities", []):
        _check_inequality(rep, q, "top level")
    sizes = np.bincount(tp.owner, minlength=tp.host.n)
    biggest = int(sizes.max())

    if branch == "early-exit":
        _audit_early(d, tp, lay, rep, h, c, sizes)
        return
    _match(rep, d["inequalities"], "|B_x| < c h", biggest, c * h, "top level")

    if branch == "infeasible":
        rep.expect(failing is not None, "infeasible branch without a failing inequality")
        if failing is None:
            return
        _check_inequality(rep, failing, f"infeasible at {infeasible['stage']}", want=False)
        if infeasible["stage"] == "input":
            _, comps = component_labels(tp.host)
            rank = tp.host.edge_count - tp.host.n + comps
            rep.expect(Fraction(failing["lhs"]) == comps + rank, "host tree defect was misreported")
            return
    elif branch != "main":
        rep.expect(False, f"unknown branch {branch!r}")
        return

    rep.expect(is_tree(tp.host), "main branch needs a tree host")
    st = d.get("startup")
    if st is None:
        rep.expect(branch == "infeasible", "main branch without a startup record")
        return
    _audit_startup(st, g, tp, rep, h, c, alpha)
    if not d["stages"]:
        rep.expect(branch == "infeasible", "no stages recorded")
        return
    _audit_stages(d, g, tp, rep, h, c)
    if branch == "main":
        _audit_final(d, tp, lay, rep, h, c)


def _audit_early(d, tp, lay, rep, h, c, sizes) -> None:
    f = d["final"]
    x, y = int(f["x"]), int(f["y"])
    size = int(sizes[x])
    members = np.flatnonzero(tp.owner == x)
    cell = int(np.count_nonzero(lay.layer_of[members] == y))
    bound = _cdiv(size, 2 * h + 1)
    rep.expect(size >= c * h, f"early exit bag {x} has {size} < c h = {c * h} vertices")
    rep.expect(f["bag_size"] == size, "recorded bag size is wrong")
    rep.expect(f["cell"] == cell, f"recorded cell {f['cell']} but |B_x ∩ P_y| = {cell}")
    rep.expect(f["bound"] == bound, f"recorded bound {f['bound']} but ceil(|B_x|/(2h+1)) = {bound}")
    rep.expect(f["diameter_bound"] == 2 * h, "diameter bound of G_h is 2h")
    rep.expect(cell >= bound >= 1, f"cell {cell} and bound {bound} violate cell >= bound >= 1")
    _match(rep, d["inequalities"], "|B_x| >= c h", size, c * h, "early exit")
    _match(rep, d["inequalities"], "cell >= ceil(|B_x| / (2h + 1))", cell, bound, "early exit")


def _audit_startup(st, g, tp, rep, h, c, alpha) -> None:
    x, xp = int(st["x"]), int(st["x_prime"])
    R = [int(v) for v in st["R"]]
    B = np.flatnonzero(tp.owner == x)
    labels, _ = component_labels(g, B)
    alive = labels[labels >= 0]
    biggest = int(np.bincount(alive).max()) if alive.size else 0
    rep.expect(2 * biggest <= g.n, f"bag {x} is not a balanced separator")
    rep.expect(bool(R), "startup produced an empty R")
    if not R:
        return
    rep.expect(all(0 < v < g.n for v in R), "R names a vertex outside T_h minus its root")
    rep.expect(_unrelated(R), "startup R is not unrelated")
    rep.expect(all(int(tp.owner[v]) == xp for v in R), f"R is not inside B_{xp}")
    rep.expect(xp == x or tp.host.has_edge(x, xp), "startup bag is neither x nor a host neighbour of x")
    rep.expect(all(Fraction(h - _depth(v)) >= alpha * h for v in R), "a member of R is shorter than alpha h")
    rep.expect(len(R) >= alpha * alpha * h / c, f"|R| = {len(R)} < alpha^2 h / c")
    for q in st["inequalities"]:
        _check_inequality(rep, q, "startup")
    _match(rep, st["inequalities"], "|R| >= alpha^2 h / c", len(R), alpha * alpha * h / c, "startup")


def _audit_stages(d, g, tp, rep, h, c) -> None:
    stages = d["stages"]
    st = d["startup"]
    strict = d["rounds"] == "strict"
    step = _clog2(c * h) + 2
    R = [int(v) for v in st["R"]]
    first = stages[0]
    m = min(h - _depth(v) for v in R)
    rep.expect(sorted(map(tuple, first["parts"])) == sorted((v,) for v in R), "first family is not R as singletons")
    rep.expect(first["k"] == 1 and first["ell"] == 0 and first["m"] == m, "first family parameters are wrong")
    rep.expect(first["x"] == st["x_prime"], "first family sits in the wrong bag")
    q1 = len(R)
    for i in range(1, len(stages)):
        prev, cur = stages[i - 1], stages[i]
        where = f"stage {i + 1}"
        xp, x = int(prev["x"]), int(cur["x"])
        S = np.flatnonzero(tp.owner == xp)
        Sset = set(S.tolist())
        parts = [[int(v) for v in p] for p in cur["parts"]]
        anchors = [int(a) for a in cur["anchors"]]
        rep.expect(cur["k"] == 1 << i, f"{where}: k = {cur['k']} is not 2^{i}")
        rep.expect(cur["m"] == m, f"{where}: m changed")
        rep.expect(cur["q"] == len(parts) == len(anchors) >= 1, f"{where}: q does not count the parts")
        union = [v for p in parts for v in p]
        rep.expect(all(len(p) == cur["k"] for p in parts), f"{where}: a part does not have k members")
        rep.expect(_unrelated(union), f"{where}: union of parts is not unrelated")
        rep.expect(_unrelated(anchors), f"{where}: anchors are not unrelated")
        rep.expect(all(h - _depth(a) >= m for a in anchors), f"{where}: an anchor is shorter than m")
        prev_by_anchor = {int(a): [int(v) for v in p] for p, a in zip(prev["parts"], prev["anchors"])}
        reach = 0
        for p, a in zip(parts, anchors):
            old = prev_by_anchor.get(a)
            rep.expect(old is not None, f"{where}: anchor {a} is new")
            if old is None:
                continue
            for r in old:
                below = [v for v in p if _is_ancestor(r, v) and v != r]
                rep.expect(len(below) == 2, f"{where}: {r} does not have exactly two successors")
            for v in p:
                rep.expect(_is_ancestor(a, v), f"{where}: anchor {a} is not above {v}")
                reach = max(reach, _depth(v) - _depth(a))
        rep.expect(reach <= cur["ell"], f"{where}: a member is farther than ell from its anchor")
        rep.expect(cur["ell"] <= i * step, f"{where}: ell exceeds i (ceil(log2(ch)) + 2)")
        if strict:
            rep.expect(cur["ell"] == prev["ell"] + _clog2(len(S)) + 2, f"{where}: ell does not follow the growth rule")
            rep.expect(Fraction(len(S)) < Fraction(2) ** (m - prev["ell"] - 2), f"{where}: bag too large to grow")
            _match(rep, cur["inequalities"], "|B_x| < 2^(m - ell - 2)", len(S), Fraction(2) ** (m - prev["ell"] - 2), where)
            growth = Fraction(len(prev["parts"]), 10 * c) - 2
            rep.expect(len(parts) > growth, f"{where}: q fell below q_prev/(10c) - 2")
            _match(rep, cur["inequalities"], "q_{i+1} > q_i/(10c) - 2", len(parts), growth, where)
        for q in cur["inequalities"]:
            _check_inequality(rep, q, where)
        # compatibility with the previous bag and the hop to the next one
        for v in union:
            rep.expect(v > 0 and (v - 1) // 2 in Sset, f"{where}: parent of {v} is not in B_{xp}")
            rep.expect(_reaches_leaf(v, h, Sset), f"{where}: {v} has no leaf path avoiding B_{xp}")
        labels, _ = component_labels(g, S)
        rep.expect(len({int(labels[v]) for v in union}) == 1, f"{where}: parts span several components of G - B_{xp}")
        rep.expect(all(int(tp.owner[v]) == x for v in union), f"{where}: parts are not inside B_{x}")
        rep.expect(tp.host.has_edge(xp, x), f"{where}: {x} is not a host neighbour of {xp}")

    t = d["t"]
    rep.expect(d["t1"] == _t1(q1, c), f"t1 = {d['t1']} but recomputed {_t1(q1, c)}")
    t2 = h // (10 * (_csl(h) + _clog2(h)) + 2)
    rep.expect(d["t2"] == t2, f"t2 = {d['t2']} but recomputed {t2}")
    if d["branch"] == "main":
        rep.expect(len(stages) == t + 1, "stage count does not match t")
        if strict:
            rep.expect(t == max(0, min(d["t1"], t2)), "t is not max(0, min(t1, t2))")


def _csl(h: int) -> int:
    s = 0
    while (1 << (s * s)) < h:
        s += 1
    return s


def _t1(q1: int, c: int) -> int:
    base, t = 10 * c, 0
    if q1 >= 3:
        while 3 * base ** (t + 1) <= q1:
            t += 1
        return t
    while Fraction(3) * Fraction(base) ** t > q1:
        t -= 1
    return t


def _audit_final(d, tp, lay, rep, h, c) -> None:
    f = d["final"]
    last = d["stages"][-1]
    t = d["t"]
    R = [int(v) for v in f["R"]]
    a = int(f["anchor"])
    pairs = [([int(v) for v in p], int(b)) for p, b in zip(last["parts"], last["anchors"])]
    rep.expect((R, a) in pairs, "final R is not a part of the last family")
    x, y = int(f["x"]), int(f["y"])
    rep.expect(x == last["x"], "final bag is not the last family's bag")
    rep.expect(0 <= y < lay.layer_count, "final layer out of range")
    rep.expect(len(R) == 1 << t, f"|R| = {len(R)} is not 2^t")
    ell = max(_depth(v) - _depth(a) for v in R) if R and all(_is_ancestor(a, v) for v in R) else None
    rep.expect(ell is not None and ell == f["ell"], "final ell is not the anchor distance of R")
    if ell is None:
        return
    members = np.flatnonzero(tp.owner == x)
    cell = int(np.count_nonzero(lay.layer_of[members] == y))
    in_layer = sum(1 for v in R if int(lay.layer_of[v]) == y)
    bound = _cdiv(len(R), 2 * ell + 1)
    closed_form_bound = _cdiv(1 << t, 2 * t * (_clog2(c * h) + 2) + 1)
    rep.expect(all(int(tp.owner[v]) == x for v in R), "final R is not inside B_x")
    rep.expect(f["cell"] == cell, f"recorded cell {f['cell']} but |B_x ∩ P_y| = {cell}")
    rep.expect(f["R_in_layer"] == in_layer, "recorded |R ∩ P_y| is wrong")
    rep.expect(f["bound"] == bound, f"recorded bound {f['bound']} but ceil(|R|/(2 ell + 1)) = {bound}")
    rep.expect(f["closed_form_bound"] == closed_form_bound, "recorded closed-form bound is wrong")
    rep.expect(cell >= in_layer >= bound >= closed_form_bound >= 1, "final inequality chain fails")
    for q in f["inequalities"]:
        _check_inequality(rep, q, "final")
    _match(rep, f["inequalities"], "cell >= |R cap P_y|", cell, in_layer, "final")
    _match(rep, f["inequalities"], "|R cap P_y| >= ceil(|R| / (2 ell + 1))", in_layer, bound, "final")
