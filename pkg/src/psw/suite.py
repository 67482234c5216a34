"""The acceptance battery: one pass/fail check per criterion.

Shared by the ``psw suite`` command and ``tests/test_acceptance.py`` so
both run exactly the same code.
"""
from __future__ import annotations

import copy
import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import networkx as nx
import numpy as np

from .audit import audit_certificate
from .constructions import (
    build_leftmost_path_partition,
    obs6_failure_witness,
    outerplanar_by_minors,
    outerplanarity_check_small,
    partition_suite,
    treewidth_at_most_2,
)
from .graph import build_graph, complete_graph, is_tree, path_graph
from .oracle import exhaustive_lemma_sweep, exact_treewidth_tiny, min_product_c
from .partitions import (
    ProductEmbedding,
    bfs_layering,
    depth_layering,
    embedding_to_partitions,
    embedding_violations,
    max_cell,
    partition_width,
    partitions_to_embedding,
    strong_product,
    validate_hpartition,
    validate_layering,
)
from .trees import build_gh
from .witness import WitnessConfig, extract_witness

# Oracle outputs frozen before the pipeline was built; the battery recomputes
# them and compares.  Edge counts come from a pairwise scan of the G_h
# definition, the clique factor of G_2 from the exhaustive min_product_c search.
FROZEN_EDGE_COUNTS = {1: 3, 2: 10, 3: 25, 4: 56}
FROZEN_MIN_C_G2 = 1


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number:2d} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _pairwise_edge_count(h: int) -> int:
    n = (1 << (h + 1)) - 1
    depth = [(v + 1).bit_length() - 1 for v in range(n)]
    return sum(1 for a in range(n) for b in range(a + 1, n)
               if a == (b - 1) // 2 or (depth[a] == depth[b] and b == a + 1))


def gh_structure(max_height: int = 20, **_) -> tuple[bool, str]:
    bad = []
    for h in range(1, 5):
        if _pairwise_edge_count(h) != FROZEN_EDGE_COUNTS[h]:
            bad.append(f"frozen edge count differs at h={h}")
    for h in range(1, max_height + 1):
        g = build_gh(h).graph
        if g.n != (1 << (h + 1)) - 1:
            bad.append(f"|V| at h={h}")
        if g.edge_count != (1 << (h + 2)) - h - 4:
            bad.append(f"|E| at h={h}")
        if h in FROZEN_EDGE_COUNTS and g.edge_count != FROZEN_EDGE_COUNTS[h]:
            bad.append(f"|E| differs from the frozen count at h={h}")
        if g.max_degree() > 5:
            bad.append(f"max degree {g.max_degree()} at h={h}")
    return not bad, f"h=1..{max_height} checked" if not bad else "; ".join(bad[:3])


def _random_embedding(rng: random.Random) -> ProductEmbedding:
    k = rng.randint(1, 6)
    H = build_graph(k, [(a, b) for a in range(k) for b in range(a + 1, k) if rng.random() < 0.5])
    L = rng.randint(1, 6)
    c = rng.randint(1, 3)
    hp_graph, hp_coords = strong_product(H, path_graph(L))
    full, coords2 = strong_product(hp_graph, complete_graph(c))
    coords = np.column_stack([hp_coords[coords2[:, 0]], coords2[:, 1]])
    keep = sorted(rng.sample(range(full.n), rng.randint(1, full.n)))
    new_id = {v: i for i, v in enumerate(keep)}
    edges = [(new_id[u], new_id[v]) for u, v in full.edges()
             if u in new_id and v in new_id and rng.random() < 0.7]
    return ProductEmbedding(build_graph(len(keep), edges), H, L, c, coords[keep])


def obs2_round_trip(seed: int = 42, instances: int = 1000, **_) -> tuple[bool, str]:
    rng = random.Random(seed)
    failures = 0
    for _ in range(instances):
        e = _random_embedding(rng)
        ok = not embedding_violations(e)
        hp, lay, c = embedding_to_partitions(e)
        ok &= not validate_hpartition(e.subject, hp) and not validate_layering(e.subject, lay)
        ok &= max_cell(hp, lay)[2] <= c
        e2 = partitions_to_embedding(e.subject, hp, lay, c)
        ok &= not embedding_violations(e2)
        ok &= np.array_equal(e2.coords[:, :2], e.coords[:, :2])
        hp2, lay2, c2 = embedding_to_partitions(e2)
        ok &= hp2 == hp and lay2 == lay and c2 == c
        failures += not ok
    return failures == 0, f"{instances} instances, {failures} failures"


def _sweep_summary(reports) -> tuple[bool, str]:
    total = sum(r.instances for r in reports)
    failures = sum(len(r.failures) for r in reports)
    return failures == 0 and total > 0, f"{total} inputs, {failures} failures"


def single_escape_exhaustive(**_) -> tuple[bool, str]:
    return _sweep_summary([exhaustive_lemma_sweep(5, height=h) for h in (1, 2, 3)])


def two_escape_sweeps(seed: int = 42, **_) -> tuple[bool, str]:
    reports = [exhaustive_lemma_sweep(6, height=h) for h in (2, 3)]
    reports.append(exhaustive_lemma_sweep(6, height=4, exhaustive=False, samples=10_000, seed=seed))
    return _sweep_summary(reports)


def grid_sweep(seed: int = 42, **_) -> tuple[bool, str]:
    return _sweep_summary([exhaustive_lemma_sweep(7, samples=10_000, seed=seed)])


# largest separator size enumerated per height (h=5 stops at 4: no balanced set that small exists)
SEPARATOR_SIZES = {2: 7, 3: 6, 4: 5, 5: 4}


def separator_depths(**_) -> tuple[bool, str]:
    reports = [exhaustive_lemma_sweep(9, heights=[h], max_size=k) for h, k in SEPARATOR_SIZES.items()]
    failures = sum(len(r.failures) for r in reports)
    counts = ", ".join(f"h={h}: {r.stats[f'h={h}']['separators']}" for h, r in zip(SEPARATOR_SIZES, reports))
    return failures == 0, f"separators {counts}; {failures} failures"


def compact_growth(seed: int = 42, **_) -> tuple[bool, str]:
    return _sweep_summary([exhaustive_lemma_sweep(11, samples=1000, seed=seed)])


def tampered_variants(d: dict, cell_counts: np.ndarray | None = None) -> list[tuple[str, dict]]:
    """Small corruptions of a certificate; an audit must reject every one.

    ``cell_counts[y]`` is the size of the final bag in layer ``y``.  The layer
    is only moved to a layer with a different count, since moving it to an
    equal one yields a certificate that is still correct.
    """
    out = []

    def variant(label, fn):
        dd = copy.deepcopy(d)
        if fn(dd) is not False:
            out.append((label, dd))

    variant("h", lambda dd: dd.__setitem__("h", dd["h"] + 1))
    variant("input digest", lambda dd: dd["inputs"].__setitem__("layering_sha256", "0" * 64))
    if d.get("final"):
        variant("cell", lambda dd: dd["final"].__setitem__("cell", dd["final"]["cell"] + 1))
        variant("bound", lambda dd: dd["final"].__setitem__("bound", dd["final"]["bound"] + 1))
        if cell_counts is not None:
            other = np.flatnonzero(cell_counts != d["final"]["cell"])
            if other.size:
                variant("layer", lambda dd: dd["final"].__setitem__("y", int(other[0])))
    if d.get("startup"):
        def shift_r(dd):
            r = dd["startup"]["R"]
            r[0] = 2 * r[0] + 1
        variant("startup R", shift_r)
    if len(d.get("stages") or []) > 1:
        variant("stage q", lambda dd: dd["stages"][-1].__setitem__("q", dd["stages"][-1]["q"] + 1))
    if d.get("infeasible"):
        def flip(dd):
            q = dd["infeasible"]["inequality"]
            q["lhs"] = q["rhs"]
            q["op"] = "=="
            q["holds"] = True
        variant("infeasible inequality", flip)
    return out


def _pipeline_at(h: int, seed: int) -> tuple[int, list[str], dict]:
    gh = build_gh(h)
    layerings = {"depth": depth_layering(gh), "bfs-leaf": bfs_layering(gh.graph, gh.n - 1)}
    runs, problems = 0, []
    branches: dict[str, int] = {}
    for pname, tp in partition_suite(gh, seed).items():
        configs = [WitnessConfig()]
        w = partition_width(tp)
        if is_tree(tp.host) and w <= 64 * h:
            fit = w // h + 1  # smallest c with width < c h
            configs += [WitnessConfig(c=fit), WitnessConfig(c=fit, rounds="adaptive")]
        for lname, lay in layerings.items():
            for cfg in configs:
                runs += 1
                tag = f"h={h} {pname}/{lname}/c={cfg.c}/{cfg.rounds}"
                cert = extract_witness(gh, tp, lay, cfg)
                branches[cert.branch] = branches.get(cert.branch, 0) + 1
                d = json.loads(cert.dumps())
                rep = audit_certificate(d, tp, lay)
                if not rep.ok:
                    problems.append(f"{tag}: audit failed: {rep.failures[0]}")
                if cert.branch in ("main", "early-exit") and not cert.final["cell"] >= cert.final["bound"] >= 1:
                    problems.append(f"{tag}: final cell below bound")
                if cert.branch == "infeasible" and not cert.infeasible["inequality"]["name"]:
                    problems.append(f"{tag}: unnamed infeasibility")
                counts = None
                if cert.final:
                    inside = lay.layer_of[tp.owner == cert.final["x"]]
                    counts = np.bincount(inside, minlength=lay.layer_count)
                for label, bad in tampered_variants(d, counts):
                    if audit_certificate(bad, tp, lay).ok:
                        problems.append(f"{tag}: tampered {label} passed the audit")
    return runs, problems, branches


def pipeline_soundness(max_height: int = 20, seed: int = 42, min_height: int = 14, **_) -> tuple[bool, str]:
    runs, problems, branches = 0, [], {}
    min_height = min(min_height, max_height)
    for h in range(min_height, max_height + 1):
        r, p, b = _pipeline_at(h, seed)
        runs += r
        problems += p
        for k, v in b.items():
            branches[k] = branches.get(k, 0) + v
    summary = ", ".join(f"{k}={v}" for k, v in sorted(branches.items()))
    if problems:
        return False, f"{len(problems)} problems, first: {problems[0]}"
    return runs > 0, f"{runs} runs over h={min_height}..{max_height} ({summary}), audits and tamper checks clean"


def chain_construction(max_height: int = 12, **_) -> tuple[bool, str]:
    bad = []
    max_height = min(max_height, 12)
    for h in range(1, max_height + 1):
        gh = build_gh(h)
        hp, lay = build_leftmost_path_partition(gh)
        if validate_hpartition(gh.graph, hp) or validate_layering(gh.graph, lay):
            bad.append(f"h={h}: invalid partition")
        if hp.part_count != 1 << h or max_cell(hp, lay)[2] > 1:
            bad.append(f"h={h}: part count or cell size")
        partitions_to_embedding(gh.graph, hp, lay, 1)
        if not treewidth_at_most_2(hp.host).treewidth_le_2:
            bad.append(f"h={h}: host treewidth above 2")
        if h <= 6 and not outerplanarity_check_small(hp.host).outerplanar:
            bad.append(f"h={h}: host not outerplanar")
        if h <= 2 and not outerplanar_by_minors(hp.host):
            bad.append(f"h={h}: minor search disagrees")
        if h >= 3:
            w = obs6_failure_witness(gh, hp)
            if w is None or len(w.boundary) < h or w.max_per_part > 1:
                bad.append(f"h={h}: neighbourhood spread not reproduced")
    return not bad, f"h=1..{max_height} checked" if not bad else "; ".join(bad[:3])


def oracle_regressions(**_) -> tuple[bool, str]:
    bad = []
    if min_product_c(build_gh(1).graph).c != 1:
        bad.append("c(G_1) != 1")
    c2 = min_product_c(build_gh(2).graph).c
    if c2 != FROZEN_MIN_C_G2:
        bad.append(f"c(G_2) = {c2}, frozen {FROZEN_MIN_C_G2}")
    graphs = [g for g in nx.graph_atlas_g() if 1 <= g.number_of_nodes() <= 6]
    disagree = 0
    for gx in graphs:
        g = build_graph(gx.number_of_nodes(), list(gx.edges()))
        if (exact_treewidth_tiny(g) <= 2) != treewidth_at_most_2(g).treewidth_le_2:
            disagree += 1
    if disagree:
        bad.append(f"{disagree} treewidth disagreements")
    return not bad, f"c(G_2)={c2}, {len(graphs)} small graphs compared" if not bad else "; ".join(bad)


CRITERIA = {
    1: ("G_h structure", gh_structure),
    2: ("product round trip", obs2_round_trip),
    3: ("single escape, exhaustive", single_escape_exhaustive),
    4: ("two escapes", two_escape_sweeps),
    5: ("grid connectivity", grid_sweep),
    6: ("balanced separators hit deep levels", separator_depths),
    7: ("compact family growth", compact_growth),
    8: ("witness pipeline and audits", pipeline_soundness),
    9: ("chain construction", chain_construction),
    10: ("oracle regressions", oracle_regressions),
}


def run_criterion(number: int, **kwargs) -> CriterionResult:
    title, fn = CRITERIA[number]
    start = time.perf_counter()
    try:
        passed, detail = fn(**kwargs)
    except Exception as exc:  # a crash is a failed criterion, reported not raised
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(number, title, passed, detail, time.perf_counter() - start)


def run_battery(numbers=None, jobs: int = 1, **kwargs) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    if jobs <= 1:
        return [run_criterion(n, **kwargs) for n in numbers]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(_run_one, kwargs=kwargs), numbers))


def _run_one(number: int, kwargs: dict) -> CriterionResult:
    return run_criterion(number, **kwargs)
