import json
from fractions import Fraction

import numpy as np
import pytest

from psw.audit import audit_certificate
from psw.constructions import bfs_tree_partition, one_bag_partition, partition_suite, singleton_partition
from psw.errors import NotBalancedSeparator, PreconditionFailed, SNotSubdivisionOnly, TooManyRemoved
from psw.graph import component_labels, path_graph
from psw.partitions import HPartition, depth_layering
from psw.trees import build_gh, build_subdivided_grid
from psw.witness import (
    Infeasible,
    WitnessCertificate,
    WitnessConfig,
    check_separator_depths,
    compute_t1,
    compute_t2,
    default_c,
    extract_witness,
    find_balanced_bag,
    grid_connectivity,
    lower_bound_report,
    separator_i0,
    startup,
)


def test_default_c_values():
    assert [default_c(h) for h in (2, 4, 10, 14, 16, 17, 20)] == [2, 4, 4, 4, 4, 8, 8]


def test_t1_and_t2():
    assert compute_t1(3, 4) == 0
    assert compute_t1(120, 4) == 1 and compute_t1(119, 4) == 0
    assert compute_t1(1, 4) < 0
    assert all(compute_t2(h) == 0 for h in range(1, 21))


def test_separator_example_h2():
    gh = build_gh(2)
    assert separator_i0(3, 2) == 6
    rep = check_separator_depths(gh, {1, 2, 4})
    assert rep.i0 == 6 and rep.hits == {} and rep.passed


def test_whole_vertex_set_hits_every_depth():
    gh = build_gh(5)
    rep = check_separator_depths(gh, range(gh.n))
    assert rep.passed


def test_unbalanced_separator_rejected():
    with pytest.raises(NotBalancedSeparator):
        check_separator_depths(build_gh(3), {14})


def test_balanced_bag_examples():
    p5 = path_graph(5)
    assert find_balanced_bag(p5, HPartition(p5, np.arange(5))) == 2
    assert find_balanced_bag(p5, one_bag_partition(p5)) == 0


@pytest.mark.parametrize("seed", range(3))
def test_balanced_bag_on_g6_suite(seed):
    gh = build_gh(6)
    for tp in partition_suite(gh, seed).values():
        if not is_tree_host(tp):
            continue
        x = find_balanced_bag(gh.graph, tp)
        labels, k = component_labels(gh.graph, tp.members(x))
        sizes = np.bincount(labels[labels >= 0], minlength=k)
        assert 2 * sizes.max(initial=0) <= gh.n


def is_tree_host(tp):
    from psw.graph import is_tree

    return is_tree(tp.host)


def test_grid_example():
    sg = build_subdivided_grid(4, 2, 1)
    between = list(sg.subdivision_vertices[(2, 1)]) + list(sg.subdivision_vertices[(2, 2)])
    other = sg.subdivision_vertices[(1, 1)][0]
    # |S| = 3 < p y = 4
    run = grid_connectivity(sg, between + [other], 2)
    assert run.length >= 2
    # ties go to the leftmost run
    assert (run.first, run.last) == (1, 2)


def test_grid_empty_removal_is_whole_grid():
    sg = build_subdivided_grid(4, 2, 1)
    run = grid_connectivity(sg, [], 1)
    assert (run.first, run.last) == (1, 4) and len(run.component) == sg.graph.n


def test_grid_preconditions():
    sg = build_subdivided_grid(4, 2, 1)
    subdiv = list(range(sg.grid_vertex_count, sg.graph.n))
    with pytest.raises(TooManyRemoved):
        grid_connectivity(sg, subdiv[:4], 2)
    with pytest.raises(SNotSubdivisionOnly):
        grid_connectivity(sg, [0], 2)
    with pytest.raises(PreconditionFailed):
        grid_connectivity(sg, [], Fraction(3, 2))


def test_startup_rejects_quarter_alpha():
    gh = build_gh(6)
    with pytest.raises(PreconditionFailed):
        startup(gh, one_bag_partition(gh.graph), Fraction(1, 4))


def test_startup_non_tree_host_is_infeasible():
    gh = build_gh(6)
    out = startup(gh, singleton_partition(gh.graph))
    assert isinstance(out, Infeasible) and "tree" in out.inequality.name


def test_startup_outputs_revalidate():
    gh = build_gh(14)
    tp = bfs_tree_partition(gh.graph, [0, *gh.tree.leftmost_path(2)])
    c = int(tp.sizes().max()) // 14 + 1
    out = startup(gh, tp, c=c)
    assert not isinstance(out, Infeasible) and out.branch == "Z"
    t = gh.tree
    assert all(not t.is_ancestor(a, b) for a in out.R for b in out.R if a != b)
    assert all(tp.owner[v] == out.x_prime for v in out.R)
    assert all(t.vertex_height(v) >= Fraction(1, 5) * 14 for v in out.R)
    assert len(out.R) >= Fraction(1, 25) * 14 / c


def test_one_bag_early_exit_g10():
    gh = build_gh(10)
    tp = one_bag_partition(gh.graph)
    lay = depth_layering(gh)
    cert = extract_witness(gh, tp, lay)
    assert cert.branch == "early-exit"
    assert cert.final["cell"] >= cert.final["bound"] == -(-2047 // 21) == 98
    report = lower_bound_report(cert, 1, 1, 1)
    assert report["certified_cell"] >= 98
    assert report["verdict"] == "claim refuted for this partition pair"
    assert lower_bound_report(cert, 100, 1, 1)["verdict"].startswith("claim consistent")
    assert audit_certificate(cert, tp, lay).ok


def test_singletons_over_gh_audits_either_way():
    gh = build_gh(8)
    tp, lay = singleton_partition(gh.graph), depth_layering(gh)
    cert = extract_witness(gh, tp, lay)
    assert cert.branch in ("main", "infeasible")
    assert audit_certificate(cert, tp, lay).ok


@pytest.mark.parametrize("rounds", ["strict", "adaptive"])
def test_main_branch_certificate(rounds):
    gh = build_gh(14)
    suite = partition_suite(gh, 0)
    tp = suite["composed-chain"]
    lay = depth_layering(gh)
    c = int(tp.sizes().max()) // 14 + 1
    cert = extract_witness(gh, tp, lay, WitnessConfig(c=c, rounds=rounds))
    assert cert.branch == "main"
    f = cert.final
    assert f["cell"] >= f["R_in_layer"] >= f["bound"] >= f["closed_form_bound"] >= 1
    d = json.loads(cert.dumps())
    assert audit_certificate(d, tp, lay).ok
    assert WitnessCertificate.from_json(d).to_json() == d
    d["final"]["cell"] += 1
    assert not audit_certificate(d, tp, lay).ok


def test_certificate_is_deterministic():
    gh = build_gh(12)
    tp = partition_suite(gh, 3)["composed-chain-coarsened"]
    lay = depth_layering(gh)
    cfg = WitnessConfig(c=int(tp.sizes().max()) // 12 + 1, rounds="adaptive")
    assert extract_witness(gh, tp, lay, cfg).dumps() == extract_witness(gh, tp, lay, cfg).dumps()


def test_audit_rejects_other_inputs():
    gh = build_gh(10)
    tp, lay = one_bag_partition(gh.graph), depth_layering(gh)
    cert = extract_witness(gh, tp, lay)
    other = bfs_tree_partition(gh.graph, 0)
    assert not audit_certificate(cert, other, lay).ok
