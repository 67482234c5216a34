import networkx as nx
import numpy as np
import pytest

from psw.constructions import (
    build_leftmost_path_partition,
    contract_host_edges,
    composed_partition,
    has_minor_bruteforce,
    obs6_failure_witness,
    outerplanar_by_minors,
    outerplanarity_check_small,
    partition_suite,
    treewidth_at_most_2,
)
from psw.graph import build_graph, complete_bipartite, complete_graph, cycle_graph, is_tree, path_graph
from psw.partitions import max_cell, validate_hpartition, validate_layering
from psw.trees import build_gh


def test_chain_partition_of_g2():
    gh = build_gh(2)
    hp, lay = build_leftmost_path_partition(gh)
    assert sorted(map(sorted, hp.parts.values())) == [[0, 1, 3], [2, 5], [4], [6]]
    # triangle on the chains of 0, 4 and 2 with the chain of 6 pendant
    assert hp.host.edges() == [(0, 1), (0, 2), (1, 2), (2, 3)]
    assert max_cell(hp, lay)[2] == 1


@pytest.mark.parametrize("h", range(1, 13))
def test_chain_partition_properties(h):
    gh = build_gh(h)
    hp, lay = build_leftmost_path_partition(gh)
    assert validate_hpartition(gh.graph, hp) == [] and validate_layering(gh.graph, lay) == []
    assert max_cell(hp, lay)[2] <= 1
    assert treewidth_at_most_2(hp.host).treewidth_le_2


@pytest.mark.parametrize("h", range(1, 7))
def test_chain_host_outerplanar(h):
    hp, _ = build_leftmost_path_partition(build_gh(h))
    v = outerplanarity_check_small(hp.host)
    assert v.outerplanar
    assert sorted(v.witness) == list(range(hp.host.n))


def test_treewidth_examples():
    assert treewidth_at_most_2(path_graph(6)).treewidth_le_2
    v = treewidth_at_most_2(complete_graph(4))
    assert v.treewidth_le_2 is False and v.witness == [0, 1, 2, 3]
    star = build_graph(6, [(0, i) for i in range(1, 6)])
    assert treewidth_at_most_2(star).treewidth_le_2


def test_outerplanar_examples():
    assert outerplanarity_check_small(cycle_graph(5)).outerplanar
    k23 = outerplanarity_check_small(complete_bipartite(2, 3))
    assert k23.treewidth_le_2 and k23.outerplanar is False
    assert outerplanarity_check_small(complete_graph(4)).outerplanar is False
    assert outerplanarity_check_small(cycle_graph(5), budget=3).outerplanar is None


def test_minor_search_examples():
    assert has_minor_bruteforce(complete_graph(4), complete_graph(4))
    assert not has_minor_bruteforce(cycle_graph(5), complete_graph(4))
    assert outerplanar_by_minors(cycle_graph(5))
    assert not outerplanar_by_minors(complete_bipartite(2, 3))


def test_apex_planarity_matches_minor_search_on_small_graphs():
    for gx in nx.graph_atlas_g()[1:]:
        if gx.number_of_nodes() > 5:
            break
        g = build_graph(gx.number_of_nodes(), list(gx.edges()))
        assert outerplanarity_check_small(g).outerplanar == outerplanar_by_minors(g)


@pytest.mark.parametrize("h", range(3, 13))
def test_neighbour_spread_failure(h):
    gh = build_gh(h)
    hp, _ = build_leftmost_path_partition(gh)
    w = obs6_failure_witness(gh, hp, parts=[0])
    assert w is not None and len(w.boundary) >= h and w.max_per_part == 1
    assert w.boundary <= w.component


def test_suite_members_are_valid():
    gh = build_gh(7)
    suite = partition_suite(gh, 1)
    for name, tp in suite.items():
        assert validate_hpartition(gh.graph, tp) == [], name
        assert is_tree(tp.host) == (name != "singletons-over-gh"), name


def test_contraction_keeps_tree_partition():
    gh = build_gh(8)
    tp = composed_partition(gh)
    for seed in range(5):
        out = contract_host_edges(tp, 0.5, seed)
        assert is_tree(out.host) and validate_hpartition(gh.graph, out) == []
        assert out.host.n < tp.host.n
