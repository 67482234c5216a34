import networkx as nx
import pytest

from psw.constructions import build_leftmost_path_partition, treewidth_at_most_2
from psw.errors import BudgetExceeded
from psw.graph import build_graph, complete_graph, path_graph
from psw.oracle import (
    exact_treewidth_tiny,
    exhaustive_lemma_sweep,
    is_balanced_separator,
    min_product_c,
    minimal_balanced_separators,
)
from psw.partitions import embedding_violations
from psw.trees import build_gh
from psw.witness import check_separator_depths

# frozen from the exhaustive search before the witness pipeline existed
MIN_C_G2 = 1


def test_min_c_small_graphs():
    assert min_product_c(build_graph(1, [])).c == 1
    res = min_product_c(build_gh(1).graph)
    assert res.c == 1
    assert embedding_violations(res.embedding) == []


def test_min_c_g2_frozen():
    res = min_product_c(build_gh(2).graph)
    assert res.c == MIN_C_G2
    assert embedding_violations(res.embedding) == []


def test_min_c_respects_small_hosts():
    # one host vertex and a single layer force c = |V|
    assert min_product_c(complete_graph(3), max_tree_vertices=1, max_path_length=0).c == 3


def test_min_c_guard():
    with pytest.raises(BudgetExceeded):
        min_product_c(path_graph(9))


def test_separators_h2():
    gh = build_gh(2)
    search = minimal_balanced_separators(gh, 3)
    assert search.complete and search.separators
    assert frozenset({2, 4}) in search.separators
    for s in search.separators:
        assert is_balanced_separator(gh.graph, s)
        assert check_separator_depths(gh, s).passed
    assert minimal_balanced_separators(gh, gh.n).separators


def test_separators_are_minimal_h3():
    gh = build_gh(3)
    for s in minimal_balanced_separators(gh, 4).separators:
        for v in s:
            assert not is_balanced_separator(gh.graph, s - {v})


def test_exact_treewidth_examples():
    assert exact_treewidth_tiny(complete_graph(4)) == 3
    assert exact_treewidth_tiny(path_graph(5)) == 1
    hp, _ = build_leftmost_path_partition(build_gh(2))
    assert exact_treewidth_tiny(hp.host) == 2


def test_exact_treewidth_matches_networkx_bounds():
    from networkx.algorithms.approximation import treewidth_min_degree

    for gx in nx.graph_atlas_g()[1:200]:
        g = build_graph(gx.number_of_nodes(), list(gx.edges()))
        tw = exact_treewidth_tiny(g)
        assert tw <= treewidth_min_degree(gx)[0]
        assert (tw <= 2) == treewidth_at_most_2(g).treewidth_le_2


def test_sweeps_small():
    assert exhaustive_lemma_sweep(5, height=2).ok
    assert exhaustive_lemma_sweep(6, height=3).instances == 575
    assert exhaustive_lemma_sweep(7, samples=500, seed=1).ok
    assert exhaustive_lemma_sweep(11, samples=100, seed=1, heights=[8]).ok
    rep = exhaustive_lemma_sweep(9, heights=[2, 3], max_size=4)
    assert rep.ok and rep.stats["h=2"]["separators"] > 0
