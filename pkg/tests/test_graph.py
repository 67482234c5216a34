import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psw.errors import MalformedEdge
from psw.graph import (
    build_graph,
    complete_graph,
    components_avoiding,
    diameter_of_subset,
    path_graph,
    quotient_graph,
)
from psw.trees import build_gh


def test_triangle_and_single_vertex():
    tri = build_graph(3, [(0, 1), (1, 2), (0, 2)])
    assert tri.n == 3 and tri.edge_count == 3
    one = build_graph(1, [])
    assert one.n == 1 and one.edge_count == 0


def test_self_loop_rejected():
    with pytest.raises(MalformedEdge):
        build_graph(4, [(0, 0)])


def test_out_of_range_rejected():
    with pytest.raises(MalformedEdge):
        build_graph(2, [(0, 2)])


def test_duplicate_edges_rejected():
    with pytest.raises(MalformedEdge, match="duplicate"):
        build_graph(3, [(0, 1), (1, 0), (1, 2)])


def test_components_cut_vertex_and_connected():
    assert sorted(map(sorted, components_avoiding(path_graph(3), [1]))) == [[0], [2]]
    tri = complete_graph(3)
    assert [sorted(c) for c in components_avoiding(tri, [])] == [[0, 1, 2]]


def test_components_of_g2_without_depth_one():
    comps = sorted(map(sorted, components_avoiding(build_gh(2).graph, [1, 2])))
    assert comps == [[0], [3, 4, 5, 6]]


def test_diameter_examples():
    assert diameter_of_subset(complete_graph(4), [2]) == 0
    assert diameter_of_subset(path_graph(4), [0, 3]) == 3


@pytest.mark.parametrize("h", [1, 2, 3, 4])
def test_gh_subset_diameter_against_all_pairs(h):
    gh = build_gh(h)
    ref = dict(nx.all_pairs_shortest_path_length(nx.Graph(gh.graph.edges())))
    rng = np.random.default_rng(h)
    for _ in range(20):
        r = rng.choice(gh.n, size=rng.integers(1, gh.n + 1), replace=False).tolist()
        want = max(ref[a][b] for a in r for b in r)
        got = diameter_of_subset(gh.graph, r)
        assert got == want <= 2 * h


def test_quotient_graph_merges_parallel_edges():
    g = path_graph(4)
    q = quotient_graph(g, np.array([0, 0, 1, 1]), 2)
    assert q.edges() == [(0, 1)]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20))))
def test_components_match_networkx(data):
    n, pairs = data
    edges = sorted({(min(a, b), max(a, b)) for a, b in pairs if a != b})
    g = build_graph(n, edges)
    ref = nx.Graph()
    ref.add_nodes_from(range(n))
    ref.add_edges_from(edges)
    assert sorted(map(sorted, components_avoiding(g, []))) == sorted(map(sorted, nx.connected_components(ref)))
