import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psw.constructions import build_leftmost_path_partition, bfs_tree_partition
from psw.errors import CellTooLarge, PreconditionFailed
from psw.graph import build_graph, complete_graph, cycle_graph, path_graph
from psw.partitions import (
    HPartition,
    Layering,
    ProductEmbedding,
    bfs_layering,
    compose_tree_partition,
    depth_layering,
    diameter_spread,
    embedding_to_partitions,
    embedding_violations,
    partition_width,
    partitions_to_embedding,
    shared_neighbor_bag,
    strong_product,
    validate_hpartition,
    validate_layering,
)
from psw.trees import build_gh


def _product_edges_by_rule(g1, g2):
    """Every pair of product vertices tested against the three-clause rule."""
    n2 = g2.n
    count = 0
    for a, b in itertools.combinations(range(g1.n * n2), 2):
        (v, x), (w, y) = divmod(a, n2), divmod(b, n2)
        same_or_adj1 = v == w or g1.has_edge(v, w)
        same_or_adj2 = x == y or g2.has_edge(x, y)
        count += same_or_adj1 and same_or_adj2
    return count


def test_strong_product_small_cases():
    k4, _ = strong_product(complete_graph(2), complete_graph(2))
    assert k4.n == 4 and k4.edge_count == 6
    p3, _ = strong_product(path_graph(3), complete_graph(1))
    assert p3.edges() == path_graph(3).edges()
    p2p3, _ = strong_product(path_graph(2), path_graph(3))
    assert p2p3.n == 6 and p2p3.edge_count == _product_edges_by_rule(path_graph(2), path_graph(3)) == 11


@pytest.mark.parametrize("g1,g2", [(cycle_graph(4), path_graph(3)), (complete_graph(3), cycle_graph(5))])
def test_strong_product_against_rule(g1, g2):
    prod, coords = strong_product(g1, g2)
    assert prod.edge_count == _product_edges_by_rule(g1, g2)
    assert coords.tolist() == [[v, x] for v in range(g1.n) for x in range(g2.n)]


def test_validate_hpartition_examples():
    tri = complete_graph(3)
    assert validate_hpartition(tri, HPartition(build_graph(1, []), np.zeros(3, dtype=np.int64))) == []
    p3 = path_graph(3)
    owner = np.array([0, 1, 0])
    assert validate_hpartition(p3, HPartition(path_graph(2), owner)) == []
    assert validate_hpartition(p3, HPartition(build_graph(2, []), owner)) == [(0, 1), (1, 2)]


def test_width_examples():
    gh = build_gh(2)
    assert partition_width(HPartition(build_graph(1, []), np.zeros(7, dtype=np.int64))) == 7
    assert partition_width(HPartition(gh.graph, np.arange(7))) == 1
    hp, _ = build_leftmost_path_partition(gh)
    assert partition_width(hp) == 3


def test_bfs_layering_examples():
    assert bfs_layering(path_graph(3), 0).layers == [frozenset({0}), frozenset({1}), frozenset({2})]
    star = build_graph(5, [(0, i) for i in range(1, 5)])
    assert bfs_layering(star, 0).layers == [frozenset({0}), frozenset({1, 2, 3, 4})]
    for h in range(1, 7):
        gh = build_gh(h)
        assert np.array_equal(bfs_layering(gh.graph, 0).layer_of, depth_layering(gh).layer_of)


def test_validate_layering_rejects_skips():
    lay = Layering(np.array([0, 2, 1]), 3)
    assert validate_layering(path_graph(3), lay) == [(0, 1)]


def test_partitions_to_embedding_examples():
    tri = complete_graph(3)
    e = partitions_to_embedding(tri, HPartition(build_graph(1, []), np.zeros(3, dtype=np.int64)),
                                Layering(np.zeros(3, dtype=np.int64), 1), 3)
    assert embedding_violations(e) == [] and e.clique_size == 3
    g1 = build_gh(1)
    hp = HPartition(path_graph(2), np.array([0, 1, 1]))
    e = partitions_to_embedding(g1.graph, hp, depth_layering(g1), 2)
    assert embedding_violations(e) == []
    assert (e.factor_h.n, e.factor_p_length, e.clique_size) == (2, 2, 2)
    with pytest.raises(CellTooLarge):
        partitions_to_embedding(g1.graph, hp, depth_layering(g1), 1)


def test_identity_like_embedding_is_injective():
    g = cycle_graph(5)
    e = partitions_to_embedding(g, HPartition(g, np.arange(5)), Layering(np.zeros(5, dtype=np.int64), 1), 1)
    assert embedding_violations(e) == []
    assert len({tuple(r) for r in e.coords.tolist()}) == 5


def test_embedding_to_partitions_k4():
    k4 = complete_graph(4)
    coords = np.array([[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]])
    hp, lay, c = embedding_to_partitions(ProductEmbedding(k4, complete_graph(2), 2, 1, coords))
    assert sorted(map(sorted, hp.parts.values())) == [[0, 1], [2, 3]]
    assert sorted(map(sorted, lay.layers)) == [[0, 2], [1, 3]]
    assert c == 1


def test_bad_embedding_reported():
    g = path_graph(3)
    coords = np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0]])
    e = ProductEmbedding(g, build_graph(2, []), 1, 1, coords)
    assert embedding_violations(e)


def test_compose_identity_and_single_part():
    g = path_graph(4)
    hp = HPartition(path_graph(2), np.array([0, 0, 1, 1]))
    same = compose_tree_partition(g, hp, HPartition(path_graph(2), np.arange(2)))
    assert np.array_equal(same.owner, hp.owner)
    one = compose_tree_partition(g, hp, HPartition(build_graph(1, []), np.zeros(2, dtype=np.int64)))
    assert one.host.n == 1 and (one.owner == 0).all()


def test_compose_chain_partition_of_g2():
    gh = build_gh(2)
    hp, _ = build_leftmost_path_partition(gh)
    # the host is a triangle {0,1,2} plus a pendant 3 on 2; merge 1 and 2
    tp = HPartition(path_graph(3), np.array([0, 1, 1, 2]))
    assert validate_hpartition(hp.host, tp) == []
    out = compose_tree_partition(gh.graph, hp, tp)
    assert validate_hpartition(gh.graph, out) == []
    assert partition_width(out) <= 2 * 3


def test_diameter_spread_examples():
    g = path_graph(4)
    lay = bfs_layering(g, 0)
    res = diameter_spread(g, [0, 3], lay)
    assert res.count == 1 >= res.bound
    gh = build_gh(3)
    res = diameter_spread(gh.graph, range(7, 15), depth_layering(gh))
    assert res.layer == 3 and res.count == 8
    assert res.count >= res.bound == -(-8 // (int(res.diameter) + 1))


def test_shared_neighbor_bag_examples():
    c4 = cycle_graph(4)
    tp = HPartition(path_graph(3), np.array([0, 1, 2, 1]))
    assert shared_neighbor_bag(c4, tp, 0, 1, 3) == 1
    assert shared_neighbor_bag(c4, tp, 0, 1, 1) == 1
    p4 = path_graph(4)
    tp = HPartition(path_graph(2), np.array([1, 0, 0, 1]))
    with pytest.raises(PreconditionFailed):
        shared_neighbor_bag(p4, tp, 0, 0, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 1000))
def test_embedding_round_trip_on_gh_bfs_partitions(h, seed):
    gh = build_gh(h)
    root = seed % gh.n
    tp = bfs_tree_partition(gh.graph, root)
    lay = bfs_layering(gh.graph, root)
    from psw.partitions import max_cell

    c = max_cell(tp, lay)[2]
    e = partitions_to_embedding(gh.graph, tp, lay, c)
    assert embedding_violations(e) == []
    hp2, lay2, c2 = embedding_to_partitions(e)
    assert np.array_equal(hp2.owner, tp.owner) and np.array_equal(lay2.layer_of, lay.layer_of)
