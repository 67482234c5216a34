import pytest

from psw.errors import HeightTooLarge, NotUnrelated
from psw.trees import (
    CompleteBinaryTree,
    build_binary_tree,
    build_gh,
    build_subdivided_grid,
    is_unrelated,
    left_to_right_order,
)


def test_binary_tree_small_heights():
    assert build_binary_tree(0).graph.n == 1
    t1 = build_binary_tree(1)
    assert t1.graph.edges() == [(0, 1), (0, 2)]
    t3 = build_binary_tree(3)
    assert t3.vertex_count == 15
    assert list(t3.leaves()) == list(range(7, 15))
    assert t3.depth(5) == 2


def test_unrelated_examples():
    t = CompleteBinaryTree(2)
    assert is_unrelated(t, [3, 4, 5, 6])
    assert not is_unrelated(t, [0, 5])
    assert is_unrelated(t, [1, 6])


def test_left_to_right_order():
    t = CompleteBinaryTree(2)
    assert left_to_right_order(t, [3, 4, 5, 6]) == [3, 4, 5, 6]
    assert left_to_right_order(t, [5, 1]) == [1, 5]
    with pytest.raises(NotUnrelated):
        left_to_right_order(t, [0, 6])


def test_gh_small():
    g1 = build_gh(1).graph
    assert g1.n == 3 and g1.edge_count == 3
    g2 = build_gh(2).graph
    assert g2.n == 7 and g2.edge_count == 10


@pytest.mark.parametrize("h", range(1, 13))
def test_gh_counts_and_degree(h):
    g = build_gh(h).graph
    assert g.n == 2 ** (h + 1) - 1
    assert g.edge_count == 2 ** (h + 2) - h - 4
    assert g.max_degree() <= 5


def test_gh_budget():
    with pytest.raises(HeightTooLarge):
        build_gh(10, budget=100)


def test_level_paths_run_left_to_right():
    gh = build_gh(3)
    for d in range(1, 4):
        path = list(gh.level_path(d))
        assert all(gh.graph.has_edge(a, b) for a, b in zip(path, path[1:]))


def test_grid_plain_and_divided():
    sq = build_subdivided_grid(2, 2)
    assert sq.graph.n == 4 and sq.graph.edge_count == 4
    p3 = build_subdivided_grid(2, 1, 1)
    assert p3.graph.n == 3 and p3.graph.edge_count == 2


def test_grid_three_by_two_each_edge_divided_once():
    sg = build_subdivided_grid(3, 2, 1)
    assert sg.grid_vertex_count == 6
    assert sg.graph.n == 10
    # 3 vertical edges plus 4 chains of two half-edges
    assert sg.graph.edge_count == 3 + 8
    plain = build_subdivided_grid(3, 2)
    assert sg.contracted().edges() == plain.graph.edges()
    assert all(sg.is_subdivision(v) for v in range(6, 10))
