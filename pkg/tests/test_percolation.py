import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from psw.errors import NoEscape, PreconditionFailed, RootHasNoParent
from psw.oracle import random_compact_family
from psw.percolation import (
    CompactFamily,
    find_escape,
    find_two_escapes,
    free_path,
    grow_compact,
    is_compatible,
    validate_compact,
)
from psw.trees import CompleteBinaryTree


def _leaf_path_ok(t, path, s):
    return (not set(path) & set(s) and t.is_leaf(path[-1])
            and all(t.parent(b) == a for a, b in zip(path, path[1:])))


def _check_escape(t, e, s, factor):
    assert e.vertex != 0
    assert t.parent(e.vertex) in set(s) | {0}
    assert 2 ** e.depth <= factor * len(set(s))
    assert e.path[0] == e.vertex and _leaf_path_ok(t, e.path, s)


def test_escape_h1():
    t = CompleteBinaryTree(1)
    assert find_escape(t, {1}).vertex == 2
    assert find_escape(t, {2}).vertex == 1


def test_escape_h2_left_child_blocked():
    t = CompleteBinaryTree(2)
    e = find_escape(t, {1})
    assert e.vertex == 2 and _leaf_path_ok(t, e.path, {1})


@pytest.mark.parametrize("h", [2, 3])
def test_escape_every_small_subset(h):
    t = CompleteBinaryTree(h)
    for k in range(1, 2 ** h):
        for s in itertools.combinations(range(t.vertex_count), k):
            _check_escape(t, find_escape(t, s), s, 2)


def test_escape_rejects_oversized_set():
    t = CompleteBinaryTree(2)
    with pytest.raises(NoEscape):
        find_escape(t, range(4))


def test_two_escapes_h2():
    t = CompleteBinaryTree(2)
    e1, e2 = find_two_escapes(t, {1})
    assert e1.vertex in (3, 4) and e2.vertex == 2


def test_two_escapes_h3_small_sets():
    t = CompleteBinaryTree(3)
    for k in range(1, 4):
        for s in itertools.combinations(range(15), k):
            e1, e2 = find_two_escapes(t, s)
            for e in (e1, e2):
                _check_escape(t, e, s, 4)
            assert not t.is_ancestor(e1.vertex, e2.vertex) and not t.is_ancestor(e2.vertex, e1.vertex)


def test_two_escapes_boundary():
    with pytest.raises(NoEscape):
        find_two_escapes(CompleteBinaryTree(1), {1})


def test_compatibility_examples():
    t = CompleteBinaryTree(3)
    assert is_compatible(t, 7, {3}) == (True, [7])
    assert is_compatible(t, 7, {0})[0] is False
    assert is_compatible(t, 1, {0, 7, 8, 9, 10}) == (False, None)
    with pytest.raises(RootHasNoParent):
        is_compatible(t, 0, {1})
    assert free_path(t, 1, {3}) == [1, 4, 9]


def test_validate_compact_examples():
    t = CompleteBinaryTree(5)
    assert validate_compact(CompactFamily.singletons(t, [3, 4, 5], 3)).ok
    related = CompactFamily(t, ((3,), (7,)), (3, 7), 1, 0, 1)
    assert any("clause 3" in v for v in validate_compact(related).violations)


def test_grow_on_t4():
    t = CompleteBinaryTree(4)
    f = CompactFamily.singletons(t, [0], 4)
    out = grow_compact(f, {0})
    assert out.k == 2 and len(out.parts[0]) == 2
    assert validate_compact(out).ok
    for v in out.union():
        assert is_compatible(t, v, {0})[0]


def test_grow_precondition():
    t = CompleteBinaryTree(4)
    f = CompactFamily.singletons(t, [1], 3)
    with pytest.raises(PreconditionFailed):
        grow_compact(f, {1, 3, 4})


@settings(max_examples=80, deadline=None)
@given(st.integers(6, 10), st.integers(0, 10 ** 6))
def test_grow_doubles_and_stays_compact(h, seed):
    fam, s = random_compact_family(random.Random(seed), h)
    out = grow_compact(fam, s)
    assert [len(p) for p in out.parts] == [2 * len(p) for p in fam.parts]
    assert validate_compact(out).ok
    assert all(is_compatible(fam.tree, v, s)[0] for v in out.union())
