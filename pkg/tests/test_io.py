import numpy as np
import pytest

from psw import io
from psw.constructions import build_leftmost_path_partition
from psw.errors import FormatError
from psw.partitions import partitions_to_embedding
from psw.trees import build_gh


def test_edge_list_round_trip(tmp_path):
    g = build_gh(3).graph
    path = tmp_path / "g.el"
    io.write_edge_list(path, g)
    text = path.read_text()
    assert text.startswith("15 25\n") and text.endswith("\n")
    assert io.read_edge_list(path).edges() == g.edges()


def test_edge_list_errors():
    with pytest.raises(FormatError):
        io.parse_edge_list("3 2\n0 1\n")
    with pytest.raises(FormatError):
        io.parse_edge_list("3\n")
    with pytest.raises(FormatError):
        io.parse_edge_list("2 1\n0 x\n")
    assert io.parse_edge_list("# c\n2 1\n0 1\n").edge_count == 1


def test_partition_with_host_reference(tmp_path):
    gh = build_gh(4)
    hp, lay = build_leftmost_path_partition(gh)
    io.write_edge_list(tmp_path / "host.el", hp.host)
    io.write_json(tmp_path / "parts.json", io.partition_to_json(hp, "host.el"))
    back = io.read_partition(tmp_path / "parts.json", gh.n)
    assert np.array_equal(back.owner, hp.owner) and back.host.edges() == hp.host.edges()
    io.write_json(tmp_path / "lay.json", io.layering_to_json(lay))
    assert np.array_equal(io.read_layering(tmp_path / "lay.json", gh.n).layer_of, lay.layer_of)


def test_embedding_round_trip():
    gh = build_gh(3)
    hp, lay = build_leftmost_path_partition(gh)
    e = partitions_to_embedding(gh.graph, hp, lay, 1)
    back = io.embedding_from_json(io.embedding_to_json(e), gh.graph)
    assert np.array_equal(back.coords, e.coords) and back.factor_h.edges() == e.factor_h.edges()


def test_atomic_write_leaves_nothing_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    target.write_text("old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(io.os, "replace", boom)
    with pytest.raises(OSError):
        io.atomic_write(target, "new")
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]
