import json

from psw import io
from psw.cli import main
from psw.constructions import one_bag_partition, singleton_partition
from psw.partitions import depth_layering
from psw.trees import build_gh


def run(tmp_path, monkeypatch, *argv):
    monkeypatch.chdir(tmp_path)
    return main(list(argv))


def test_construction_round_trip(tmp_path, monkeypatch):
    assert run(tmp_path, monkeypatch, "generate", "gh", "--height", "2", "-o", "g2.el") == 0
    assert json.loads((tmp_path / "g2.json").read_text())["h"] == 2
    assert run(tmp_path, monkeypatch, "construct", "outerplanar", "--height", "2", "-o", "parts.json",
               "--host", "host.el", "--layering", "lay.json") == 0
    assert run(tmp_path, monkeypatch, "validate", "embedding", "--graph", "g2.el", "--partition", "parts.json",
               "--layering", "lay.json", "--c", "1", "-o", "emb.json") == 0
    assert run(tmp_path, monkeypatch, "validate", "embedding", "--graph", "g2.el", "--embedding", "emb.json") == 0
    assert run(tmp_path, monkeypatch, "validate", "partition", "parts.json", "--graph", "g2.el") == 0
    assert run(tmp_path, monkeypatch, "check", "tw2", "host.el") == 0
    assert run(tmp_path, monkeypatch, "check", "outerplanar", "host.el") == 0


def test_validate_failure_exit(tmp_path, monkeypatch):
    (tmp_path / "p.el").write_text("3 2\n0 1\n1 2\n")
    (tmp_path / "bad.json").write_text(json.dumps({"host": {"n": 2, "edges": []}, "parts": {"0": [0, 2], "1": [1]}}))
    assert run(tmp_path, monkeypatch, "validate", "partition", "bad.json", "--graph", "p.el") == 1
    (tmp_path / "k4.el").write_text("4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")
    assert run(tmp_path, monkeypatch, "check", "tw2", "k4.el") == 1


def _witness_inputs(tmp_path, monkeypatch, tp_factory, h=10):
    gh = build_gh(h)
    run(tmp_path, monkeypatch, "generate", "gh", "--height", str(h), "-o", "g.el")
    io.write_json(tmp_path / "tp.json", io.partition_to_json(tp_factory(gh.graph)))
    io.write_json(tmp_path / "lay.json", io.layering_to_json(depth_layering(gh)))


def test_witness_then_tampered_audit(tmp_path, monkeypatch):
    _witness_inputs(tmp_path, monkeypatch, one_bag_partition)
    args = ["witness", "--graph", "g.el", "--meta", "g.json", "--tree-partition", "tp.json",
            "--layering", "lay.json", "-o", "cert.json"]
    assert run(tmp_path, monkeypatch, *args) == 0
    first = (tmp_path / "cert.json").read_bytes()
    assert run(tmp_path, monkeypatch, *args) == 0
    assert (tmp_path / "cert.json").read_bytes() == first
    assert run(tmp_path, monkeypatch, "audit", "cert.json") == 0
    d = json.loads(first)
    d["final"]["cell"] += 1
    (tmp_path / "cert.json").write_text(json.dumps(d))
    assert run(tmp_path, monkeypatch, "audit", "cert.json") == 1


def test_witness_claim_refuted(tmp_path, monkeypatch):
    _witness_inputs(tmp_path, monkeypatch, one_bag_partition)
    assert run(tmp_path, monkeypatch, "witness", "--graph", "g.el", "--meta", "g.json", "--tree-partition",
               "tp.json", "--layering", "lay.json", "-o", "cert.json", "--claim", "1,1,1") == 1


def test_witness_infeasible_exit(tmp_path, monkeypatch):
    _witness_inputs(tmp_path, monkeypatch, singleton_partition, h=8)
    assert run(tmp_path, monkeypatch, "witness", "--graph", "g.el", "--meta", "g.json", "--tree-partition",
               "tp.json", "--layering", "lay.json", "-o", "cert.json") == 3
    assert run(tmp_path, monkeypatch, "audit", "cert.json") == 0


def test_usage_errors(tmp_path, monkeypatch, capsys):
    assert run(tmp_path, monkeypatch, "generate", "gh", "-o", "x.el") == 2
    assert "--height" in capsys.readouterr().err
    assert run(tmp_path, monkeypatch, "nonsense") == 2
    assert run(tmp_path, monkeypatch, "generate", "grid", "--x", "2", "--y", "2", "--divide", "zz", "-o", "g.el") == 2
    assert not (tmp_path / "x.el").exists()


def test_config_file_defaults_and_override(tmp_path, monkeypatch):
    (tmp_path / "psw.conf").write_text("# defaults\nheight = 3\n")
    assert run(tmp_path, monkeypatch, "generate", "gh", "--config", "psw.conf", "-o", "a.el") == 0
    assert (tmp_path / "a.el").read_text().startswith("15 25")
    assert run(tmp_path, monkeypatch, "generate", "gh", "--config", "psw.conf", "--height", "2", "-o", "b.el") == 0
    assert (tmp_path / "b.el").read_text().startswith("7 10")
    (tmp_path / "bad.conf").write_text("colour = blue\n")
    assert run(tmp_path, monkeypatch, "generate", "gh", "--config", "bad.conf", "-o", "c.el") == 2


def test_grid_product_export_and_sweeps(tmp_path, monkeypatch):
    assert run(tmp_path, monkeypatch, "generate", "grid", "--x", "3", "--y", "2", "--divide", "1", "-o", "g.el") == 0
    meta = json.loads((tmp_path / "g.json").read_text())
    assert len(meta["roles"]) == 10
    (tmp_path / "k2.el").write_text("2 1\n0 1\n")
    assert run(tmp_path, monkeypatch, "product", "strong", "k2.el", "k2.el", "-o", "k4.el") == 0
    assert (tmp_path / "k4.el").read_text().startswith("4 6")
    assert run(tmp_path, monkeypatch, "export", "dot", "k4.el", "-o", "k4.dot") == 0
    assert "0 -- 1;" in (tmp_path / "k4.dot").read_text()
    assert run(tmp_path, monkeypatch, "check", "lemma5", "--height", "2", "--exhaustive", "-o", "l5.csv") == 0
    rows = (tmp_path / "l5.csv").read_text().splitlines()
    assert rows[0] == "size,depth,bound" and len(rows) == 64
    assert run(tmp_path, monkeypatch, "oracle", "sweep", "--lemma", "7", "--samples", "200", "-o", "s.json") == 0
    assert json.loads((tmp_path / "s.json").read_text())["ok"]
    assert run(tmp_path, monkeypatch, "oracle", "min-c", "k2.el") == 0


def test_suite_subset(tmp_path, monkeypatch, capsys):
    assert run(tmp_path, monkeypatch, "suite", "paper-checks", "--only", "1,9", "--height", "8") == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 2
