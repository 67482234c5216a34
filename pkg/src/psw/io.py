"""File formats: edge lists, partition/layering/embedding JSON, certificates.

Every writer goes through ``atomic_write`` so an interrupted run never
leaves a half-written artifact behind.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError
from .graph import Graph, build_graph
from .partitions import HPartition, Layering, ProductEmbedding


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def write_json(path, obj) -> None:
    atomic_write(path, dumps_json(obj))


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


# -- edge lists -------------------------------------------------------------------

def format_edge_list(g: Graph) -> str:
    e = g.edge_array()
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in e.tolist())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str, source: str = "<edge list>") -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise FormatError(f"{source}: first line must be 'n m'")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64).reshape(-1, 2)
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from exc
    if edges.shape[0] != m:
        raise FormatError(f"{source}: header announces {m} edges, found {edges.shape[0]}")
    return build_graph(n, edges)


def write_edge_list(path, g: Graph) -> None:
    atomic_write(path, format_edge_list(g))


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read(), str(path))


# -- partitions -------------------------------------------------------------------

def _inline_graph(g: Graph) -> dict:
    return {"n": g.n, "edges": g.edge_array().tolist()}


def _graph_from_ref(ref, base: Path) -> Graph:
    if isinstance(ref, str):
        return read_edge_list(base / ref)
    if isinstance(ref, dict) and "n" in ref:
        return build_graph(int(ref["n"]), ref.get("edges", []))
    raise FormatError("host must be an inline {'n', 'edges'} object or an edge-list path")


def partition_to_json(p: HPartition, host_ref: str | None = None) -> dict:
    return {"host": host_ref if host_ref is not None else _inline_graph(p.host),
            "parts": {str(x): p.members(x).tolist() for x in range(p.host.n)}}


def partition_from_json(d: dict, n: int, base: Path = Path(".")) -> HPartition:
    if "parts" not in d or "host" not in d:
        raise FormatError("partition file needs 'host' and 'parts'")
    host = _graph_from_ref(d["host"], base)
    try:
        parts = {int(x): members for x, members in d["parts"].items()}
    except (AttributeError, ValueError) as exc:
        raise FormatError("'parts' must map host vertex ids to vertex lists") from exc
    return HPartition.from_parts(host, parts, n)


def read_partition(path, n: int) -> HPartition:
    path = Path(path)
    return partition_from_json(read_json(path), n, path.parent)


def layering_to_json(lay: Layering) -> dict:
    return {"layers": [lay.members(k).tolist() for k in range(lay.layer_count)]}


def layering_from_json(d: dict, n: int) -> Layering:
    if "layers" not in d:
        raise FormatError("layering file needs 'layers'")
    return Layering.from_layers(d["layers"], n)


def read_layering(path, n: int) -> Layering:
    return layering_from_json(read_json(path), n)


# -- embeddings -------------------------------------------------------------------

def embedding_to_json(e: ProductEmbedding) -> dict:
    return {"h_factor": _inline_graph(e.factor_h), "path_positions": e.factor_p_length,
            "clique_size": e.clique_size, "map": e.coords.tolist()}


def embedding_from_json(d: dict, subject: Graph, base: Path = Path(".")) -> ProductEmbedding:
    try:
        return ProductEmbedding(subject, _graph_from_ref(d["h_factor"], base), int(d["path_positions"]),
                                int(d["clique_size"]), np.array(d["map"], dtype=np.int64))
    except KeyError as exc:
        raise FormatError(f"embedding file lacks {exc}") from exc
