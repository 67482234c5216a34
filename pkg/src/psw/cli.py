"""Command line entry point ``psw``.

Exit status: 0 success, 1 validation failure or refuted claim, 2 usage or
input-format error, 3 witness extraction stopped at a failing inequality.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import io
from .audit import audit_certificate
from .constructions import build_leftmost_path_partition, outerplanarity_check_small, treewidth_at_most_2
from .errors import FormatError, PSWError
from .oracle import ROW_HEADERS, exhaustive_lemma_sweep, min_product_c
from .partitions import (
    embedding_violations,
    max_cell,
    partition_width,
    partitions_to_embedding,
    strong_product,
    validate_hpartition,
    validate_layering,
)
from .suite import run_battery
from .trees import DEFAULT_VERTEX_BUDGET, build_gh, build_subdivided_grid
from .witness import WitnessCertificate, WitnessConfig, extract_witness, lower_bound_report

OK, FAILED, USAGE, INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _say(obj) -> None:
    if isinstance(obj, str):
        print(obj)
    else:
        print(json.dumps(obj, sort_keys=True, indent=1))


def _load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    out = {}
    with open(path) as fh:
        for num, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"--config {path}:{num}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value.strip('"')
    return out


# -- generate ------------------------------------------------------------------

def _parse_divisions(spec: str):
    """``N`` for every horizontal edge, or ``i:j=k,i:j=k`` per edge."""
    if "=" not in spec:
        try:
            return int(spec)
        except ValueError:
            raise UsageError(f"--divide {spec!r}: expected a count or i:j=k pairs") from None
    out = {}
    for item in spec.split(","):
        try:
            key, count = item.split("=")
            i, j = key.split(":")
            out[(int(i), int(j))] = int(count)
        except ValueError:
            raise UsageError(f"--divide: cannot parse {item!r}, expected i:j=k") from None
    return out


def cmd_generate(a) -> int:
    if a.kind == "gh":
        if a.height is None:
            raise UsageError("generate gh needs --height")
        gh = build_gh(a.height, a.budget_vertices)
        io.write_edge_list(a.output, gh.graph)
        meta = {"kind": "gh", "h": a.height, "n": gh.n, "m": gh.graph.edge_count}
    else:
        if a.x is None or a.y is None:
            raise UsageError("generate grid needs --x and --y")
        sg = build_subdivided_grid(a.x, a.y, _parse_divisions(a.divide), a.budget_vertices)
        io.write_edge_list(a.output, sg.graph)
        roles = [["grid", i, j] for i in range(1, a.x + 1) for j in range(1, a.y + 1)]
        chains = {}
        for (i, j), chain in sorted(sg.subdivision_vertices.items()):
            chains[f"{i}:{j}"] = len(chain)
            roles.extend(["subdivision", i, j] for _ in chain)
        meta = {"kind": "grid", "x": a.x, "y": a.y, "divisions": chains, "roles": roles}
    io.write_json(_sidecar(a.output), meta)
    _say(f"wrote {a.output} and {_sidecar(a.output)}")
    return OK


def _sidecar(path: str) -> str:
    return str(Path(path).with_suffix(".json"))


# -- validate ------------------------------------------------------------------

def cmd_validate(a) -> int:
    g = io.read_edge_list(a.graph)
    if a.kind == "partition":
        p = io.read_partition(_need(a.file, "a partition file"), g.n)
        bad = validate_hpartition(g, p)
        _say({"valid": not bad, "violations": bad[:20], "width": partition_width(p), "parts": p.host.n})
    elif a.kind == "layering":
        lay = io.read_layering(_need(a.file, "a layering file"), g.n)
        bad = validate_layering(g, lay)
        _say({"valid": not bad, "violations": bad[:20], "width": partition_width(lay), "layers": lay.layer_count})
    else:
        if a.embedding:
            e = io.embedding_from_json(io.read_json(a.embedding), g, Path(a.embedding).parent)
        else:
            if not (a.partition and a.layering and a.c):
                raise UsageError("validate embedding needs --embedding, or --partition, --layering and --c")
            hp = io.read_partition(a.partition, g.n)
            lay = io.read_layering(a.layering, g.n)
            e = partitions_to_embedding(g, hp, lay, a.c)
            if a.output:
                io.write_json(a.output, io.embedding_to_json(e))
        bad = embedding_violations(e)
        _say({"valid": not bad, "violations": bad[:20], "clique_size": e.clique_size,
              "path_positions": e.factor_p_length, "h_vertices": e.factor_h.n})
    return FAILED if bad else OK


def _need(value, what: str):
    if value is None:
        raise UsageError(f"expected {what}")
    return value


# -- product -------------------------------------------------------------------

def cmd_product(a) -> int:
    g1, g2 = io.read_edge_list(a.first), io.read_edge_list(a.second)
    prod, _ = strong_product(g1, g2, a.budget_vertices)
    io.write_edge_list(a.output, prod)
    _say(f"wrote {a.output}: {prod.n} vertices, {prod.edge_count} edges (vertex (v, w) is v*{g2.n} + w)")
    return OK


# -- witness and audit -----------------------------------------------------------

def _relative(path: str, start: str) -> str:
    return os.path.relpath(os.path.abspath(path), os.path.dirname(os.path.abspath(start)))


def cmd_witness(a) -> int:
    meta = io.read_json(a.meta)
    if "h" not in meta:
        raise FormatError(f"{a.meta}: metadata lacks 'h'")
    gh = build_gh(int(meta["h"]), a.budget_vertices)
    g = io.read_edge_list(a.graph)
    if g.n != gh.n or not np.array_equal(g.edge_array(), gh.graph.edge_array()):
        _say(f"{a.graph} is not G_{meta['h']}")
        return FAILED
    tp = io.read_partition(a.tree_partition, gh.n)
    lay = io.read_layering(a.layering, gh.n)
    cfg = WitnessConfig(alpha=Fraction(a.alpha), c=a.c, rounds=a.rounds)
    paths = {"tree_partition_path": _relative(a.tree_partition, a.output),
             "layering_path": _relative(a.layering, a.output)}
    cert = extract_witness(gh, tp, lay, cfg, inputs=paths)
    io.atomic_write(a.output, cert.dumps())
    summary = {"branch": cert.branch, "c": cert.c, "final": cert.final, "infeasible": cert.infeasible}
    status = INFEASIBLE if cert.branch == "infeasible" else OK
    if a.claim:
        try:
            c, delta, tw = (int(v) for v in a.claim.split(","))
        except ValueError:
            raise UsageError("--claim expects c,delta,treewidth") from None
        report = lower_bound_report(cert, c, delta, tw)
        summary["claim"] = report
        if report["verdict"].startswith("claim refuted"):
            status = FAILED
    _say(summary)
    return status


def cmd_audit(a) -> int:
    d = io.read_json(a.certificate)
    WitnessCertificate.from_json(d)  # rejects files that are not certificates
    base = Path(a.certificate).parent
    inputs = d.get("inputs", {})
    tp_path = a.tree_partition or (base / inputs["tree_partition_path"] if "tree_partition_path" in inputs else None)
    lay_path = a.layering or (base / inputs["layering_path"] if "layering_path" in inputs else None)
    if tp_path is None or lay_path is None:
        raise UsageError("certificate does not name its inputs; pass --tree-partition and --layering")
    n = (1 << (int(d["h"]) + 1)) - 1
    rep = audit_certificate(d, io.read_partition(tp_path, n), io.read_layering(lay_path, n))
    _say({"ok": rep.ok, "checks": rep.checks, "failures": rep.failures[:20]})
    return OK if rep.ok else FAILED


# -- construct and check -----------------------------------------------------------

def cmd_construct(a) -> int:
    gh = build_gh(a.height, a.budget_vertices)
    hp, lay = build_leftmost_path_partition(gh)
    host_ref = None
    if a.host:
        io.write_edge_list(a.host, hp.host)
        host_ref = _relative(a.host, a.output)
    io.write_json(a.output, io.partition_to_json(hp, host_ref))
    if a.layering:
        io.write_json(a.layering, io.layering_to_json(lay))
    _say({"parts": hp.host.n, "host_edges": hp.host.edge_count, "max_cell": max_cell(hp, lay)[2]})
    return OK


def cmd_check(a) -> int:
    if a.kind in ("tw2", "outerplanar"):
        g = io.read_edge_list(_need(a.file, "an edge-list file"))
        if a.kind == "tw2":
            v = treewidth_at_most_2(g)
            _say({"treewidth_le_2": v.treewidth_le_2, "core": v.witness})
            return OK if v.treewidth_le_2 else FAILED
        v = outerplanarity_check_small(g, a.budget)
        _say({"outerplanar": v.outerplanar, "treewidth_le_2": v.treewidth_le_2, "witness": v.witness})
        return {True: OK, False: FAILED, None: USAGE}[v.outerplanar]
    lemma = {"lemma5": 5, "lemma6": 6, "grow": 11}[a.kind]
    if a.height is None and lemma != 11:
        raise UsageError(f"check {a.kind} needs --height")
    heights = [a.height] if a.height is not None else None
    rep = exhaustive_lemma_sweep(lemma, height=a.height or 3, exhaustive=a.exhaustive,
                                 samples=a.samples, seed=a.seed, heights=heights)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_HEADERS[lemma])
    w.writerows(rep.rows)
    if a.output:
        io.atomic_write(a.output, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    verdict = "pass" if rep.ok else "FAIL"
    print(f"{a.kind}: {rep.instances} inputs, {len(rep.failures)} failures, {verdict}", file=sys.stderr)
    return OK if rep.ok else FAILED


# -- oracle ----------------------------------------------------------------------

def cmd_oracle(a) -> int:
    if a.kind == "min-c":
        g = io.read_edge_list(_need(a.file, "an edge-list file"))
        res = min_product_c(g, a.tree_max, a.path_max)
        out = {"c": res.c, "tree_partition": io.partition_to_json(res.tree_partition),
               "layering": io.layering_to_json(res.layering)}
    else:
        if a.lemma is None:
            raise UsageError("oracle sweep needs --lemma")
        heights = [a.height] if a.height is not None and a.lemma in (9, 11) else None
        rep = exhaustive_lemma_sweep(a.lemma, height=a.height or 3, exhaustive=a.exhaustive,
                                     samples=a.samples, seed=a.seed, heights=heights, max_size=a.max_size)
        out = {"lemma": rep.lemma, "instances": rep.instances, "failures": rep.failures[:50],
               "stats": rep.stats, "ok": rep.ok}
    if a.output:
        io.write_json(a.output, out)
    _say(out)
    return OK if out.get("ok", True) else FAILED


# -- suite and export ------------------------------------------------------------

def cmd_suite(a) -> int:
    numbers = [int(v) for v in a.only.split(",")] if a.only else None
    results = run_battery(numbers, jobs=a.jobs, max_height=a.height, seed=a.seed)
    for r in results:
        print(r.line())
    if a.output:
        io.write_json(a.output, [{"criterion": r.number, "title": r.title, "passed": r.passed,
                                  "detail": r.detail} for r in results])
    return OK if all(r.passed for r in results) else FAILED


def cmd_export(a) -> int:
    g = io.read_edge_list(a.file)
    lines = ["graph G {"]
    lines.extend(f"  {v};" for v in range(g.n))
    lines.extend(f"  {u} -- {v};" for u, v in g.edges())
    lines.append("}")
    io.atomic_write(a.output, "\n".join(lines) + "\n")
    return OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with defaults for the flags below")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--budget-vertices", type=int, default=DEFAULT_VERTEX_BUDGET)

    p = argparse.ArgumentParser(prog="psw", description="Product-structure witnesses for the graphs G_h.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", parents=[common], help="write G_h or a subdivided grid")
    s.add_argument("kind", choices=["gh", "grid"])
    s.add_argument("--height", type=int)
    s.add_argument("--x", type=int)
    s.add_argument("--y", type=int)
    s.add_argument("--divide", default="0", help="count per horizontal edge, or i:j=k,...")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("validate", parents=[common], help="check a partition, layering or embedding")
    s.add_argument("kind", choices=["partition", "layering", "embedding"])
    s.add_argument("file", nargs="?")
    s.add_argument("--graph", required=True)
    s.add_argument("--embedding")
    s.add_argument("--partition")
    s.add_argument("--layering")
    s.add_argument("--c", type=int)
    s.add_argument("-o", "--output", help="write the embedding built from --partition/--layering")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("product", parents=[common], help="strong product of two edge lists")
    s.add_argument("kind", choices=["strong"])
    s.add_argument("first")
    s.add_argument("second")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_product)

    s = sub.add_parser("witness", parents=[common], help="extract a certified large cell")
    s.add_argument("--graph", required=True)
    s.add_argument("--meta", required=True)
    s.add_argument("--tree-partition", required=True)
    s.add_argument("--layering", required=True)
    s.add_argument("--c", type=int)
    s.add_argument("--alpha", default="1/5")
    s.add_argument("--rounds", choices=["strict", "adaptive"], default="strict")
    s.add_argument("--claim", help="c,delta,treewidth of a claimed product structure to test")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("audit", parents=[common], help="replay a certificate")
    s.add_argument("certificate")
    s.add_argument("--tree-partition")
    s.add_argument("--layering")
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("construct", parents=[common], help="chain partition of G_h with an outerplanar host")
    s.add_argument("kind", choices=["outerplanar"])
    s.add_argument("--height", type=int, required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--host")
    s.add_argument("--layering")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("check", parents=[common], help="structural checks and exhaustive or sampled sweeps")
    s.add_argument("kind", choices=["tw2", "outerplanar", "lemma5", "lemma6", "grow"])
    s.add_argument("file", nargs="?")
    s.add_argument("--budget", type=int, default=1024)
    s.add_argument("--height", type=int)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int, default=10_000)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("oracle", parents=[common], help="brute-force ground truth")
    s.add_argument("kind", choices=["min-c", "sweep"])
    s.add_argument("file", nargs="?")
    s.add_argument("--tree-max", type=int)
    s.add_argument("--path-max", type=int)
    s.add_argument("--lemma", type=int, choices=[5, 6, 7, 9, 11])
    s.add_argument("--height", type=int)
    s.add_argument("--max-size", type=int, default=6)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int, default=10_000)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("kind", choices=["paper-checks"])
    s.add_argument("--height", type=int, default=20)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_suite)

    s = sub.add_parser("export", parents=[common], help="export an edge list")
    s.add_argument("kind", choices=["dot"])
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_export)
    p.commands = sub.choices  # used to apply --config defaults per subcommand
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    conf = _load_config(args.config)
    if not conf:
        return args
    unknown = sorted(k for k in conf if not hasattr(args, k))
    if unknown:
        raise UsageError(f"--config: unknown keys {', '.join(unknown)}")
    # flags override the file: re-parse with the file values as defaults
    sub = parser.commands[args.command]
    converted = {}
    for action in sub._actions:
        if action.dest in conf:
            value = conf[action.dest]
            if action.type is not None:
                value = action.type(value)
            elif action.const is True:
                value = value.lower() in ("1", "true", "yes")
            converted[action.dest] = value
    sub.set_defaults(**converted)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as exc:  # argparse reports usage errors this way
        return int(exc.code or 0)
    except (UsageError, FormatError, FileNotFoundError) as exc:
        print(f"psw: error: {exc}", file=sys.stderr)
        return USAGE
    except PSWError as exc:
        print(f"psw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
