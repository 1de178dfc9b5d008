"""Command-line driver: ``homlab <command> ...``; run with ``--help`` for details."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .cfi import build_cfi, build_nice_planar, check_nice, twist_isomorphism
from .equiv import faben_jerrum_reduce, wl_refine
from .graph import Graph, as_graph, graph_to_dict, is_planar, named_graph, read_graph
from .groups import FiniteAbelianGroup
from .homcount import find_distinguisher, hom_count_brute, hom_count_cfi, hom_count_tw
from .imgame import play_transcript, solve_game_tiny, validate_transcript
from .treedec import exact_tree_decomposition, treewidth
from .verify import CRITERIA, Context, Row, lookup, run_criterion

COLUMNS = ("id", "instance", "expected", "actual", "status", "millis")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input and output helpers


def load_graph(arg: str):
    """A file (JSON or edge list) or a graph name such as ``k4`` or ``c6``."""
    if os.path.exists(arg):
        with open(arg) as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            d = json.loads(text)
            if "meta" in d:
                return _cfi_from_meta(d["meta"])
        return read_graph(text)
    try:
        return named_graph(arg)
    except ValueError:
        raise UsageError(f"{arg!r} is neither a file nor a graph name") from None


def _cfi_from_meta(meta: dict):
    from .graph import graph_from_dict

    gamma = FiniteAbelianGroup(tuple(meta["gamma"]))
    base = graph_from_dict(meta["base"])
    u = {int(k): tuple(v) for k, v in meta["U"].items()}
    return build_cfi(gamma, base, u)


def _plain(x) -> Graph:
    return x.graph if hasattr(x, "u_vector") else as_graph(x)


def parse_u(text: str | None, gamma: FiniteAbelianGroup, base: Graph):
    """Comma-separated entries, one per base vertex; ``:`` separates residues in multi-factor groups."""
    if not text:
        return None
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != base.n:
        raise UsageError(f"--u needs {base.n} entries, got {len(parts)}")
    vals = []
    for p in parts:
        res = tuple(int(x) for x in p.split(":"))
        vals.append(res if len(res) > 1 else res[0])
    return [gamma.element(v) for v in vals]


def emit(obj, args) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    _write(text, args)


def _write(text: str, args) -> None:
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_rows(rows: list[Row], args) -> None:
    rows = sorted(rows, key=lambda r: (r.id, r.instance))
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            d = r.to_dict()
            w.writerow(["" if d[c] is None else d[c] for c in COLUMNS])
        _write(buf.getvalue(), args)
    else:
        emit([r.to_dict() for r in rows], args)


# ---------------------------------------------------------------------------
# commands


def cmd_cfi(args) -> int:
    if args.action == "nice":
        w = build_nice_planar(args.n)
        res = check_nice(w.graph, w.witness_vertex, *w.params)
        emit({"graph": graph_to_dict(w.graph), "witness_vertex": w.witness_vertex,
              "params": list(w.params), "leaves": list(w.leaves),
              "planar": is_planar(w.graph), "nice": res.status}, args)
        return 0 if res and is_planar(w.graph) else 1
    gamma = FiniteAbelianGroup.parse(args.gamma)
    base = load_graph(args.base)
    base = _plain(base)
    u = parse_u(args.u, gamma, base)
    cfi = build_cfi(gamma, base, u)
    if args.action == "build":
        emit(cfi.to_dict(), args)
        return 0
    try:
        a, b = (int(x) for x in args.edge.split("-"))
    except (AttributeError, ValueError):
        raise UsageError("--edge must look like 0-1") from None
    perm, target = twist_isomorphism(cfi, (a, b), gamma.element(args.j))
    emit({"source_U": {str(k): list(v) for k, v in cfi.u_vector.items()},
          "target_U": {str(k): list(v) for k, v in target.u_vector.items()},
          "map": perm, "verified": True, "target": target.to_dict()}, args)
    return 0


def cmd_hom(args) -> int:
    if args.action == "count":
        f = _plain(load_graph(args.pattern))
        target = load_graph(args.target)
        g = _plain(target)
        rows = []
        counts = {}
        for method in args.method.split(","):
            if method == "brute":
                counts[method] = hom_count_brute(f, g, args.mod)
            elif method == "cfi":
                if not hasattr(target, "u_vector"):
                    raise UsageError("method cfi needs a CFI graph JSON as target")
                c = hom_count_cfi(f, target)
                counts[method] = c % args.mod if args.mod else c
            elif method == "tw":
                td = exact_tree_decomposition(f, treewidth(f))
                counts[method] = hom_count_tw(f, td, g, args.mod)
            else:
                raise UsageError(f"unknown method {method!r}")
        agree = len(set(counts.values())) == 1
        for method, c in counts.items():
            rows.append(Row("hom-count", f"method={method}", "all methods agree", str(c),
                            "pass" if agree else "fail"))
        emit_rows(rows, args)
        return 0 if agree else 1
    g = _plain(load_graph(args.first))
    h = _plain(load_graph(args.second))
    f = find_distinguisher(g, h, args.family, args.max_size, args.mod, args.k)
    if f is None:
        emit({"witness": None, "searched": f"connected {args.family} graphs up to {args.max_size} vertices"}, args)
        return 1
    emit({"witness": graph_to_dict(f), "hom_first": hom_count_brute(f, g, args.mod),
          "hom_second": hom_count_brute(f, h, args.mod)}, args)
    return 0


def cmd_verify(args) -> int:
    if args.id == "all":
        chosen = list(CRITERIA)
    else:
        try:
            chosen = [lookup(args.id)]
        except KeyError:
            raise UsageError(f"unknown check id {args.id!r}; known: all, "
                             + ", ".join(c.name for c in CRITERIA)) from None
    ctx = Context(seed=args.seed, timing=args.timing, p=args.p, k=args.k)
    rows: list[Row] = []
    ok = True
    for c in chosen:
        rep = run_criterion(c, ctx)
        rows.extend(rep.rows)
        ok = ok and rep.passed
    emit_rows(rows, args)
    return 0 if ok else 1


def cmd_game(args) -> int:
    if args.action == "validate-transcript":
        with open(args.transcript) as fh:
            rep = validate_transcript(fh.read())
        emit(rep.to_dict(), args)
        return 0 if rep.legal else 1
    a = _plain(load_graph(args.first))
    b = _plain(load_graph(args.second))
    primes = tuple(int(x) for x in args.primes.split(","))
    if args.action == "record":
        emit(play_transcript(a, b, args.k, primes, args.rounds, args.seed), args)
        return 0
    v = solve_game_tiny(a, b, args.k, 1, primes, args.rounds, seed=args.seed)
    emit({"verdict": v.verdict, "rounds": v.rounds, "complete": v.complete, "note": v.note}, args)
    return 0


def cmd_wl(args) -> int:
    g = _plain(load_graph(args.first))
    h = _plain(load_graph(args.second))
    res = wl_refine(g, h, args.k)
    emit({"verdict": res.verdict, "rounds": res.rounds, "k": args.k}, args)
    return 0


def cmd_reduce(args) -> int:
    g = _plain(load_graph(args.graph))
    emit(graph_to_dict(faben_jerrum_reduce(g, args.p, args.seed)), args)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized searches")
    common.add_argument("--out", help="write output to this file")
    common.add_argument("--csv", action="store_true", help="CSV instead of JSON for report rows")

    ap = argparse.ArgumentParser(prog="homlab", description="CFI graphs, homomorphism counts and logics.")
    sub = ap.add_subparsers(dest="command", required=True)

    cfi = sub.add_parser("cfi", help="build CFI graphs, twist them, generate nice planar bases")
    csub = cfi.add_subparsers(dest="action", required=True)
    for name in ("build", "twist"):
        p = csub.add_parser(name, parents=[common])
        p.add_argument("--gamma", default="2", help="group, e.g. 2, 4 or 2x2")
        p.add_argument("--base", default="k3", help="base graph file or name")
        p.add_argument("--u", help="twist vector, e.g. 1,0,0 (use a:b for product groups)")
        if name == "twist":
            p.add_argument("--edge", required=True, help="base edge u-v")
            p.add_argument("--j", type=int, default=1, help="group element moved along the edge")
    p = csub.add_parser("nice", parents=[common])
    p.add_argument("--n", type=int, default=1)

    hom = sub.add_parser("hom", help="count homomorphisms or search for a distinguishing pattern")
    hsub = hom.add_subparsers(dest="action", required=True)
    p = hsub.add_parser("count", parents=[common])
    p.add_argument("pattern")
    p.add_argument("target")
    p.add_argument("--method", default="brute", help="comma-separated: brute, cfi, tw")
    p.add_argument("--mod", type=int)
    p = hsub.add_parser("distinguish", parents=[common])
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--family", default="all", choices=("all", "planar", "tw"))
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--mod", type=int)
    p.add_argument("--k", type=int, help="width bound for --family tw")

    p = sub.add_parser("verify", parents=[common], help="run a verification check ('all' for every check)")
    p.add_argument("id")
    p.add_argument("--p", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--timing", action="store_true", help="fill the millis column")

    game = sub.add_parser("game", help="invertible-map game tools")
    gsub = game.add_subparsers(dest="action", required=True)
    p = gsub.add_parser("validate-transcript", parents=[common])
    p.add_argument("transcript")
    for name in ("solve-tiny", "record"):
        p = gsub.add_parser(name, parents=[common])
        p.add_argument("first")
        p.add_argument("second")
        p.add_argument("--k", type=int, default=3)
        p.add_argument("--primes", default="2")
        p.add_argument("--rounds", type=int, default=5 if name == "solve-tiny" else 3)

    p = sub.add_parser("wl", parents=[common], help="Weisfeiler-Leman comparison")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--k", type=int, default=1)

    p = sub.add_parser("reduce", parents=[common], help="Faben-Jerrum reduction")
    p.add_argument("graph")
    p.add_argument("--p", type=int, required=True)
    return ap


COMMANDS = {"cfi": cmd_cfi, "hom": cmd_hom, "verify": cmd_verify, "game": cmd_game,
            "wl": cmd_wl, "reduce": cmd_reduce}


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"homlab: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"homlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
