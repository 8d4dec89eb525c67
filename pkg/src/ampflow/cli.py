"""Command-line front end: compile -> simulate -> reconstruct -> diagnose.

Every subcommand exits 0 on success and nonzero with an ``error:`` line on
stderr for invalid input. All randomness flows from ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .compiler import compile_netlist, generative_graph_of_netlist
from .errors import AmpflowError
from .fault import diagnose
from .graphs import DirectedGraph, MixedGraph, directed_from_dot
from .model import (
    MODEL_SCHEMA,
    TimeSeriesSet,
    generative_graph,
    ldim_from_dict,
    load_ldim,
    save_ldim,
    simulate,
)
from .netlist import NETLIST_SCHEMA, load_netlist, netlist_from_dict
from .pc import PcConfig, reconstruct
from .spectral import WelchParams, WsepConfig


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("band must be 'lo:hi' fractions of Nyquist")
    if not 0.0 < lo < hi < 1.0:
        raise argparse.ArgumentTypeError("band fractions must satisfy 0 < lo < hi < 1")
    return lo, hi


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ampflow",
        description="Influence-flow modeling and reconstruction of amplifier networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a netlist JSON into a model JSON")
    p.add_argument("netlist", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="model JSON path")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="simulate a model's noise-driven voltages to CSV")
    p.add_argument("model", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="CSV path")
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=_positive_int, default=1)
    p.add_argument("--burn-in", type=int, default=None, help="override automatic burn-in")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="bound on worker threads (never changes results)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct the influence graph from CSV data")
    p.add_argument("data", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True,
                   help="output prefix; writes <prefix>.dot and <prefix>.json")
    p.add_argument("--rho", type=float, default=0.05, help="separation threshold")
    p.add_argument("--band", type=_band, default=(0.05, 0.6),
                   help="averaging band lo:hi as fractions of Nyquist")
    p.add_argument("--segment", type=_positive_int, default=1024)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--window", choices=("hann", "hamming", "rect"), default="hann")
    p.add_argument("--ridge", type=float, default=1e-8)
    p.add_argument("--max-cond", type=int, default=None)
    p.add_argument("--meek", action="store_true", help="apply the full Meek closure")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("diagnose", help="compare a reference graph against a reconstruction")
    p.add_argument("reference", type=Path,
                   help="netlist JSON, model JSON, or DOT file with the reference graph")
    p.add_argument("reconstruction", type=Path, help="JSON log from 'reconstruct'")
    p.add_argument("--mode", choices=("skeleton", "directed"), default="skeleton")
    p.add_argument("-o", "--output", type=Path, default=None, help="also write report JSON")
    p.set_defaults(func=cmd_diagnose)

    return parser


def cmd_compile(args) -> int:
    nl = load_netlist(args.netlist)
    model = compile_netlist(nl)
    save_ldim(model, args.output)
    entries = len(model.transfers)
    print(f"compiled {len(nl.stages)} stages over {len(nl.nodes)} nodes; "
          f"{entries} transfer entries -> {args.output}")
    return 0


def cmd_simulate(args) -> int:
    model = load_ldim(args.model)
    ts = simulate(model, args.samples, args.seed, burn_in=args.burn_in, workers=args.threads)
    ts.to_csv(args.output)
    print(f"simulated {ts.n_samples} samples x {len(ts.channels)} channels -> {args.output}")
    return 0


def cmd_reconstruct(args) -> int:
    ts = TimeSeriesSet.from_csv(args.data)
    lo, hi = args.band
    cfg = PcConfig(
        max_cond=args.max_cond,
        wsep=WsepConfig(rho=args.rho, band=(lo * math.pi, hi * math.pi), ridge=args.ridge),
        welch=WelchParams(segment=args.segment, overlap=args.overlap, window=args.window),
        meek=args.meek,
    )
    result = reconstruct(ts, cfg)
    dot_path = args.output.with_suffix(".dot")
    json_path = args.output.with_suffix(".json")
    dot_path.write_text(result.graph.to_dot(), encoding="utf-8")
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    directed = len(result.graph.directed_edges)
    undirected = len(result.graph.undirected_edges)
    print(f"reconstructed {directed} directed + {undirected} undirected edges "
          f"from {len(result.queries)} separation queries -> {dot_path}, {json_path}")
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def _load_reference(path: Path) -> DirectedGraph:
    text = path.read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("digraph"):
        return directed_from_dot(text)
    obj = json.loads(text)
    schema = obj.get("schema") if isinstance(obj, dict) else None
    if schema == NETLIST_SCHEMA:
        return generative_graph_of_netlist(netlist_from_dict(obj))
    if schema == MODEL_SCHEMA:
        return generative_graph(ldim_from_dict(obj))
    raise AmpflowError(
        f"{path}: reference must be a DOT file, a {NETLIST_SCHEMA} netlist, "
        f"or a {MODEL_SCHEMA} model"
    )


def _load_reconstruction(path: Path) -> MixedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    graph = obj.get("graph") if isinstance(obj, dict) else None
    if not isinstance(graph, dict):
        raise AmpflowError(f"{path}: missing 'graph' object (expected a reconstruction log)")
    return MixedGraph(
        graph["vertices"],
        [tuple(e) for e in graph.get("directed", [])],
        [tuple(e) for e in graph.get("undirected", [])],
    )


def cmd_diagnose(args) -> int:
    reference = _load_reference(args.reference)
    observed = _load_reconstruction(args.reconstruction)
    report = diagnose(reference, observed, mode=args.mode)
    sys.stdout.write(report.to_text())
    if args.output is not None:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AmpflowError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
