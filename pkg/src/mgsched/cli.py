"""Command-line front end.

Commands::

    mgsched validate  FILE            structural + liveness report
    mgsched analyze   FILE            throughput, k, p, critical cycles, SCCs
    mgsched expand    FILE            latency expansion
    mgsched equalize  FILE            insert places bounding delay backlogs
    mgsched close     FILE            feedback paths to strong connectivity
    mgsched schedule  FILE            full pipeline, schedule report
    mgsched simulate  FILE            ASAP token game + detected recurrence

Exit codes: 0 success, 1 domain rejection (invalid, not live, not
schedulable), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import GraphFormatError, MgError
from .graph import (
    DEFAULT_CYCLE_CAP,
    MarkedGraph,
    graph_to_json,
    load_graph,
    scc_decomposition,
    throughput,
    validate,
)
from .render import graph_to_dot, report_to_dot, report_to_json, report_to_text, trace_to_text
from .scheduler import compute_k_p, schedule
from .simulator import replay_schedule, run_asap
from .transform import ProvenanceMap, close_graph, equalize, expand_latencies

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _apply_flags(g: MarkedGraph, args) -> tuple[MarkedGraph, ProvenanceMap]:
    provenance = ProvenanceMap.identity(g)
    if getattr(args, "close", False):
        g, prov = close_graph(g, args.cycle_cap)
        provenance = provenance.compose(prov)
    if getattr(args, "expand", False):
        g, prov = expand_latencies(g)
        provenance = provenance.compose(prov)
    if getattr(args, "equalize", False):
        g, prov = equalize(g, args.cycle_cap)
        provenance = provenance.compose(prov)
    return g, provenance


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_graph(args, g: MarkedGraph, provenance: ProvenanceMap) -> None:
    if args.format == "dot":
        _emit(args, graph_to_dot(g, provenance=provenance))
    else:
        _emit(args, graph_to_json(g))


def cmd_validate(args) -> int:
    report = validate(load_graph(args.file))
    _emit(args, report.summary())
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_analyze(args) -> int:
    g, _ = _apply_flags(load_graph(args.file), args)
    rate, critical = throughput(g, args.cycle_cap)
    k, p = compute_k_p(g, args.cycle_cap)
    lines = [f"throughput {rate}, k={k}, p={p}"]
    for c in critical:
        lines.append(f"critical cycle (M={c.tokens}, L={len(c)}): {' -> '.join(c.places)}")
    decomposition = scc_decomposition(g)
    lines.append(
        f"{len(decomposition.components)} strongly connected component(s), "
        f"{len(decomposition.dac_places)} connecting place(s)"
    )
    if g.is_plain:
        equalized, _ = equalize(g, args.cycle_cap)
        if equalized == g:
            lines.append("already equalized")
        else:
            extra = len(equalized.places) - len(g.places)
            lines.append(f"equalization would insert {extra} place(s)")
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_transform(args) -> int:
    g = load_graph(args.file)
    if args.command == "expand":
        out, prov = expand_latencies(g)
    elif args.command == "equalize":
        out, prov = equalize(g, args.cycle_cap)
    else:
        out, prov = close_graph(g, args.cycle_cap)
    _emit_graph(args, out, prov)
    return EXIT_OK


def cmd_schedule(args) -> int:
    g = load_graph(args.file)
    report = schedule(
        g,
        seed_transition=args.seed_transition,
        cap=args.cycle_cap,
        horizon=args.horizon,
        raw=args.raw,
    )
    if args.format == "dot":
        _emit(args, report_to_dot(report))
    elif args.format == "json":
        _emit(args, report_to_json(report))
    else:
        _emit(args, report_to_text(report))
    if args.verify:
        replay_schedule(
            report.graph, report.graph.initial_marking(), report, periods=3
        )
        print("verified: schedule replays on the token game", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    g, _ = _apply_flags(load_graph(args.file), args)
    trace, certificate = run_asap(g, horizon=args.horizon)
    body = trace_to_text(trace)
    summary = (
        f"recurrence: initialization={certificate.start} "
        f"k={certificate.periodicity} p={certificate.period}"
    )
    _emit(args, body + ("\n" if body else "") + summary)
    if args.verbose:
        for t, bits in trace.activity_words().items():
            print(f"{t}: {bits}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgsched",
        description="Balanced static scheduling of marked graphs.",
    )
    parser.add_argument("--version", action="version", version=f"mgsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, transforms=False):
        p.add_argument("file", help="graph document (JSON)")
        p.add_argument("--format", choices=["text", "json", "dot"], default="text")
        p.add_argument("-o", "--output", help="write result to a file")
        p.add_argument("--cycle-cap", type=int, default=DEFAULT_CYCLE_CAP)
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("-v", "--verbose", action="store_true")
        if transforms:
            p.add_argument("--close", action="store_true", help="add feedback paths first")
            p.add_argument("--expand", action="store_true", help="expand latencies first")
            p.add_argument("--equalize", action="store_true", help="equalize first")

    common(sub.add_parser("validate", help="check structure and liveness"))
    common(sub.add_parser("analyze", help="throughput and periodicity"), transforms=True)
    common(sub.add_parser("expand", help="latency expansion"))
    common(sub.add_parser("equalize", help="insert delay-bounding places"))
    common(sub.add_parser("close", help="feedback paths to strong connectivity"))
    sched = sub.add_parser("schedule", help="run the full pipeline")
    common(sched)
    sched.add_argument("--raw", action="store_true", help="skip close/expand/equalize")
    sched.add_argument("--verify", action="store_true", help="replay on the token game")
    sched.add_argument("--seed-transition", default=None)
    common(sub.add_parser("simulate", help="ASAP token game"), transforms=True)
    return parser


_HANDLERS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "expand": cmd_transform,
    "equalize": cmd_transform,
    "close": cmd_transform,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
