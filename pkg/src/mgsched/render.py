"""Text, JSON and DOT renderings of graphs, traces and reports.

Reports are keyed by the user's original ids; elements created by the
rewrites (expansion hops, equalization dummies, feedback places) are
listed in a separate appendix section and drawn dashed in DOT output.
"""

from __future__ import annotations

import json
from typing import Mapping

from .graph import MarkedGraph
from .scheduler import ScheduleReport
from .simulator import ExecutionTrace
from .transform import ProvenanceMap

__all__ = [
    "report_to_text",
    "report_to_json",
    "trace_to_text",
    "graph_to_dot",
    "report_to_dot",
]


def _representatives(report: ScheduleReport, elements, user_ids) -> dict[str, str]:
    """Pipeline element standing for each original id of one namespace.

    Elements that survived the rewrites represent themselves; an
    expanded element is represented by its first segment (where the
    original's tokens sit and where its activity starts).
    """
    prov = report.provenance
    chosen: dict[str, str] = {}
    for element in elements:
        entry = prov.entries[element]
        if entry.origin not in user_ids:
            continue
        if entry.kind == "original":
            chosen[entry.origin] = element
        elif entry.kind == "expansion" and entry.ordinal == 1:
            chosen.setdefault(entry.origin, element)
    return chosen


def _schedule_rows(report: ScheduleReport):
    reps = _representatives(
        report,
        report.graph.transition_ids,
        {t.id for t in report.source_graph.transitions},
    )
    main = [
        (origin, report.schedules[rep].render()) for origin, rep in sorted(reps.items())
    ]
    covered = set(reps.values())
    appendix = [
        (t, report.schedules[t].render())
        for t in report.graph.transition_ids
        if t not in covered
    ]
    return main, appendix


def _place_rows(report: ScheduleReport):
    reps = _representatives(
        report, report.graph.place_ids, {p.id for p in report.source_graph.places}
    )
    main = [
        (origin, report.delays[rep], report.sizes[rep], report.m_periodic[rep])
        for origin, rep in sorted(reps.items())
    ]
    covered = set(reps.values())
    appendix = [
        (pid, report.delays[pid], report.sizes[pid], report.m_periodic[pid])
        for pid in report.graph.place_ids
        if pid not in covered
    ]
    return main, appendix


def report_to_text(report: ScheduleReport) -> str:
    """Human-readable schedule report."""
    lines = [
        f"k={report.k} p={report.p} alpha={report.alpha} "
        f"rate={report.rate} initial_length={report.initial_length}",
        "",
        "transition schedules:",
    ]
    orig_t, synth_t = _schedule_rows(report)
    width = max((len(t) for t, _ in orig_t + synth_t), default=0)
    for t, sched in orig_t:
        lines.append(f"  {t:<{width}}  {sched}")
    lines.append("")
    lines.append("places (delays / size / periodic marking):")
    orig_p, synth_p = _place_rows(report)
    pwidth = max((len(p[0]) for p in orig_p + synth_p), default=0)
    for pid, d, size, tokens in orig_p:
        lines.append(f"  {pid:<{pwidth}}  D={d} size={size} M_periodic={tokens}")
    if synth_t or synth_p:
        lines.append("")
        lines.append("appendix: synthetic elements")
        for t, sched in synth_t:
            origin = report.provenance.origin_of(t) or "(closure)"
            lines.append(f"  {t:<{width}}  {sched}  [from {origin}]")
        for pid, d, size, tokens in synth_p:
            origin = report.provenance.origin_of(pid) or "(closure)"
            lines.append(
                f"  {pid:<{pwidth}}  D={d} size={size} M_periodic={tokens}  [from {origin}]"
            )
    return "\n".join(lines)


def report_to_json(report: ScheduleReport) -> str:
    """Structured schedule report."""
    doc = {
        "k": report.k,
        "p": report.p,
        "alpha": report.alpha,
        "rate": str(report.rate),
        "initial_length": report.initial_length,
        "transitions": {
            t: {
                "schedule": report.schedules[t].render(),
                "origin": report.provenance.origin_of(t),
                "synthetic": report.provenance.is_synthetic(t),
            }
            for t in report.graph.transition_ids
        },
        "places": {
            p: {
                "delays": report.delays[p],
                "size": report.sizes[p],
                "m_periodic": report.m_periodic[p],
                "origin": report.provenance.origin_of(p),
                "synthetic": report.provenance.is_synthetic(p),
            }
            for p in report.graph.place_ids
        },
        "provenance": [
            {"id": new, "origin": origin} for new, origin in report.provenance.table()
        ],
    }
    return json.dumps(doc, indent=2)


def trace_to_text(trace: ExecutionTrace) -> str:
    """Line-per-step dump: fired set and resulting marking."""
    lines = []
    for i, step in enumerate(trace.steps, start=1):
        fired = ",".join(sorted(step.fired))
        marking = ",".join(
            f"{p}:{step.marking[p]}" for p in trace.graph.place_ids if step.marking[p]
        )
        lines.append(f"step {i}: fired={{{fired}}} marking={{{marking}}}")
    return "\n".join(lines)


def _quote(identifier: str) -> str:
    return '"' + identifier.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(
    g: MarkedGraph,
    provenance: ProvenanceMap | None = None,
    schedules: Mapping[str, object] | None = None,
    delays: Mapping[str, int] | None = None,
    sizes: Mapping[str, int] | None = None,
) -> str:
    """Render the graph in DOT: boxed transitions, oval places.

    Synthetic elements (per the provenance map) are dashed; schedule,
    delay and size annotations land in the labels when provided.
    """
    lines = ["digraph marked_graph {", "  rankdir=LR;"]
    for t in g.transitions:
        label = t.id
        if t.latency:
            label += f"\\nL_cal={t.latency}"
        if schedules and t.id in schedules:
            label += f"\\n{schedules[t.id]}"
        style = "dashed" if provenance and provenance.is_synthetic(t.id) else "solid"
        lines.append(
            f"  {_quote(t.id)} [shape=box style={style} label={_quote(label)}];"
        )
    for p in g.places:
        label = f"{p.id}\\ntokens={p.tokens}"
        if p.latency != 1:
            label += f"\\nL_com={p.latency}"
        if delays is not None and delays.get(p.id):
            label += f"\\nD={delays[p.id]}"
        if sizes is not None:
            label += f"\\nsize={sizes[p.id]}"
        style = "dashed" if provenance and provenance.is_synthetic(p.id) else "solid"
        lines.append(
            f"  {_quote(p.id)} [shape=ellipse style={style} label={_quote(label)}];"
        )
        lines.append(f"  {_quote(p.producer)} -> {_quote(p.id)};")
        lines.append(f"  {_quote(p.id)} -> {_quote(p.consumer)};")
    lines.append("}")
    return "\n".join(lines)


def report_to_dot(report: ScheduleReport) -> str:
    """DOT rendering of the scheduled graph with schedule labels."""
    return graph_to_dot(
        report.graph.with_marking(report.m_periodic),
        provenance=report.provenance,
        schedules={t: s.render() for t, s in report.schedules.items()},
        delays=report.delays,
        sizes=report.sizes,
    )
