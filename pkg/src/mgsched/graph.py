"""Marked-graph data model and structural analysis.

A marked graph is a conflict-free Petri net: every place has exactly one
producer and one consumer transition, which the :class:`Place` record
guarantees by construction.  Transitions may carry a computation latency
(instants a token is held inside the transition) and places a
communication latency (instants a token needs to traverse the place,
at least 1).  A graph is *plain* when all computation latencies are 0
and all communication latencies are 1.

The analyses here are exact: cycle ratios are :class:`fractions.Fraction`
values, never floats, so criticality ties are decided exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Mapping

import networkx as nx

from .errors import (
    CycleLimitExceeded,
    GraphFormatError,
    NotLive,
    NotStronglyConnected,
)

__all__ = [
    "Transition",
    "Place",
    "MarkedGraph",
    "Cycle",
    "ValidationReport",
    "SccDecomposition",
    "DEFAULT_CYCLE_CAP",
    "validate",
    "elementary_cycles",
    "throughput",
    "scc_decomposition",
    "graph_from_json",
    "graph_to_json",
    "load_graph",
]

DEFAULT_CYCLE_CAP = 100_000


@dataclass(frozen=True)
class Transition:
    """A transition with its computation latency (instants, >= 0)."""

    id: str
    latency: int = 0

    def __post_init__(self):
        if not self.id:
            raise GraphFormatError("transition id must be a nonempty string")
        if self.latency < 0:
            raise GraphFormatError(
                f"transition {self.id!r}: computation latency must be >= 0"
            )


@dataclass(frozen=True)
class Place:
    """A place with its single producer and consumer and its marking.

    The communication latency is at least 1: a token always spends one
    instant traversing a plain place.
    """

    id: str
    producer: str
    consumer: str
    tokens: int = 0
    latency: int = 1

    def __post_init__(self):
        if not self.id:
            raise GraphFormatError("place id must be a nonempty string")
        if self.tokens < 0:
            raise GraphFormatError(f"place {self.id!r}: tokens must be >= 0")
        if self.latency < 1:
            raise GraphFormatError(
                f"place {self.id!r}: communication latency must be >= 1"
            )


@dataclass(frozen=True)
class MarkedGraph:
    """An immutable marked graph; safe to share across threads.

    Transitions and places are kept sorted by id.  Arcs are implicit:
    each place carries one arc from its producer and one to its
    consumer.
    """

    transitions: tuple[Transition, ...]
    places: tuple[Place, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "transitions", tuple(sorted(self.transitions, key=lambda t: t.id))
        )
        object.__setattr__(
            self, "places", tuple(sorted(self.places, key=lambda p: p.id))
        )
        seen: set[str] = set()
        for element in self.transitions + self.places:
            if element.id in seen:
                raise GraphFormatError(f"duplicate id {element.id!r}")
            seen.add(element.id)
        tids = {t.id for t in self.transitions}
        for p in self.places:
            for end in (p.producer, p.consumer):
                if end not in tids:
                    raise GraphFormatError(
                        f"place {p.id!r} references unknown transition {end!r}"
                    )

    @classmethod
    def build(
        cls,
        transitions: Iterable[tuple[str, int] | str],
        places: Iterable[tuple[str, str, str, int] | tuple[str, str, str, int, int]],
    ) -> "MarkedGraph":
        """Convenience constructor from plain tuples.

        ``transitions`` holds ids or (id, latency) pairs; ``places``
        holds (id, from, to, tokens) or (id, from, to, tokens, latency).
        """
        ts = [
            Transition(t) if isinstance(t, str) else Transition(t[0], t[1])
            for t in transitions
        ]
        ps = [Place(p[0], p[1], p[2], p[3], p[4] if len(p) > 4 else 1) for p in places]
        return cls(tuple(ts), tuple(ps))

    @cached_property
    def transition_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.transitions)

    @cached_property
    def place_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.places)

    @cached_property
    def place_by_id(self) -> Mapping[str, Place]:
        return {p.id: p for p in self.places}

    @cached_property
    def transition_by_id(self) -> Mapping[str, Transition]:
        return {t.id: t for t in self.transitions}

    @cached_property
    def inputs_of(self) -> Mapping[str, tuple[str, ...]]:
        """Place ids feeding each transition."""
        ins: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        for p in self.places:
            ins[p.consumer].append(p.id)
        return {t: tuple(v) for t, v in ins.items()}

    @cached_property
    def outputs_of(self) -> Mapping[str, tuple[str, ...]]:
        """Place ids produced by each transition."""
        outs: dict[str, list[str]] = {t.id: [] for t in self.transitions}
        for p in self.places:
            outs[p.producer].append(p.id)
        return {t: tuple(v) for t, v in outs.items()}

    @cached_property
    def sources(self) -> tuple[str, ...]:
        return tuple(t for t in self.transition_ids if not self.inputs_of[t])

    @cached_property
    def sinks(self) -> tuple[str, ...]:
        return tuple(t for t in self.transition_ids if not self.outputs_of[t])

    @property
    def is_plain(self) -> bool:
        return all(t.latency == 0 for t in self.transitions) and all(
            p.latency == 1 for p in self.places
        )

    @property
    def is_closed(self) -> bool:
        return not self.sources and not self.sinks

    def initial_marking(self) -> dict[str, int]:
        return {p.id: p.tokens for p in self.places}

    def total_tokens(self) -> int:
        return sum(p.tokens for p in self.places)

    def with_marking(self, marking: Mapping[str, int]) -> "MarkedGraph":
        """Copy of the graph whose initial marking is ``marking``."""
        places = tuple(
            Place(p.id, p.producer, p.consumer, marking[p.id], p.latency)
            for p in self.places
        )
        return MarkedGraph(self.transitions, places)

    def transition_digraph(self) -> "nx.DiGraph":
        g = nx.DiGraph()
        g.add_nodes_from(self.transition_ids)
        g.add_edges_from((p.producer, p.consumer) for p in self.places)
        return g


@dataclass(frozen=True)
class Cycle:
    """An elementary cycle, stored as its ordered tuple of place ids.

    The tuple is canonicalized to start at the smallest place id.
    ``length`` counts places; ``weighted_length`` adds communication and
    computation latencies, which is what throughput compares so that the
    ratio survives latency expansion unchanged.
    """

    places: tuple[str, ...]
    tokens: int
    weighted_length: int

    @property
    def length(self) -> int:
        return len(self.places)

    def __len__(self) -> int:
        return len(self.places)

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.tokens, self.weighted_length)


def _make_cycle(g: MarkedGraph, place_ids: tuple[str, ...]) -> Cycle:
    smallest = min(range(len(place_ids)), key=lambda i: place_ids[i])
    canon = place_ids[smallest:] + place_ids[:smallest]
    tokens = sum(g.place_by_id[p].tokens for p in canon)
    weight = sum(g.place_by_id[p].latency for p in canon) + sum(
        g.transition_by_id[g.place_by_id[p].consumer].latency for p in canon
    )
    return Cycle(canon, tokens, weight)


def _iter_elementary_cycles(g: MarkedGraph) -> Iterator[tuple[str, ...]]:
    """Yield elementary cycles as place-id tuples (uncanonicalized).

    Node-level simple cycles come from networkx (Johnson's algorithm);
    parallel places between the same pair of transitions are expanded as
    a cartesian product per hop.
    """
    arcs: dict[tuple[str, str], list[str]] = {}
    for p in g.places:
        arcs.setdefault((p.producer, p.consumer), []).append(p.id)
    for hops in arcs.values():
        hops.sort()
    for node_cycle in nx.simple_cycles(g.transition_digraph()):
        hops = [
            arcs[(node_cycle[i], node_cycle[(i + 1) % len(node_cycle)])]
            for i in range(len(node_cycle))
        ]
        for combo in product(*hops):
            yield tuple(combo)


def elementary_cycles(g: MarkedGraph, cap: int = DEFAULT_CYCLE_CAP) -> list[Cycle]:
    """All elementary cycles, deterministically ordered.

    Raises :class:`CycleLimitExceeded` past ``cap`` cycles; enumeration
    is exponential in general, so the cap turns pathological inputs into
    a clean resource error.
    """
    cycles = []
    for place_ids in _iter_elementary_cycles(g):
        cycles.append(_make_cycle(g, place_ids))
        if len(cycles) > cap:
            raise CycleLimitExceeded(cap)
    cycles.sort(key=lambda c: c.places)
    return cycles


def _dead_cycle_witnesses(g: MarkedGraph, limit: int = 32) -> list[tuple[str, ...]]:
    """Representative token-free cycles (liveness violations).

    A cycle with zero tokens exists exactly when the subgraph of
    zero-token places has a cycle, so this never needs the full
    enumeration.
    """
    zero = nx.DiGraph()
    zero.add_nodes_from(g.transition_ids)
    key_of = {}
    for p in g.places:
        if p.tokens == 0 and (p.producer, p.consumer) not in key_of:
            zero.add_edge(p.producer, p.consumer)
            key_of[(p.producer, p.consumer)] = p.id
    witnesses = []
    for node_cycle in nx.simple_cycles(zero):
        arc_pairs = [
            (node_cycle[i], node_cycle[(i + 1) % len(node_cycle)])
            for i in range(len(node_cycle))
        ]
        places = tuple(key_of[pair] for pair in arc_pairs)
        smallest = min(range(len(places)), key=lambda i: places[i])
        witnesses.append(places[smallest:] + places[:smallest])
        if len(witnesses) >= limit:
            break
    witnesses.sort()
    return witnesses


@dataclass(frozen=True)
class ValidationReport:
    """Findings of :func:`validate`; carries problems instead of raising."""

    violations: tuple[str, ...]
    dead_cycles: tuple[tuple[str, ...], ...]
    connectivity: str  # "strongly_connected" | "simply_connected" | "disconnected"
    sources: tuple[str, ...]
    sinks: tuple[str, ...]

    @property
    def is_structurally_valid(self) -> bool:
        return not self.violations

    @property
    def is_live(self) -> bool:
        return not self.dead_cycles

    @property
    def is_closed(self) -> bool:
        return not self.sources and not self.sinks

    @property
    def ok(self) -> bool:
        return self.is_structurally_valid and self.is_live

    def summary(self) -> str:
        lines = []
        status = "valid" if self.is_structurally_valid else "INVALID"
        live = "live" if self.is_live else "NOT LIVE"
        closed = "closed" if self.is_closed else "open"
        lines.append(f"{status}, {live}, {self.connectivity}, {closed}")
        for v in self.violations:
            lines.append(f"violation: {v}")
        for c in self.dead_cycles:
            lines.append(f"dead cycle (no token): {' -> '.join(c)}")
        if self.sources:
            lines.append(f"sources: {', '.join(self.sources)}")
        if self.sinks:
            lines.append(f"sinks: {', '.join(self.sinks)}")
        return "\n".join(lines)


def validate(g: MarkedGraph) -> ValidationReport:
    """Structural and liveness validation; never raises on bad graphs.

    One-producer/one-consumer is already guaranteed by construction, so
    the report focuses on emptiness, liveness (every cycle marked) and
    connectivity class.
    """
    violations = []
    if not g.transitions:
        violations.append("graph has no transitions")
    dead = tuple(_dead_cycle_witnesses(g)) if g.transitions else ()
    if not g.transitions:
        connectivity = "disconnected"
    else:
        digraph = g.transition_digraph()
        if nx.is_strongly_connected(digraph):
            connectivity = "strongly_connected"
        elif nx.is_weakly_connected(digraph):
            connectivity = "simply_connected"
        else:
            connectivity = "disconnected"
    return ValidationReport(
        violations=tuple(violations),
        dead_cycles=dead,
        connectivity=connectivity,
        sources=g.sources,
        sinks=g.sinks,
    )


def throughput(
    g: MarkedGraph, cap: int = DEFAULT_CYCLE_CAP
) -> tuple[Fraction, list[Cycle]]:
    """Exact throughput and the critical cycles attaining it.

    The throughput is the minimum over elementary cycles of
    tokens / weighted length; it equals the maximal steady execution
    rate of the graph.  Requires a live, strongly connected graph.
    """
    report = validate(g)
    if report.connectivity != "strongly_connected":
        raise NotStronglyConnected(f"graph is {report.connectivity}")
    if not report.is_live:
        raise NotLive(
            "token-free cycle: " + " -> ".join(report.dead_cycles[0])
        )
    cycles = elementary_cycles(g, cap)
    best = min(c.ratio for c in cycles)
    critical = [c for c in cycles if c.ratio == best]
    return best, critical


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components plus the places connecting them."""

    components: tuple[MarkedGraph, ...]
    dac_places: tuple[str, ...]


def scc_decomposition(g: MarkedGraph) -> SccDecomposition:
    """Partition transitions into SCCs; internal places follow them.

    Components are ordered topologically (producers before consumers of
    the connecting places), ties broken by smallest transition id.
    """
    digraph = g.transition_digraph()
    condensation = nx.condensation(digraph)
    # Topological order with deterministic ties: generation depth, then
    # smallest member id.
    depth = {}
    for n in nx.topological_sort(condensation):
        preds = list(condensation.predecessors(n))
        depth[n] = 1 + max((depth[q] for q in preds), default=-1)
    order = sorted(
        condensation.nodes,
        key=lambda n: (depth[n], min(condensation.nodes[n]["members"])),
    )
    components = []
    member_sets = []
    for n in order:
        members = set(condensation.nodes[n]["members"])
        member_sets.append(members)
        ts = tuple(t for t in g.transitions if t.id in members)
        ps = tuple(
            p for p in g.places if p.producer in members and p.consumer in members
        )
        components.append(MarkedGraph(ts, ps))
    internal = {p.id for comp in components for p in comp.places}
    dac = tuple(p.id for p in g.places if p.id not in internal)
    return SccDecomposition(tuple(components), dac)


# ---------------------------------------------------------------------------
# Graph document format
#
# A single JSON document with two arrays:
#   transitions: [ { "id": ..., "latency": 0? } ]
#   places:      [ { "id": ..., "from": ..., "to": ..., "tokens": ..., "latency": 1? } ]
# Unknown fields are rejected; ids must be unique across both namespaces.
# ---------------------------------------------------------------------------

_TRANSITION_FIELDS = {"id", "latency"}
_PLACE_FIELDS = {"id", "from", "to", "tokens", "latency"}


def _require_fields(entry: dict, allowed: set[str], required: set[str], what: str):
    if not isinstance(entry, dict):
        raise GraphFormatError(f"{what} entry must be an object, got {entry!r}")
    unknown = set(entry) - allowed
    if unknown:
        raise GraphFormatError(
            f"{what} entry has unknown field(s) {sorted(unknown)}: {entry!r}"
        )
    missing = required - set(entry)
    if missing:
        raise GraphFormatError(
            f"{what} entry missing field(s) {sorted(missing)}: {entry!r}"
        )


def _check_int(value, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise GraphFormatError(f"{what} must be an integer, got {value!r}")
    return value


def graph_from_json(text: str) -> MarkedGraph:
    """Parse the graph document format.

    :class:`GraphFormatError` diagnostics carry line information for
    syntactically malformed documents.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(
            f"malformed document at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict) or set(doc) - {"transitions", "places"}:
        raise GraphFormatError(
            "document must be an object with 'transitions' and 'places' arrays"
        )
    transitions = []
    for entry in doc.get("transitions", []):
        _require_fields(entry, _TRANSITION_FIELDS, {"id"}, "transition")
        if not isinstance(entry["id"], str):
            raise GraphFormatError(f"transition id must be a string: {entry!r}")
        transitions.append(
            Transition(entry["id"], _check_int(entry.get("latency", 0), "latency"))
        )
    places = []
    for entry in doc.get("places", []):
        _require_fields(entry, _PLACE_FIELDS, {"id", "from", "to", "tokens"}, "place")
        if not all(isinstance(entry[k], str) for k in ("id", "from", "to")):
            raise GraphFormatError(f"place id/from/to must be strings: {entry!r}")
        places.append(
            Place(
                entry["id"],
                entry["from"],
                entry["to"],
                _check_int(entry["tokens"], "tokens"),
                _check_int(entry.get("latency", 1), "latency"),
            )
        )
    return MarkedGraph(tuple(transitions), tuple(places))


def graph_to_json(g: MarkedGraph, indent: int = 2) -> str:
    """Serialize to the document format; parsing this back is identity."""
    doc = {
        "transitions": [
            {"id": t.id, **({"latency": t.latency} if t.latency else {})}
            for t in g.transitions
        ],
        "places": [
            {
                "id": p.id,
                "from": p.producer,
                "to": p.consumer,
                "tokens": p.tokens,
                **({"latency": p.latency} if p.latency != 1 else {}),
            }
            for p in g.places
        ],
    }
    return json.dumps(doc, indent=indent)


def load_graph(path) -> MarkedGraph:
    """Read a graph document from a file path."""
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_json(fh.read())
