"""Graph rewrites that precede scheduling.

Three rewrites are provided:

* :func:`expand_latencies` turns latencies into chains of plain
  elements, making token positions explicit.
* :func:`equalize` inserts place/dummy-transition pairs until every
  place lies on a cycle whose delay budget per period is below the
  periodicity, which bounds per-place token accumulation.
* :func:`close_graph` adds feedback paths so a simply connected graph
  becomes strongly connected without lowering the worst throughput.

Each rewrite returns the new graph together with a
:class:`ProvenanceMap` tracing every element back to the user's ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .errors import InternalError, NotConnected, NotPlain
from .graph import (
    DEFAULT_CYCLE_CAP,
    MarkedGraph,
    Place,
    Transition,
    elementary_cycles,
    scc_decomposition,
    throughput,
    validate,
)

__all__ = ["ProvenanceEntry", "ProvenanceMap", "expand_latencies", "equalize", "close_graph"]


@dataclass(frozen=True)
class ProvenanceEntry:
    """Where a graph element came from.

    ``origin`` is a user-supplied id ("" for pure closure additions),
    ``ordinal`` numbers siblings created from the same origin, and
    ``kind`` is one of original, expansion, equalization, closure.
    """

    origin: str
    ordinal: int
    kind: str

    @property
    def synthetic(self) -> bool:
        return self.kind != "original"


class ProvenanceMap:
    """Total mapping from current element ids to their origins."""

    def __init__(self, entries: dict[str, ProvenanceEntry]):
        self.entries = dict(entries)

    @classmethod
    def identity(cls, g: MarkedGraph) -> "ProvenanceMap":
        return cls(
            {
                e: ProvenanceEntry(e, 0, "original")
                for e in g.transition_ids + g.place_ids
            }
        )

    def origin_of(self, element_id: str) -> str:
        return self.entries[element_id].origin

    def is_synthetic(self, element_id: str) -> bool:
        return self.entries[element_id].synthetic

    def compose(self, later: "ProvenanceMap") -> "ProvenanceMap":
        """Provenance of ``later`` applied after ``self``.

        Origins of elements that survived from the earlier graph resolve
        through the earlier map, so origins always land on user ids.
        """
        combined = {}
        for new_id, entry in later.entries.items():
            if entry.kind == "original" and entry.origin in self.entries:
                combined[new_id] = self.entries[entry.origin]
            elif entry.origin in self.entries and self.entries[entry.origin].synthetic:
                earlier = self.entries[entry.origin]
                combined[new_id] = ProvenanceEntry(
                    earlier.origin, entry.ordinal, entry.kind
                )
            else:
                combined[new_id] = entry
        return ProvenanceMap(combined)

    def table(self) -> list[tuple[str, str]]:
        """(new id, original id) rows, sorted by new id."""
        return sorted((new, e.origin) for new, e in self.entries.items())


def _fresh(base: str, used: set[str]) -> str:
    candidate = base
    while candidate in used:
        candidate += "+"
    used.add(candidate)
    return candidate


def expand_latencies(g: MarkedGraph) -> tuple[MarkedGraph, ProvenanceMap]:
    """Rewrite latencies into chains of plain places and transitions.

    A place of communication latency n becomes n places interleaved with
    n-1 forwarding transitions; a transition of computation latency m
    becomes m+1 transitions interleaved with m places.  Initial tokens
    of an expanded place sit in the first place of its chain, which
    preserves tokens per cycle (the quantity every later stage depends
    on).  Liveness, connectivity, throughput and cycle count are
    preserved.
    """
    if g.is_plain:
        return g, ProvenanceMap.identity(g)
    used = set(g.transition_ids + g.place_ids)
    entries: dict[str, ProvenanceEntry] = {}
    transitions: list[Transition] = []
    places: list[Place] = []
    # Where rewired places must attach for each original transition.
    entry_of: dict[str, str] = {}
    exit_of: dict[str, str] = {}

    for t in g.transitions:
        if t.latency == 0:
            transitions.append(Transition(t.id))
            entries[t.id] = ProvenanceEntry(t.id, 0, "original")
            entry_of[t.id] = exit_of[t.id] = t.id
            continue
        segment_ids = [_fresh(f"{t.id}#{i}", used) for i in range(1, t.latency + 2)]
        for i, sid in enumerate(segment_ids, start=1):
            transitions.append(Transition(sid))
            entries[sid] = ProvenanceEntry(t.id, i, "expansion")
        for i in range(t.latency):
            pid = _fresh(f"{t.id}#w{i + 1}", used)
            places.append(Place(pid, segment_ids[i], segment_ids[i + 1], 0))
            entries[pid] = ProvenanceEntry(t.id, i + 1, "expansion")
        entry_of[t.id] = segment_ids[0]
        exit_of[t.id] = segment_ids[-1]

    for p in g.places:
        producer = exit_of[p.producer]
        consumer = entry_of[p.consumer]
        if p.latency == 1:
            places.append(Place(p.id, producer, consumer, p.tokens))
            entries[p.id] = ProvenanceEntry(p.id, 0, "original")
            continue
        chain_places = [_fresh(f"{p.id}#{i}", used) for i in range(1, p.latency + 1)]
        hop_ids = [_fresh(f"{p.id}#f{i}", used) for i in range(1, p.latency)]
        for i, hid in enumerate(hop_ids, start=1):
            transitions.append(Transition(hid))
            entries[hid] = ProvenanceEntry(p.id, i, "expansion")
        endpoints = [producer] + hop_ids + [consumer]
        for i, pid in enumerate(chain_places):
            tokens = p.tokens if i == 0 else 0
            places.append(Place(pid, endpoints[i], endpoints[i + 1], tokens))
            entries[pid] = ProvenanceEntry(p.id, i + 1, "expansion")

    return MarkedGraph(tuple(transitions), tuple(places)), ProvenanceMap(entries)


def _insert_after(
    g: MarkedGraph,
    place_id: str,
    pairs: int,
    used: set[str],
    entries: dict[str, ProvenanceEntry],
    kind: str,
) -> MarkedGraph:
    """Insert ``pairs`` (dummy transition + place) pairs after a place."""
    target = g.place_by_id[place_id]
    transitions = list(g.transitions)
    places = [p for p in g.places if p.id != place_id]
    start = sum(1 for e in entries.values() if e.origin == place_id and e.synthetic)
    previous = place_id
    hop_source = None
    for i in range(pairs):
        tid = _fresh(f"{place_id}#d{start + i + 1}", used)
        pid = _fresh(f"{place_id}#e{start + i + 1}", used)
        transitions.append(Transition(tid))
        entries[tid] = ProvenanceEntry(place_id, start + i + 1, kind)
        if hop_source is None:
            places.append(Place(place_id, target.producer, tid, target.tokens))
        else:
            places.append(Place(previous, hop_source, tid, 0))
        previous = pid
        hop_source = tid
        entries[pid] = ProvenanceEntry(place_id, start + i + 1, kind)
    places.append(Place(previous, hop_source, target.consumer, 0))
    return MarkedGraph(tuple(transitions), tuple(places))


def equalize(
    g: MarkedGraph, cap: int = DEFAULT_CYCLE_CAP
) -> tuple[MarkedGraph, ProvenanceMap]:
    """Insert places until every place's fastest cycle is tight.

    A place is covered when it lies on a cycle c with
    ``M(c)/(L(c)+1) < throughput(G) <= M(c)/L(c)``; equivalently the
    cycle's delay budget ``M(c)*p - L(c)*k`` is below k.  Covered places
    never accumulate a delay backlog of k or more per period, which is
    what bounds place sizes at 2 downstream.

    Each repair step picks the smallest uncovered place and lengthens it
    by ``floor(n_min/k)`` dummy pairs, where n_min is the smallest delay
    budget among its cycles.  Every cycle through an uncovered place has
    budget at least n_min, so no cycle's ratio ever drops below the
    graph throughput: the throughput is preserved exactly, and already
    equalized graphs (every place covered) are returned unchanged.
    """
    if not g.is_plain:
        raise NotPlain("equalization requires a plain graph; expand latencies first")
    rate, _ = throughput(g, cap)
    k_hat, p_hat = rate.numerator, rate.denominator
    used = set(g.transition_ids + g.place_ids)
    entries = ProvenanceMap.identity(g).entries
    current = g
    guard = 0
    while True:
        guard += 1
        if guard > len(current.places) + len(g.places) + 2:
            raise InternalError("equalization did not converge")
        cycles = elementary_cycles(current, cap)
        budget_min: dict[str, int] = {}
        for c in cycles:
            budget = c.tokens * p_hat - len(c) * k_hat
            for pid in c.places:
                if pid not in budget_min or budget < budget_min[pid]:
                    budget_min[pid] = budget
        uncovered = sorted(
            pid for pid, budget in budget_min.items() if budget >= k_hat
        )
        if not uncovered:
            return current, ProvenanceMap(entries)
        target = uncovered[0]
        pairs = budget_min[target] // k_hat
        current = _insert_after(current, target, pairs, used, entries, "equalization")


def close_graph(
    g: MarkedGraph, cap: int = DEFAULT_CYCLE_CAP
) -> tuple[MarkedGraph, ProvenanceMap]:
    """Make a simply connected graph strongly connected via feedback.

    One feedback place is added per (terminal, initial) component pair
    of the condensation, from a sink transition (or smallest id) of the
    terminal component to a source transition (or smallest id) of the
    initial one.  Tokens on each feedback place start at 1 and are
    raised until every cycle through it runs at least as fast as the
    worst component throughput, so the original critical behaviour is
    untouched.  The result is closed (sources and sinks gain arcs).
    """
    report = validate(g)
    if report.connectivity == "strongly_connected":
        return g, ProvenanceMap.identity(g)
    if report.connectivity != "simply_connected":
        raise NotConnected(f"graph is {report.connectivity}")

    decomposition = scc_decomposition(g)
    rates = []
    for comp in decomposition.components:
        if comp.places:
            cycle_list = elementary_cycles(comp, cap)
            if cycle_list:
                rates.append(min(c.ratio for c in cycle_list))
    worst = min(rates) if rates else Fraction(1)

    members = [frozenset(c.transition_ids) for c in decomposition.components]
    has_in = {i: False for i in range(len(members))}
    has_out = {i: False for i in range(len(members))}
    comp_of = {t: i for i, ms in enumerate(members) for t in ms}
    for p in decomposition.dac_places:
        place = g.place_by_id[p]
        has_out[comp_of[place.producer]] = True
        has_in[comp_of[place.consumer]] = True
    initials = [i for i in range(len(members)) if not has_in[i]]
    terminals = [i for i in range(len(members)) if not has_out[i]]

    def representative(comp_index: int, prefer: tuple[str, ...]) -> str:
        candidates = sorted(members[comp_index] & set(prefer))
        return candidates[0] if candidates else min(members[comp_index])

    used = set(g.transition_ids + g.place_ids)
    entries = ProvenanceMap.identity(g).entries
    feedback: list[str] = []
    places = list(g.places)
    ordinal = 0
    for term in terminals:
        for init in initials:
            ordinal += 1
            src = representative(term, g.sinks)
            dst = representative(init, g.sources)
            pid = _fresh(f"fb#{ordinal}", used)
            places.append(Place(pid, src, dst, 1))
            entries[pid] = ProvenanceEntry("", ordinal, "closure")
            feedback.append(pid)

    closed = MarkedGraph(g.transitions, tuple(places))
    # Raise feedback tokens until no created cycle is slower than the
    # worst component; over-provisioning is safe, under-provisioning
    # would lower the schedulable rate.
    for _ in range(1 + sum(p.latency for p in closed.places)):
        deficits: dict[str, int] = {}
        for c in elementary_cycles(closed, cap):
            touched = [pid for pid in feedback if pid in c.places]
            if not touched or Fraction(c.tokens, c.weighted_length) >= worst:
                continue
            need = ceil(worst * c.weighted_length) - c.tokens
            first = touched[0]
            deficits[first] = max(deficits.get(first, 0), need)
        if not deficits:
            break
        marking = closed.initial_marking()
        for pid, extra in deficits.items():
            marking[pid] += extra
        closed = closed.with_marking(marking)
    else:
        raise InternalError("feedback token sizing did not converge")

    return closed, ProvenanceMap(entries)
