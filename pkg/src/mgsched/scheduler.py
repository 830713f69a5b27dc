"""Computation of the balanced ASAP execution of a marked graph.

Pipeline, for a live strongly connected plain equalized graph with
throughput at most 1:

1. periodicity k and period p from GCDs over the critical cycles;
2. the latest delay distribution D, measured on an ASAP run and pushed
   forward until every transition keeps a zero-delay input;
3. one balanced steady word per transition, propagated from a seed by
   rotations of spin ``1 - D(place) * alpha``;
4. the steady-orbit marking each periodic step starts from;
5. a guided initial execution bridging the input marking onto the
   steady orbit, minimizing the number of firings;
6. place sizes (1 or 2) from the delay distribution alone.

:func:`schedule` wires the preliminary rewrites (closure, latency
expansion, equalization) in front and assembles a
:class:`ScheduleReport`.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping

from .errors import (
    InconsistentPropagation,
    InfeasibleInitialization,
    InternalError,
    NotSchedulable,
    NotStronglyConnected,
)
from .graph import DEFAULT_CYCLE_CAP, MarkedGraph, throughput, validate
from .simulator import firable, measure_delays, run_asap, run_guided
from .transform import ProvenanceMap, close_graph, equalize, expand_latencies
from .words import BinaryWord, PeriodicSchedule, alpha, mechanical_word, rotate

__all__ = [
    "ScheduleReport",
    "compute_k_p",
    "compute_delay_distribution",
    "compute_steady_schedules",
    "compute_periodic_marking",
    "compute_initial_execution",
    "compute_place_sizes",
    "schedule",
]


def compute_k_p(g: MarkedGraph, cap: int = DEFAULT_CYCLE_CAP) -> tuple[int, int]:
    """Periodicity and period: GCDs of critical-cycle markings and lengths.

    Every elementary cycle of the critical subgraph is itself critical,
    so the GCDs run over the critical cycles found by the throughput
    computation.  k/p reduces to the throughput but is generally not in
    lowest terms.
    """
    rate, critical = throughput(g, cap)
    k = 0
    p = 0
    for c in critical:
        k = gcd(k, c.tokens)
        p = gcd(p, len(c))
    if Fraction(k, p) != rate:
        raise InternalError(f"GCD pair ({k}, {p}) does not reduce to {rate}")
    return k, p


def _forward_to_latest(
    g: MarkedGraph, delays: dict[str, int], k: int
) -> dict[str, int]:
    """Push delays downstream until every transition has a zero-delay input.

    Moving the common slack of a transition's inputs onto its outputs
    preserves every cycle sum; the fixpoint is the unique latest
    position.  The pass bound is generous: delays can only travel to the
    critical cycle's frontier.
    """
    result = dict(delays)
    max_passes = len(g.places) * max(k, 1) + 8
    for _ in range(max_passes):
        moved = False
        for t in g.transition_ids:
            inputs = g.inputs_of[t]
            if not inputs:
                continue
            slack = min(result[p] for p in inputs)
            if slack > 0:
                moved = True
                for p in inputs:
                    result[p] -= slack
                for p in g.outputs_of[t]:
                    result[p] += slack
        if not moved:
            return result
    raise InternalError("delay forwarding did not converge")


def compute_delay_distribution(
    g: MarkedGraph,
    k: int | None = None,
    p: int | None = None,
    cap: int = DEFAULT_CYCLE_CAP,
    horizon: int | None = None,
) -> dict[str, int]:
    """The latest delay distribution over one (k, p) period.

    Measured on an ASAP run from the initial marking, forwarded to the
    latest position, then rescaled from the detected minimal recurrence
    window to the (k, p) window.  Mutually reachable start markings
    yield the same result.
    """
    if k is None or p is None:
        k, p = compute_k_p(g, cap)
    trace, certificate = run_asap(g, horizon=horizon)
    measured = measure_delays(trace, certificate)
    latest = _forward_to_latest(g, measured, k)
    scale = Fraction(p, certificate.period)
    distribution = {}
    for pid, count in latest.items():
        scaled = count * scale
        if scaled.denominator != 1:
            raise InternalError(
                f"delay count {count} on {pid} does not rescale from window "
                f"{certificate.period} to period {p}"
            )
        distribution[pid] = int(scaled)
    return distribution


def _primitive_parameters(k: int, p: int) -> tuple[int, int, int, int]:
    """(k', p', r, alpha') with r = gcd(k, p) and alpha' of the primitive pair.

    For the degenerate everything-fires case p' = 1 the alpha value is
    unused (every rotation of the single-letter word is itself); 0 is
    returned as a placeholder.
    """
    r = gcd(k, p)
    k_prim, p_prim = k // r, p // r
    a = alpha(k_prim, p_prim).alpha if p_prim > 1 else 0
    return k_prim, p_prim, r, a


def compute_steady_schedules(
    g: MarkedGraph,
    delays: Mapping[str, int],
    k: int,
    p: int,
    seed_transition: str | None = None,
    _traversal: str = "bfs",
) -> dict[str, BinaryWord]:
    """Assign one balanced steady word of length p to every transition.

    The seed transition receives the mechanical word of the primitive
    pair; each successor across a place carrying D delays receives the
    predecessor's word rotated by ``1 - D * alpha``.  Delay counts scale
    to the primitive period first (they are always multiples of
    gcd(k, p) at the latest position).  Reconvergent assignments are
    checked, turning the consistency lemma into a runtime assertion.
    """
    k_prim, p_prim, r, a = _primitive_parameters(k, p)
    seed = min(g.transition_ids) if seed_transition is None else seed_transition
    if seed not in g.transition_by_id:
        raise ValueError(f"unknown seed transition {seed!r}")

    def primitive_delay(pid: str) -> int:
        d = delays[pid]
        if d % r:
            raise InconsistentPropagation(
                f"delay count {d} on {pid} is not a multiple of gcd(k,p)={r}"
            )
        return d // r

    words: dict[str, BinaryWord] = {seed: mechanical_word(k_prim, p_prim)}
    pending = [seed]
    while pending:
        current = pending.pop(0 if _traversal == "bfs" else -1)
        for pid in g.outputs_of[current]:
            successor = g.place_by_id[pid].consumer
            spin = 1 - primitive_delay(pid) * a
            candidate = rotate(words[current], spin)
            known = words.get(successor)
            if known is None:
                words[successor] = candidate
                pending.append(successor)
            elif known != candidate:
                raise InconsistentPropagation(
                    f"transition {successor!r} receives {candidate.bits} via "
                    f"{pid!r} but already holds {known.bits}"
                )
    unassigned = set(g.transition_ids) - set(words)
    if unassigned:
        raise InconsistentPropagation(
            f"unreachable transitions (graph not strongly connected?): "
            f"{', '.join(sorted(unassigned))}"
        )
    return {t: w.times(r) for t, w in words.items()}


def compute_periodic_marking(
    g: MarkedGraph, steady: Mapping[str, BinaryWord], p: int
) -> dict[str, int]:
    """The marking the steady execution starts from (and returns to).

    A place holds the token its producer emitted at the last instant of
    the period, plus one more when the place is currently delaying a
    token, which happens exactly when the consumer's word is above the
    rotated producer's word.
    """
    marking = {}
    for place in g.places:
        u = steady[place.producer]
        v = steady[place.consumer]
        marking[place.id] = u.at(p) + (1 if rotate(u, 1) < v else 0)
    return marking


def _solve_firing_counts(
    g: MarkedGraph, m0: Mapping[str, int], target: Mapping[str, int]
) -> dict[str, int] | None:
    """Minimal firing counts turning m0 into target, or None.

    The constraints fix differences along every place, so the solution
    is unique up to one additive constant on a connected graph; shifting
    the minimum to zero minimizes the total.  Returns None when a place
    equation fails, i.e. the two markings differ on some cycle sum.
    """
    counts: dict[str, int] = {min(g.transition_ids): 0}
    pending = [min(g.transition_ids)]
    neighbours: dict[str, list[tuple[str, int]]] = {t: [] for t in g.transition_ids}
    for place in g.places:
        diff = target[place.id] - m0[place.id]
        # counts[producer] - counts[consumer] = diff
        neighbours[place.producer].append((place.consumer, -diff))
        neighbours[place.consumer].append((place.producer, diff))
    while pending:
        current = pending.pop()
        for other, delta in neighbours[current]:
            value = counts[current] + delta
            if other not in counts:
                counts[other] = value
                pending.append(other)
            elif counts[other] != value:
                return None
    if len(counts) != len(g.transition_ids):
        return None  # disconnected
    shift = min(counts.values())
    return {t: c - shift for t, c in counts.items()}


def _capped_asap(
    g: MarkedGraph,
    m0: Mapping[str, int],
    budgets: Mapping[str, int],
    room: Mapping[str, int] | None = None,
) -> list[frozenset[str]]:
    """Fire every budgeted firable transition per step until budgets drain.

    When ``room`` gives per-place occupancy targets, producers whose
    firing would overshoot them are deferred as long as some progress
    remains possible; the full set fires otherwise, so termination never
    depends on the room heuristic.
    """
    marking = dict(m0)
    remaining = dict(budgets)
    firing_sets: list[frozenset[str]] = []
    total = sum(remaining.values())
    for _ in range(total + 1):
        if all(v == 0 for v in remaining.values()):
            return firing_sets
        eligible = {
            t for t in firable(g, marking) if remaining[t] > 0
        }
        if not eligible:
            raise InfeasibleInitialization(
                "initialization stalled with firings left; cycle sums differ?"
            )
        chosen = set(eligible)
        if room is not None:
            while True:
                overshoot = None
                for place in g.places:
                    level = (
                        marking[place.id]
                        + (1 if place.producer in chosen else 0)
                        - (1 if place.consumer in chosen else 0)
                    )
                    if level > room[place.id] and place.producer in chosen:
                        overshoot = place.producer
                        break
                if overshoot is None:
                    break
                chosen.discard(overshoot)
                if not chosen:
                    chosen = set(eligible)  # progress beats the room heuristic
                    break
        for t in chosen:
            remaining[t] -= 1
        marking = {
            p.id: marking[p.id]
            + (1 if p.producer in chosen else 0)
            - (1 if p.consumer in chosen else 0)
            for p in g.places
        }
        firing_sets.append(frozenset(chosen))
    raise InternalError("capped ASAP exceeded its firing budget")


def compute_initial_execution(
    g: MarkedGraph,
    m0: Mapping[str, int],
    target: Mapping[str, int],
    room: Mapping[str, int] | None = None,
) -> list[frozenset[str]]:
    """A guided execution from m0 ending exactly at target.

    Solves the firing-count system, then simulates a capped ASAP run
    where each transition fires its count.  Raises
    :class:`InfeasibleInitialization` when the markings disagree on some
    cycle sum.
    """
    counts = _solve_firing_counts(g, m0, target)
    if counts is None:
        raise InfeasibleInitialization(
            "target marking is not reachable: cycle token sums differ"
        )
    return _capped_asap(g, m0, counts, room)


def compute_place_sizes(
    g: MarkedGraph, delays: Mapping[str, int], k: int, p: int
) -> dict[str, int]:
    """Required size of every place: 1 when D(p) <= p - k, else 2.

    With fewer delays than p - k per period, the delayed firings land on
    ones followed by zeros, so a delayed token is never joined by the
    next one; beyond that bound the place must hold two tokens at least
    once per period.
    """
    return {pid: 1 if delays[pid] <= p - k else 2 for pid in g.place_ids}


@dataclass(frozen=True)
class ScheduleReport:
    """Everything the pipeline computed for one input graph.

    ``graph`` is the closed, expanded, equalized plain graph the numbers
    refer to; ``provenance`` maps its elements back to the user's ids.
    ``schedules`` assigns each transition its ultimately periodic
    activity word, starting from the input marking; replaying them on
    the token game reproduces the steady orbit exactly.
    """

    source_graph: MarkedGraph
    graph: MarkedGraph
    provenance: ProvenanceMap
    k: int
    p: int
    alpha: int
    schedules: dict[str, PeriodicSchedule]
    m_periodic: dict[str, int]
    delays: dict[str, int]
    sizes: dict[str, int]

    @property
    def initial_length(self) -> int:
        return len(next(iter(self.schedules.values())).initial) if self.schedules else 0

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.p)


def _assemble_schedules(
    g: MarkedGraph,
    steady: Mapping[str, BinaryWord],
    firing_sets: list[frozenset[str]],
    phase: int,
) -> dict[str, PeriodicSchedule]:
    init_len = len(firing_sets)
    schedules = {}
    for t in g.transition_ids:
        initial = "".join(
            "1" if t in fired else "0" for fired in firing_sets
        )
        schedules[t] = PeriodicSchedule(
            BinaryWord(initial), rotate(steady[t], -phase)
        )
    return schedules


def schedule(
    g: MarkedGraph,
    seed_transition: str | None = None,
    cap: int = DEFAULT_CYCLE_CAP,
    horizon: int | None = None,
    raw: bool = False,
) -> ScheduleReport:
    """Full pipeline: rewrites, then the seven scheduling steps.

    A simply connected input is closed with feedback paths first; then
    latencies expand and the graph is equalized (``raw=True`` skips all
    three and requires a plain equalized strongly connected input).
    Inputs whose throughput exceeds 1 are rejected: at most one firing
    per transition per instant fits the execution model.

    The initial part bridges the input marking onto whichever steady
    orbit marking minimizes the number of firings; when the input
    marking already lies on the orbit the initial part is empty.
    """
    prepared = g
    provenance = ProvenanceMap.identity(g)
    if raw:
        connectivity = validate(g).connectivity
        if connectivity != "strongly_connected":
            raise NotStronglyConnected(
                f"graph is {connectivity}; raw scheduling needs a strongly "
                "connected input (add feedback paths with the close step)"
            )
    else:
        prepared, prov_close = close_graph(prepared, cap)
        prepared, prov_expand = expand_latencies(prepared)
        prepared, prov_equal = equalize(prepared, cap)
        provenance = prov_close.compose(prov_expand).compose(prov_equal)

    k, p = compute_k_p(prepared, cap)
    if k > p:
        raise NotSchedulable(
            f"throughput {Fraction(k, p)} exceeds 1; at most one firing per "
            "instant is supported"
        )
    _, p_prim, r, a = _primitive_parameters(k, p)
    delays = compute_delay_distribution(prepared, k, p, cap, horizon)
    if seed_transition is not None:
        seed_transition = _resolve_seed(prepared, provenance, seed_transition)
    steady = compute_steady_schedules(prepared, delays, k, p, seed_transition)
    m0 = prepared.initial_marking()
    sizes = compute_place_sizes(prepared, delays, k, p)

    # The steady execution visits p' distinct markings; target the one
    # reachable with the fewest firings (zero when m0 is already on the
    # orbit), then shift all steady words onto that phase.
    best: tuple[int, int, dict[str, int], dict[str, int]] | None = None
    for phase in range(p_prim):
        rotated = {t: rotate(w, -phase) for t, w in steady.items()}
        candidate = compute_periodic_marking(prepared, rotated, p)
        counts = _solve_firing_counts(prepared, m0, candidate)
        if counts is None:
            continue
        cost = sum(counts.values())
        if best is None or cost < best[0]:
            best = (cost, phase, candidate, counts)
    if best is None:
        raise InfeasibleInitialization(
            "no steady-orbit marking is reachable from the initial marking"
        )
    cost, phase, m_periodic, counts = best
    firing_sets = _capped_asap(prepared, m0, counts, sizes)

    final = run_guided(prepared, m0, firing_sets).marking_at(len(firing_sets))
    if final != m_periodic:
        raise InternalError("initial execution missed the periodic marking")
    shifted = {t: rotate(w, -phase) for t, w in steady.items()}
    expected_first = {t for t in prepared.transition_ids if shifted[t].at(1) == 1}
    if firable(prepared, m_periodic) != expected_first:
        raise InternalError(
            "periodic marking does not enable exactly the first steady step"
        )

    return ScheduleReport(
        source_graph=g,
        graph=prepared,
        provenance=provenance,
        k=k,
        p=p,
        alpha=a,
        schedules=_assemble_schedules(prepared, steady, firing_sets, phase),
        m_periodic=m_periodic,
        delays=delays,
        sizes=sizes,
    )


def _resolve_seed(
    g: MarkedGraph, provenance: ProvenanceMap, requested: str
) -> str:
    """Accept either a pipeline-graph id or a user id for the seed."""
    if requested in g.transition_by_id:
        return requested
    matches = sorted(
        t
        for t in g.transition_ids
        if provenance.origin_of(t) == requested
    )
    if not matches:
        raise ValueError(f"unknown seed transition {requested!r}")
    return matches[0]
