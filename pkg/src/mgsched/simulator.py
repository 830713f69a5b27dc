"""Executable token-game semantics for plain marked graphs.

Execution is synchronous: at every step a set of firable transitions
fires simultaneously, each at most once, and the marking updates by
``M'(p) = M(p) + fired(producer) - fired(consumer)``.  The ASAP policy
fires every firable transition; a guided execution fires a chosen
subset.

The simulator is the independent oracle for the scheduler: everything
the analytic pipeline computes is replayed here and checked step by
step against the token game.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import (
    HorizonExceeded,
    IllegalFiring,
    InternalError,
    NotClosed,
    NotLive,
    NotPlain,
    ScheduleInvalid,
)
from .graph import MarkedGraph

if TYPE_CHECKING:  # pragma: no cover
    from .scheduler import ScheduleReport

__all__ = [
    "Step",
    "ExecutionTrace",
    "PeriodicityCertificate",
    "firable",
    "step_asap",
    "step_guided",
    "run_asap",
    "run_guided",
    "measure_delays",
    "max_occupancy",
    "replay_schedule",
    "default_horizon",
]

Marking = Mapping[str, int]


def check_marking(g: MarkedGraph, m: Marking) -> None:
    if set(m) != set(g.place_ids):
        raise ValueError("marking domain differs from the graph's place set")
    if any(v < 0 for v in m.values()):
        raise ValueError("marking has negative token counts")


def firable(g: MarkedGraph, m: Marking) -> set[str]:
    """Transitions whose every input place holds a token.

    A source has no input places and is therefore always firable.
    """
    return {
        t for t in g.transition_ids if all(m[p] > 0 for p in g.inputs_of[t])
    }


def _apply(g: MarkedGraph, m: Marking, fired: frozenset[str]) -> dict[str, int]:
    new = dict(m)
    for t in fired:
        for p in g.outputs_of[t]:
            new[p] += 1
        for p in g.inputs_of[t]:
            new[p] -= 1
    return new


def step_asap(g: MarkedGraph, m: Marking) -> tuple[frozenset[str], dict[str, int]]:
    """One synchronous step firing every firable transition."""
    fired = frozenset(firable(g, m))
    return fired, _apply(g, m, fired)


def step_guided(g: MarkedGraph, m: Marking, ft: Iterable[str]) -> dict[str, int]:
    """One synchronous step firing exactly ``ft``; every member must be firable."""
    chosen = frozenset(ft)
    allowed = firable(g, m)
    illegal = chosen - allowed
    if illegal:
        raise IllegalFiring(f"not firable: {', '.join(sorted(illegal))}")
    return _apply(g, m, chosen)


@dataclass(frozen=True)
class Step:
    """One executed step: the fired set and the marking it produced."""

    fired: frozenset[str]
    marking: dict[str, int]


@dataclass(frozen=True)
class ExecutionTrace:
    """A finite execution: the start marking and the steps taken.

    ``marking_at(i)`` is the marking after i steps (the start marking at
    i = 0).  ``delay(p, i)`` counts the tokens sitting in p that step i
    did not consume: ``M_{i-1}(p) - fired_i(consumer of p)``.
    """

    graph: MarkedGraph
    initial_marking: dict[str, int]
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def marking_at(self, i: int) -> dict[str, int]:
        if i == 0:
            return self.initial_marking
        return self.steps[i - 1].marking

    def fired_at(self, i: int) -> frozenset[str]:
        return self.steps[i - 1].fired

    def delay(self, place_id: str, i: int) -> int:
        before = self.marking_at(i - 1)[place_id]
        consumer = self.graph.place_by_id[place_id].consumer
        return before - (1 if consumer in self.fired_at(i) else 0)

    def activity_words(self) -> dict[str, str]:
        """Per-transition 0/1 activity strings, comparable to schedules."""
        return {
            t: "".join("1" if t in s.fired else "0" for s in self.steps)
            for t in self.graph.transition_ids
        }


@dataclass(frozen=True)
class PeriodicityCertificate:
    """Detected recurrence of an ASAP run.

    ``start`` (the initialization length) is the first index whose
    marking recurs, ``period`` the minimal gap, and ``periodicity`` how
    many times each transition fires inside one period window.
    """

    start: int
    periodicity: int
    period: int


def default_horizon(g: MarkedGraph) -> int:
    """Step budget before giving up on finding a recurrence."""
    return min(1_000_000, 64 * (len(g.places) + 1) * (g.total_tokens() + 2))


def run_asap(
    g: MarkedGraph,
    m0: Marking | None = None,
    horizon: int | None = None,
) -> tuple[ExecutionTrace, PeriodicityCertificate]:
    """ASAP execution until the marking recurs.

    Requires a plain, closed graph.  The returned certificate carries
    the minimal recurrence: for a live strongly connected graph its
    periodicity/period ratio equals the throughput.  A marking that maps
    to itself with nothing fired means a dead cycle, reported as
    :class:`NotLive`; running out of budget raises
    :class:`HorizonExceeded`.
    """
    if not g.is_plain:
        raise NotPlain("simulation is defined on plain graphs; expand latencies first")
    if g.sources:
        raise NotClosed(f"graph has sources: {', '.join(g.sources)}")
    marking = dict(g.initial_marking() if m0 is None else m0)
    check_marking(g, marking)
    budget = default_horizon(g) if horizon is None else horizon
    seen: dict[tuple[int, ...], int] = {}
    order = g.place_ids
    steps: list[Step] = []
    initial = dict(marking)
    index = 0
    while index <= budget:
        key = tuple(marking[p] for p in order)
        if key in seen:
            start = seen[key]
            period = index - start
            trace = ExecutionTrace(g, initial, tuple(steps))
            counts = {
                t: sum(1 for i in range(start + 1, start + period + 1) if t in trace.fired_at(i))
                for t in g.transition_ids
            }
            distinct = set(counts.values())
            if distinct == {0}:
                raise NotLive("ASAP execution reached a dead marking")
            if len(distinct) != 1:
                raise InternalError(
                    "transitions disagree on firings per period; graph is not "
                    f"strongly connected? counts={counts}"
                )
            certificate = PeriodicityCertificate(start, distinct.pop(), period)
            return trace, certificate
        seen[key] = index
        fired, marking = step_asap(g, marking)
        steps.append(Step(fired, dict(marking)))
        index += 1
    raise HorizonExceeded(f"no recurrence within {budget} steps")


def run_guided(
    g: MarkedGraph, m0: Marking, firing_sets: Iterable[Iterable[str]]
) -> ExecutionTrace:
    """Drive the token game through an explicit list of firing sets."""
    marking = dict(m0)
    check_marking(g, marking)
    steps = []
    for ft in firing_sets:
        marking = step_guided(g, marking, ft)
        steps.append(Step(frozenset(ft), dict(marking)))
    return ExecutionTrace(g, dict(m0), tuple(steps))


def measure_delays(
    trace: ExecutionTrace, certificate: PeriodicityCertificate
) -> dict[str, int]:
    """Per-place delay totals over one steady period of the trace."""
    lo = certificate.start + 1
    hi = certificate.start + certificate.period
    if hi > len(trace):
        raise ValueError("trace is shorter than the certificate window")
    return {
        p: sum(trace.delay(p, i) for i in range(lo, hi + 1))
        for p in trace.graph.place_ids
    }


def max_occupancy(trace: ExecutionTrace) -> dict[str, int]:
    """Per-place peak token count over the whole trace, start included."""
    peak = dict(trace.initial_marking)
    for step in trace.steps:
        for p, v in step.marking.items():
            if v > peak[p]:
                peak[p] = v
    return peak


def replay_schedule(
    g: MarkedGraph,
    m0: Marking,
    report: "ScheduleReport",
    periods: int,
) -> ExecutionTrace:
    """Drive every transition by its schedule bits and verify legality.

    Runs the initial parts followed by ``periods`` steady periods.
    Raises :class:`ScheduleInvalid` at the first step whose scheduled
    firing set is not firable; a correct report never triggers it.
    """
    schedules = report.schedules
    missing = set(g.transition_ids) - set(schedules)
    if missing:
        raise ValueError(f"schedules missing for: {', '.join(sorted(missing))}")
    total = report.initial_length + periods * report.p
    marking = dict(m0)
    check_marking(g, marking)
    steps = []
    for i in range(1, total + 1):
        chosen = frozenset(t for t in g.transition_ids if schedules[t].bit(i) == 1)
        allowed = firable(g, marking)
        illegal = chosen - allowed
        if illegal:
            raise ScheduleInvalid(i, sorted(illegal)[0])
        marking = _apply(g, marking, chosen)
        steps.append(Step(chosen, dict(marking)))
    return ExecutionTrace(g, dict(m0), tuple(steps))
