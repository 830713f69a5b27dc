"""Balanced static scheduling of marked graphs.

Computes, for a live strongly connected marked graph with communication
and computation latencies, the balanced ASAP execution: the execution of
maximal rate whose per-transition activity words are balanced binary
words, together with the minimal place sizes it needs.  A token-game
simulator doubles as an independent oracle for every analytic result.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import MgError
from .graph import (
    Cycle,
    MarkedGraph,
    Place,
    Transition,
    ValidationReport,
    elementary_cycles,
    graph_from_json,
    graph_to_json,
    load_graph,
    scc_decomposition,
    throughput,
    validate,
)
from .scheduler import (
    ScheduleReport,
    compute_delay_distribution,
    compute_initial_execution,
    compute_k_p,
    compute_periodic_marking,
    compute_place_sizes,
    compute_steady_schedules,
    schedule,
)
from .simulator import (
    ExecutionTrace,
    PeriodicityCertificate,
    firable,
    max_occupancy,
    measure_delays,
    replay_schedule,
    run_asap,
    run_guided,
    step_asap,
    step_guided,
)
from .transform import ProvenanceMap, close_graph, equalize, expand_latencies
from .words import (
    AlphaCoefficient,
    BinaryWord,
    PeriodicSchedule,
    alpha,
    balanced_transpose,
    balanced_words,
    canonical_delta,
    compare_lex,
    is_balanced,
    mechanical_word,
    orbit,
    parse_schedule,
    rotate,
    transpose_at,
    word,
)

__all__ = [name for name in dir() if not name.startswith("_")]
