"""Exception hierarchy for the mgsched package.

All domain failures derive from :class:`MgError` so callers (and the CLI)
can distinguish "the input graph is not schedulable" from programming
errors.  :class:`InternalError` flags conditions that indicate a bug in
the pipeline itself rather than bad input.
"""

from __future__ import annotations


class MgError(Exception):
    """Base class for all domain errors raised by mgsched."""


class GraphFormatError(MgError):
    """A graph document or graph construction argument is malformed."""


class NotLive(MgError):
    """The graph has a token-free cycle, so some transition can never fire."""


class NotStronglyConnected(MgError):
    """The operation requires a strongly connected graph."""


class NotConnected(MgError):
    """The operation requires a (weakly) connected graph."""


class NotPlain(MgError):
    """The operation requires unit communication latencies and zero
    computation latencies; run latency expansion first."""


class NotClosed(MgError):
    """The operation refuses graphs with sources (or sinks)."""


class NotSchedulable(MgError):
    """The graph's throughput exceeds 1, outside the scheduler's domain."""


class CycleLimitExceeded(MgError):
    """Elementary-cycle enumeration hit the configured cap."""

    def __init__(self, cap: int):
        super().__init__(f"elementary cycle enumeration exceeded cap of {cap}")
        self.cap = cap


class HorizonExceeded(MgError):
    """The simulation ran past its step budget without finding a recurrence."""


class IllegalFiring(MgError):
    """A guided step tried to fire a transition that is not firable."""


class ScheduleInvalid(MgError):
    """Replay of a computed schedule attempted an illegal firing.

    This is the oracle's failure signal: a valid report must replay
    cleanly on the token game.
    """

    def __init__(self, step: int, transition: str):
        super().__init__(
            f"schedule fires {transition!r} at step {step} but it is not firable"
        )
        self.step = step
        self.transition = transition


class NotBalanced(MgError):
    """The word operation is only defined on balanced binary words."""


class NotCoprime(MgError):
    """The alpha coefficient requires a coprime (periodicity, period) pair."""


class UndefinedTransposition(MgError):
    """No "10" at the requested location and the wrap form does not apply."""


class InconsistentPropagation(MgError):
    """Schedule propagation assigned two different words to one transition.

    Signals a corrupted delay distribution or a non-equalized input.
    """


class InfeasibleInitialization(MgError):
    """The initial-execution constraint system has no solution.

    Must not happen for equalized inputs; indicates an upstream bug.
    """


class InternalError(MgError):
    """An invariant the pipeline relies on was violated."""
