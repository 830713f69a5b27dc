"""Shared fixtures: the running example, the hand-built graphs and the
randomized corpus of live strongly connected plain graphs."""

from __future__ import annotations

import random

import networkx as nx
import pytest

from mgsched import MarkedGraph, schedule


def running_example() -> MarkedGraph:
    """Four-transition ring, every place marked once.

    The top transition computes in 1 instant, the right place needs 3
    instants of communication, and a backward chord from left to bottom
    closes a fast 2-cycle.  Expanded, this is the 7-transition/8-place
    graph whose critical cycle runs at 4/7.
    """
    return MarkedGraph.build(
        transitions=[("top", 1), "right", "bottom", "left"],
        places=[
            ("p_tr", "top", "right", 1),
            ("p_rb", "right", "bottom", 1, 3),
            ("p_bl", "bottom", "left", 1),
            ("p_lt", "left", "top", 1),
            ("q", "left", "bottom", 1),
        ],
    )


def triple_chord_example() -> MarkedGraph:
    """Nine-ring with three backward chords; already equalized.

    The outer ring is critical at 2/9; each chord closes a 1/4 cycle;
    the three chords alone form an inner 1/3 cycle whose every place
    also lies on a 1/4 cycle, so no insertion is needed anywhere.
    """
    ring = [f"t{i}" for i in range(9)]
    places = []
    for i in range(9):
        tokens = 1 if i in (4, 7) else 0
        places.append((f"r{i}{(i + 1) % 9}", ring[i], ring[(i + 1) % 9], tokens))
    places += [
        ("c30", "t3", "t0", 1),
        ("c63", "t6", "t3", 0),
        ("c06", "t0", "t6", 0),
    ]
    return MarkedGraph.build(transitions=ring, places=places)


def aes_pipeline() -> MarkedGraph:
    """Open encryption-round pipeline: two sources, one sink, a 6-stage
    round loop holding one state token.  Best-effort reconstruction of a
    classic block-cipher dataflow; closing it yields a 1-periodic
    schedule with period 6."""
    return MarkedGraph.build(
        transitions=[
            "key", "word", "key_expand", "mux", "add_key",
            "sub_bytes", "shift_rows", "mix_cols", "round_sel", "output_word",
        ],
        places=[
            ("kp1", "key", "key_expand", 0),
            ("kp2", "key_expand", "add_key", 0),
            ("wm", "word", "mux", 0),
            ("ma", "mux", "add_key", 0),
            ("as", "add_key", "sub_bytes", 0),
            ("ss", "sub_bytes", "shift_rows", 0),
            ("sm", "shift_rows", "mix_cols", 0),
            ("mr", "mix_cols", "round_sel", 0),
            ("state", "round_sel", "mux", 1),
            ("ro", "round_sel", "output_word", 0),
        ],
    )


def aes_closed() -> MarkedGraph:
    """Closed form of the encryption-round fixture.

    The two feedback paths run through four relay stations each, so
    every feedback cycle has length 12 and carries 2 tokens: the graph
    is plain, strongly connected and already equalized, with all three
    cycles critical at 1/6.  The marking sits one guided step (a mux
    firing) away from the steady orbit.
    """
    relays = [f"fbk{i}" for i in range(1, 5)] + [f"fbw{i}" for i in range(1, 5)]
    return MarkedGraph.build(
        transitions=[
            "key", "word", "key_expand", "mux", "add_key", "sub_bytes",
            "shift_rows", "mix_cols", "round_sel", "output_word", *relays,
        ],
        places=[
            ("kp1", "key", "key_expand", 0),
            ("kp2", "key_expand", "add_key", 1),
            ("wm", "word", "mux", 1),
            ("ma", "mux", "add_key", 0),
            ("as", "add_key", "sub_bytes", 0),
            ("ss", "sub_bytes", "shift_rows", 0),
            ("sm", "shift_rows", "mix_cols", 0),
            ("mr", "mix_cols", "round_sel", 0),
            ("state", "round_sel", "mux", 1),
            ("ro", "round_sel", "output_word", 0),
            ("fk0", "output_word", "fbk1", 1),
            ("fk1", "fbk1", "fbk2", 0),
            ("fk2", "fbk2", "fbk3", 0),
            ("fk3", "fbk3", "fbk4", 0),
            ("fk4", "fbk4", "key", 0),
            ("fw0", "output_word", "fbw1", 1),
            ("fw1", "fbw1", "fbw2", 0),
            ("fw2", "fbw2", "fbw3", 0),
            ("fw3", "fbw3", "fbw4", 0),
            ("fw4", "fbw4", "word", 0),
        ],
    )


def delayed_place_fixture() -> MarkedGraph:
    """Five-ring with a marked backward chord: D(q) = 2 > p - k = 1.

    The chord place collects two delays per period, forcing size 2;
    every other place stays at size 1.
    """
    return MarkedGraph.build(
        ["a", "b", "c", "d", "e"],
        [
            ("ab", "a", "b", 1),
            ("bc", "b", "c", 1),
            ("cd", "c", "d", 1),
            ("de", "d", "e", 1),
            ("ea", "e", "a", 0),
            ("q", "b", "a", 1),
        ],
    )


def boundary_place_fixture() -> MarkedGraph:
    """Seven-ring at 5/7 with a marked self-loop: D = 2 = p - k exactly,
    the largest delay count still fitting in a size-1 place."""
    return MarkedGraph.build(
        [f"t{i}" for i in range(7)],
        [
            (f"p{i}", f"t{i}", f"t{(i + 1) % 7}", 1 if i < 5 else 0)
            for i in range(7)
        ]
        + [("s0", "t0", "t0", 1)],
    )


def ring(n: int, tokens: dict[int, int] | int = 1) -> MarkedGraph:
    """Simple n-ring; ``tokens`` maps place index to count (or marks place 0)."""
    if isinstance(tokens, int):
        tokens = {0: tokens}
    return MarkedGraph.build(
        transitions=[f"t{i}" for i in range(n)],
        places=[
            (f"p{i}", f"t{i}", f"t{(i + 1) % n}", tokens.get(i, 0))
            for i in range(n)
        ],
    )


def random_live_graph(seed: int, max_transitions: int = 10, max_places: int = 15) -> MarkedGraph:
    """A random live, strongly connected, plain graph.

    Built as a ring over a shuffled transition list (strong connectivity)
    plus random extra arcs; at most one token per place keeps the
    throughput at or below 1.  Tokens are added to token-free cycles
    until the graph is live.
    """
    rng = random.Random(seed)
    n = rng.randint(2, max_transitions)
    ids = [f"t{i}" for i in range(n)]
    order = ids[:]
    rng.shuffle(order)
    arcs = [(order[i], order[(i + 1) % n]) for i in range(n)]
    for _ in range(rng.randint(0, max_places - n)):
        arcs.append((rng.choice(ids), rng.choice(ids)))
    places = [
        (f"p{i}", src, dst, 1 if rng.random() < 0.6 else 0)
        for i, (src, dst) in enumerate(arcs)
    ]
    while True:
        zero = nx.DiGraph()
        zero.add_nodes_from(ids)
        marked = {}
        for i, (pid, src, dst, tokens) in enumerate(places):
            if tokens == 0:
                zero.add_edge(src, dst)
                marked.setdefault((src, dst), i)
        try:
            cycle_arcs = nx.find_cycle(zero)
        except nx.NetworkXNoCycle:
            break
        index = min(marked[(u, v)] for u, v, *_ in cycle_arcs)
        pid, src, dst, _ = places[index]
        places[index] = (pid, src, dst, 1)
    return MarkedGraph.build(transitions=ids, places=places)


CORPUS_SIZE = 200


@pytest.fixture(scope="session")
def corpus():
    return [random_live_graph(seed) for seed in range(CORPUS_SIZE)]


@pytest.fixture(scope="session")
def corpus_reports(corpus):
    """Schedule reports for the whole corpus (raw pipeline inputs are
    already plain, so only equalization applies)."""
    return [(g, schedule(g)) for g in corpus]


@pytest.fixture
def fig1a():
    return running_example()


@pytest.fixture
def fig7():
    return triple_chord_example()


@pytest.fixture
def aes():
    return aes_pipeline()
