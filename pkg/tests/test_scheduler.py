"""The scheduling pipeline, step by step and end to end."""

from __future__ import annotations

from fractions import Fraction

import pytest

from mgsched import (
    MarkedGraph,
    compute_delay_distribution,
    compute_initial_execution,
    compute_k_p,
    compute_periodic_marking,
    compute_place_sizes,
    compute_steady_schedules,
    elementary_cycles,
    equalize,
    expand_latencies,
    firable,
    is_balanced,
    max_occupancy,
    replay_schedule,
    rotate,
    run_asap,
    run_guided,
    schedule,
    word,
)
from mgsched.errors import (
    InconsistentPropagation,
    InfeasibleInitialization,
    NotSchedulable,
)

from conftest import (
    aes_closed,
    boundary_place_fixture,
    delayed_place_fixture,
    random_live_graph,
    ring,
    running_example,
)


def equalized_running_example() -> MarkedGraph:
    g, _ = expand_latencies(running_example())
    g, _ = equalize(g)
    return g


class TestComputeKP:
    def test_running_example(self):
        assert compute_k_p(equalized_running_example()) == (4, 7)

    def test_single_ring_keeps_the_gcd_pair(self):
        assert compute_k_p(ring(6, {0: 1, 1: 1})) == (2, 6)

    @pytest.mark.parametrize("seed", range(12))
    def test_agrees_with_simulation(self, seed):
        g, _ = equalize(random_live_graph(seed))
        k, p = compute_k_p(g)
        _, certificate = run_asap(g)
        assert Fraction(k, p) == Fraction(certificate.periodicity, certificate.period)


class TestDelayDistribution:
    def test_running_example_concentrates_on_the_join_input(self):
        g = equalized_running_example()
        delays = compute_delay_distribution(g)
        assert delays["q#e1"] == 2
        assert all(v == 0 for pid, v in delays.items() if pid != "q#e1")

    def test_critical_ring_has_no_delays(self):
        assert set(compute_delay_distribution(ring(4)).values()) == {0}

    def test_latest_position(self):
        g = equalized_running_example()
        delays = compute_delay_distribution(g)
        for t in g.transition_ids:
            assert any(delays[p] == 0 for p in g.inputs_of[t])

    def test_unique_across_mutually_reachable_markings(self):
        g = equalized_running_example()
        report = schedule(running_example())
        shifted = g.with_marking(report.m_periodic)
        assert compute_delay_distribution(g) == compute_delay_distribution(shifted)

    @pytest.mark.parametrize("seed", range(15))
    def test_distribution_invariants(self, seed):
        g, _ = equalize(random_live_graph(seed))
        k, p = compute_k_p(g)
        delays = compute_delay_distribution(g, k, p)
        for c in elementary_cycles(g):
            assert sum(delays[q] for q in c.places) == c.tokens * p - len(c) * k
        for t in g.transition_ids:
            assert any(delays[q] == 0 for q in g.inputs_of[t])
        assert all(0 <= d < k for d in delays.values())


class TestSteadySchedules:
    def test_rotation_relation_on_every_place(self):
        from mgsched import alpha

        g = equalized_running_example()
        k, p = compute_k_p(g)
        delays = compute_delay_distribution(g)
        steady = compute_steady_schedules(g, delays, k, p)
        a = alpha(k, p).alpha
        for place in g.places:
            u = steady[place.producer]
            v = steady[place.consumer]
            assert v == rotate(u, 1 - delays[place.id] * a)

    def test_running_example_words(self):
        g = equalized_running_example()
        steady = compute_steady_schedules(g, compute_delay_distribution(g), 4, 7)
        assert steady["bottom"] == word("0101011")  # seed: smallest id
        assert steady["left"] == word("1010101")
        assert steady["q#d1"] == word("1101010")
        # the two-input join is reachable both ways: one rotation from the
        # chain end, five (= 1 - 2*alpha) from the delayed side
        assert steady["bottom"] == rotate(steady["p_rb#f2"], 1)
        assert steady["bottom"] == rotate(steady["q#d1"], 1 - 2 * 5)

    def test_all_balanced_and_one_orbit(self):
        g = equalized_running_example()
        steady = compute_steady_schedules(g, compute_delay_distribution(g), 4, 7)
        from mgsched import orbit

        members = orbit(word("1101010"))
        for w in steady.values():
            assert is_balanced(w)
            assert w in members

    def test_traversal_order_does_not_matter(self):
        g = equalized_running_example()
        delays = compute_delay_distribution(g)
        bfs = compute_steady_schedules(g, delays, 4, 7, _traversal="bfs")
        dfs = compute_steady_schedules(g, delays, 4, 7, _traversal="dfs")
        assert bfs == dfs

    def test_ring_without_delays_rotates_unit_by_unit(self):
        g = ring(3)
        steady = compute_steady_schedules(g, {p: 0 for p in g.place_ids}, 1, 3)
        assert steady["t1"] == rotate(steady["t0"], 1)
        assert steady["t2"] == rotate(steady["t1"], 1)

    def test_corrupted_delays_are_detected(self):
        g = equalized_running_example()
        delays = compute_delay_distribution(g)
        delays["q#e1"] = 1  # breaks the cycle sum
        with pytest.raises(InconsistentPropagation):
            compute_steady_schedules(g, delays, 4, 7)

    def test_non_primitive_words_repeat_their_root(self):
        g = ring(6, {0: 1, 1: 1})
        steady = compute_steady_schedules(g, {p: 0 for p in g.place_ids}, 2, 6)
        for w in steady.values():
            assert len(w) == 6 and w.ones == 2
            assert w.bits[:3] == w.bits[3:]


class TestPeriodicMarking:
    def test_running_example_marking(self):
        g = equalized_running_example()
        steady = compute_steady_schedules(g, compute_delay_distribution(g), 4, 7)
        marking = compute_periodic_marking(g, steady, 7)
        expected = {p: 0 for p in g.place_ids}
        expected.update({"p_bl": 1, "p_lt": 1, "q": 1, "p_tr": 1, "p_rb#2": 1})
        assert marking == expected

    def test_zero_delay_places_never_carry_the_extra_token(self):
        g = equalized_running_example()
        delays = compute_delay_distribution(g)
        steady = compute_steady_schedules(g, delays, 4, 7)
        marking = compute_periodic_marking(g, steady, 7)
        for place in g.places:
            if delays[place.id] == 0:
                assert marking[place.id] == steady[place.producer].at(7)

    @pytest.mark.parametrize("seed", range(15))
    def test_cycle_sums_equal_the_initial_marking(self, seed):
        g, _ = equalize(random_live_graph(seed))
        k, p = compute_k_p(g)
        steady = compute_steady_schedules(g, compute_delay_distribution(g, k, p), k, p)
        marking = compute_periodic_marking(g, steady, p)
        m0 = g.initial_marking()
        for c in elementary_cycles(g):
            assert sum(marking[q] for q in c.places) == sum(m0[q] for q in c.places)


class TestInitialExecution:
    def test_identity_when_already_there(self):
        g = ring(4)
        m0 = g.initial_marking()
        assert compute_initial_execution(g, m0, m0) == []

    def test_reaches_the_target(self):
        g = ring(6, {0: 1, 1: 1})
        m0 = g.initial_marking()
        target = {p: 0 for p in g.place_ids}
        target.update({"p1": 1, "p4": 1})
        firing_sets = compute_initial_execution(g, m0, target)
        trace = run_guided(g, m0, firing_sets)
        assert trace.marking_at(len(firing_sets)) == target

    def test_infeasible_when_cycle_sums_differ(self):
        g = ring(4)
        target = {p: 0 for p in g.place_ids}
        target["p0"] = 2  # one more token on the only cycle
        with pytest.raises(InfeasibleInitialization):
            compute_initial_execution(g, g.initial_marking(), target)


class TestPlaceSizes:
    def test_delay_bound_decides(self):
        g = MarkedGraph.build(
            ["t"], [("x", "t", "t", 1), ("y", "t", "t", 1), ("z", "t", "t", 1)]
        )
        sizes = compute_place_sizes(g, {"x": 0, "y": 3, "z": 4}, 4, 7)
        assert sizes == {"x": 1, "y": 1, "z": 2}

    def test_size_two_place_confirmed_by_replay(self):
        report = schedule(delayed_place_fixture())
        assert report.delays["q"] == 2
        assert report.p - report.k == 1
        assert report.sizes["q"] == 2
        trace = replay_schedule(report.graph, report.graph.initial_marking(), report, 3)
        assert max_occupancy(trace) == report.sizes

    def test_boundary_delay_count_still_fits_size_one(self):
        report = schedule(boundary_place_fixture())
        assert report.delays["s0"] == report.p - report.k == 2
        assert report.sizes["s0"] == 1
        trace = replay_schedule(report.graph, report.graph.initial_marking(), report, 3)
        assert max_occupancy(trace)["s0"] == 1


class TestSchedulePipeline:
    def test_running_example_report(self):
        report = schedule(running_example())
        assert (report.k, report.p, report.alpha) == (4, 7, 5)
        assert report.rate == Fraction(4, 7)
        assert report.initial_length == 1
        assert set(report.sizes.values()) == {1}
        assert report.schedules["bottom"].render() == "0.(0101011)*"
        assert report.schedules["p_rb#f1"].render() == "1.(0101101)*"

    def test_report_is_replayable_from_the_input_marking(self):
        report = schedule(running_example())
        trace = replay_schedule(report.graph, report.graph.initial_marking(), report, 5)
        init = report.initial_length
        for lap in range(5):
            assert trace.marking_at(init + lap * report.p) == report.m_periodic

    def test_closed_encryption_round_fixture(self):
        report = schedule(aes_closed())
        assert (report.k, report.p) == (1, 6)
        assert report.initial_length == 1
        assert set(report.sizes.values()) == {1}

    def test_empty_initial_part_when_marking_is_on_the_orbit(self):
        report = schedule(ring(6, {0: 1, 3: 1}))
        assert report.initial_length == 0
        assert all(len(s.initial) == 0 for s in report.schedules.values())

    def test_rejects_rate_above_one(self):
        g = MarkedGraph.build(["t"], [("p", "t", "t", 2)])
        with pytest.raises(NotSchedulable):
            schedule(g)

    def test_seed_independence(self):
        g = running_example()
        base = schedule(g)
        for seed in ("left", "top"):
            other = schedule(g, seed_transition=seed)
            assert (other.k, other.p, other.alpha) == (base.k, base.p, base.alpha)
            assert other.delays == base.delays
            assert other.sizes == base.sizes
            shifts = {
                s
                for s in range(base.p)
                if all(
                    other.schedules[t].steady == rotate(base.schedules[t].steady, s)
                    for t in base.graph.transition_ids
                )
            }
            assert len(shifts) == 1
            replay_schedule(other.graph, other.graph.initial_marking(), other, 2)

    def test_open_graph_is_closed_automatically(self):
        from conftest import aes_pipeline

        report = schedule(aes_pipeline())
        assert (report.k, report.p) == (1, 6)
        assert set(report.sizes.values()) == {1}
        sched_sources = {report.schedules[t] for t in ("key", "word")}
        assert all(s.steady.ones == 1 for s in sched_sources)

    def test_first_steady_step_fires_exactly_the_enabled_set(self):
        report = schedule(running_example())
        first = {
            t
            for t in report.graph.transition_ids
            if report.schedules[t].steady.at(1) == 1
        }
        assert firable(report.graph, report.m_periodic) == first

    def test_latency_graph_end_to_end_matches_simulation(self):
        report = schedule(running_example())
        trace, certificate = run_asap(report.graph)
        assert Fraction(report.k, report.p) == Fraction(
            certificate.periodicity, certificate.period
        )
