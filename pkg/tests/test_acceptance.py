"""Acceptance criteria.

Each test implements one acceptance criterion at its stated tolerance
(all equalities are exact) and prints one PASS line when it holds; the
shared 200-graph corpus drives the statistical criteria.
"""

from __future__ import annotations

import time
from fractions import Fraction
from math import gcd

import pytest

from mgsched import (
    alpha,
    balanced_transpose,
    compute_k_p,
    elementary_cycles,
    equalize,
    expand_latencies,
    is_balanced,
    max_occupancy,
    mechanical_word,
    orbit,
    replay_schedule,
    rotate,
    run_asap,
    run_guided,
    schedule,
    step_asap,
    word,
)
from mgsched.words import BinaryWord

from conftest import aes_closed, running_example, triple_chord_example
from test_words import brute_balanced, coprime_pairs


def _report(criterion: str):
    print(f"acceptance {criterion}: PASS")


class TestCriterion1RunningExample:
    def test_running_example_end_to_end(self):
        started = time.perf_counter()
        report = schedule(running_example())
        elapsed = time.perf_counter() - started

        assert (report.k, report.p, report.alpha) == (4, 7, 5)
        delayed = {p: d for p, d in report.delays.items() if d}
        assert list(delayed.values()) == [2]
        assert set(report.sizes.values()) == {1}
        family = orbit(word("1101010"))
        for sched in report.schedules.values():
            steady = sched.steady
            assert is_balanced(steady)
            assert (steady.ones, len(steady)) == (4, 7)
            assert steady in family
        assert elapsed < 1.0
        _report("criterion 1 (running example end-to-end)")


class TestCriterion2RotationTransposition:
    def test_theorem_on_all_pairs_up_to_16(self):
        # The balance-preserving transposition equals the backward
        # rotation of spin alpha: tau(u) = rotate(u, -alpha), i.e.
        # rotate(tau(u), alpha) = u.  Pinned by the worked examples
        # (tau(1101010) = 1011010 = rotate(1101010, -5) for alpha = 5).
        started = time.perf_counter()
        for k, p in coprime_pairs(16):
            a = alpha(k, p).alpha
            members = set(orbit(mechanical_word(k, p)))
            brute = {BinaryWord(b) for b in brute_balanced(k, p)}
            assert members == brute  # two independent enumerations agree
            for u in members:
                t = balanced_transpose(u, 1)
                assert t == rotate(u, -a)
                assert rotate(t, a) == u
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0
        _report("criterion 2 (rotation-transposition theorem, p <= 16)")


class TestCriterion3OracleEquivalence:
    def test_steady_replay_equals_asap(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            p = report.p
            marking = dict(report.m_periodic)
            for step in range(1, 3 * p + 1):
                scheduled = {
                    t
                    for t in prepared.transition_ids
                    if report.schedules[t].steady.at((step - 1) % p + 1) == 1
                }
                fired, marking = step_asap(prepared, marking)
                assert fired == scheduled, (
                    f"ASAP and schedule disagree at step {step}"
                )
                if step % p == 0:
                    assert marking == report.m_periodic
        _report("criterion 3 (oracle equivalence on the corpus)")


class TestCriterion4DelaySumLaw:
    def test_measured_delays_match_the_cycle_formula(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            trace = replay_schedule(
                prepared, prepared.initial_marking(), report, periods=1
            )
            j0 = report.initial_length
            k, p = report.k, report.p
            for c in elementary_cycles(prepared):
                measured = sum(
                    trace.delay(q, j0 + i)
                    for q in c.places
                    for i in range(1, p + 1)
                )
                assert measured == c.tokens * p - len(c) * k
        _report("criterion 4 (delay-sum law)")


class TestCriterion5PlaceSizeLaw:
    def test_occupancy_equals_sizes(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            trace = replay_schedule(
                prepared, prepared.initial_marking(), report, periods=3
            )
            occupancy = max_occupancy(trace)
            assert occupancy == report.sizes
            for pid in prepared.place_ids:
                assert occupancy[pid] <= 2
                assert (occupancy[pid] == 1) == (
                    report.delays[pid] <= report.p - report.k
                )
        _report("criterion 5 (place-size law)")


class TestCriterion6InitializationCorrectness:
    def test_initial_part_reaches_the_periodic_marking(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            m0 = prepared.initial_marking()
            firing_sets = [
                frozenset(
                    t
                    for t in prepared.transition_ids
                    if report.schedules[t].initial.at(i) == 1
                )
                for i in range(1, report.initial_length + 1)
            ]
            trace = run_guided(prepared, m0, firing_sets)
            assert trace.marking_at(len(firing_sets)) == report.m_periodic
            for c in elementary_cycles(prepared):
                assert sum(report.m_periodic[q] for q in c.places) == sum(
                    m0[q] for q in c.places
                )
        _report("criterion 6 (initialization correctness)")


class TestCriterion7EqualizationFixedPoint:
    def test_definition_holds_and_equalize_is_idempotent(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            rate = Fraction(report.k, report.p)
            cycles = elementary_cycles(prepared)
            by_place: dict[str, list] = {p: [] for p in prepared.place_ids}
            for c in cycles:
                for q in c.places:
                    by_place[q].append(c)
            for q, through in by_place.items():
                assert any(
                    Fraction(c.tokens, len(c) + 1) < rate <= Fraction(c.tokens, len(c))
                    for c in through
                ), f"place {q} uncovered"
            for t in prepared.transition_ids:
                for pid in prepared.inputs_of[t]:
                    assert by_place[pid]
            again, _ = equalize(prepared)
            assert again == prepared
            from mgsched import throughput

            assert throughput(prepared)[0] == throughput(g)[0]
        _report("criterion 7a (equalization fixed point on the corpus)")

    def test_triple_chord_fixture_is_left_unchanged(self):
        g = triple_chord_example()
        equalized, _ = equalize(g)
        assert equalized == g
        _report("criterion 7b (triple-chord fixture already equalized)")


class TestCriterion8PeriodicityFormulaVsSimulation:
    def test_gcd_pair_reduces_to_the_simulated_recurrence(self, corpus_reports):
        for g, report in corpus_reports:
            prepared = report.graph
            k, p = compute_k_p(prepared)
            _, certificate = run_asap(prepared)
            r = gcd(k, p)
            rc = gcd(certificate.periodicity, certificate.period)
            assert (k // r, p // r) == (
                certificate.periodicity // rc,
                certificate.period // rc,
            )
        _report("criterion 8 (periodicity formula vs simulation)")


class TestEncryptionRoundFixture:
    def test_closed_fixture_properties(self):
        report = schedule(aes_closed())
        assert report.k == 1
        assert report.p == 6
        assert report.initial_length == 1
        assert set(report.sizes.values()) == {1}
        _report("encryption-round fixture (periodicity 1, period 6, init 1, sizes 1)")
