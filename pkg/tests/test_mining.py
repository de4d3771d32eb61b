from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randprog import gen_program_and_scenario, monitor_all
from regmine.checking import check_trace
from regmine.errors import UsageError
from regmine.minilang import run_suite
from regmine.mining import (
    build_pta,
    ktail_merge,
    mine_automata,
    mine_invariants,
    mine_properties,
)
from regmine.properties import AutomatonProperty, PropertyStatus
from regmine.tracefile import EventKind, MonitorPlan, Trace, TraceEvent

PLAN_MAIN = MonitorPlan(1, frozenset({"clamp"}), frozenset({"main"}))
PLAN_BOTH = MonitorPlan(0, frozenset(), frozenset({"main", "clamp"}))


def base_traces(base_program, base_scenario, plan=PLAN_MAIN):
    return run_suite(base_program, base_scenario, plan, "base", 10_000)


def test_no_traces_mines_nothing():
    assert mine_invariants([], PLAN_MAIN) == []
    assert mine_automata([], PLAN_MAIN) == []


def test_fixture_exit_invariants(base_program, base_scenario):
    props = mine_invariants(base_traces(base_program, base_scenario), PLAN_MAIN)
    descriptions = {(p.point, p.lhs, p.op, p.rhs) for p in props}
    # exit samples (cmd, ret) over {0, 3, 10}
    assert ("exit", "ret", ">=", 0) in descriptions
    assert ("exit", "ret", "<=", 10) in descriptions
    assert ("exit", "cmd", "==", "ret") in descriptions
    assert ("exit", "cmd", ">=", 0) in descriptions
    assert ("exit", "cmd", "<=", 10) in descriptions
    # entry samples cmd over {0, 3, 10}
    assert ("entry", "cmd", ">=", 0) in descriptions
    assert ("entry", "cmd", "<=", 10) in descriptions
    assert len(props) == 7
    assert all(p.status is PropertyStatus.MINED for p in props)


def test_min_support_threshold():
    events = [
        TraceEvent(0, EventKind.ENTER, "main", {"x": 5}),
        TraceEvent(1, EventKind.EXIT, "main", {"ret": 5, "x": 5}),
    ]
    traces = [Trace("base", "t1", "pass", events)]
    plan = MonitorPlan(0, frozenset(), frozenset({"main"}))
    assert mine_invariants(traces, plan, min_support=2) == []
    mined = mine_invariants(traces, plan, min_support=1)
    assert {(p.point, p.lhs, p.op, p.rhs) for p in mined} == {
        ("entry", "x", "==", 5),
        ("exit", "x", "==", 5),
        ("exit", "ret", "==", 5),
        ("exit", "x", "==", "ret"),
    }


def test_constant_suppresses_ranges_and_nonzero():
    rows = [{"x": 5}, {"x": 5}, {"x": 5}]
    traces = [
        Trace("base", f"t{i}", "pass", [TraceEvent(0, EventKind.ENTER, "f", row)])
        for i, row in enumerate(rows)
    ]
    plan = MonitorPlan(0, frozenset(), frozenset({"f"}))
    mined = mine_invariants(traces, plan)
    assert [(p.lhs, p.op, p.rhs) for p in mined] == [("x", "==", 5)]


def test_nonzero_only_when_range_does_not_imply_it():
    def mk(values):
        return [
            Trace("base", f"t{i}", "pass", [TraceEvent(0, EventKind.ENTER, "f", {"x": v})])
            for i, v in enumerate(values)
        ]

    plan = MonitorPlan(0, frozenset(), frozenset({"f"}))
    spanning = mine_invariants(mk([-2, 1, 5]), plan)
    assert ("x", "!=", 0) in [(p.lhs, p.op, p.rhs) for p in spanning]
    positive = mine_invariants(mk([2, 3, 5]), plan)
    assert ("x", "!=", 0) not in [(p.lhs, p.op, p.rhs) for p in positive]


def test_pair_inequalities_without_equality():
    rows = [{"x": 1, "y": 2}, {"x": 2, "y": 5}, {"x": 3, "y": 4}]
    traces = [
        Trace("base", f"t{i}", "pass", [TraceEvent(0, EventKind.ENTER, "f", row)])
        for i, row in enumerate(rows)
    ]
    plan = MonitorPlan(0, frozenset(), frozenset({"f"}))
    mined = mine_invariants(traces, plan)
    pair_ops = {(p.op) for p in mined if p.rhs == "y"}
    assert pair_ops == {"<=", "!="}


def test_mining_requires_base_traces():
    tr = Trace("upgraded", "t1", "pass", [])
    with pytest.raises(UsageError, match="base-version traces"):
        mine_invariants([tr], PLAN_MAIN)
    with pytest.raises(UsageError, match="base-version traces"):
        mine_automata([tr], PLAN_MAIN)


def test_mining_deterministic_under_trace_permutation(base_program, base_scenario):
    traces = base_traces(base_program, base_scenario, PLAN_BOTH)
    forward = mine_properties(traces, PLAN_BOTH)
    backward = mine_properties(list(reversed(traces)), PLAN_BOTH)
    assert forward == backward


class TestPta:
    def test_empty(self):
        pta = build_pta([])
        assert pta.n_states == 1
        assert pta.accepting == frozenset()
        assert not pta.accepts(())

    def test_single_symbol(self):
        pta = build_pta([("a",)])
        assert pta.n_states == 2
        assert pta.transitions == {0: {"a": 1}}
        assert pta.accepting == frozenset({1})

    def test_shared_prefix(self):
        pta = build_pta([("a", "b"), ("a", "c")])
        assert pta.n_states == 4
        assert pta.transitions[0] == {"a": 1}
        assert pta.accepts(("a", "b")) and pta.accepts(("a", "c"))
        assert not pta.accepts(("a",))

    def test_accepts_exactly_training_set(self):
        rng = random.Random(5)
        for _ in range(20):
            training = {
                tuple(rng.choice("abc") for _ in range(rng.randint(0, 4)))
                for _ in range(rng.randint(1, 6))
            }
            pta = build_pta(sorted(training))
            assert pta.language_upto(4) == training


class TestKtail:
    def test_high_k_language_equals_training_set(self):
        rng = random.Random(11)
        for _ in range(30):
            training = {
                tuple(rng.choice("ab") for _ in range(rng.randint(0, 5)))
                for _ in range(rng.randint(1, 5))
            }
            merged = ktail_merge(build_pta(sorted(training)), 5)
            assert merged.language_upto(5) == training

    def test_training_always_accepted_any_k(self):
        rng = random.Random(23)
        for _ in range(30):
            training = {
                tuple(rng.choice("abc") for _ in range(rng.randint(0, 5)))
                for _ in range(rng.randint(1, 6))
            }
            for k in (1, 2, 3):
                merged = ktail_merge(build_pta(sorted(training)), k)
                for seq in training:
                    assert merged.accepts(seq)

    def test_single_sequence_accepted(self):
        for k in (1, 2, 5):
            merged = ktail_merge(build_pta([("x", "y", "z")]), k)
            assert merged.accepts(("x", "y", "z"))

    def test_merging_generalizes_repetition(self):
        # init (read)+ close collapses into a read self-loop at small k
        training = [
            ("init", "read", "close"),
            ("init", "read", "read", "close"),
            ("init", "read", "read", "read", "close"),
        ]
        merged = ktail_merge(build_pta(training), 1)
        assert all(merged.accepts(s) for s in training)
        assert merged.accepts(("init", "read", "read", "read", "read", "close"))
        self_loops = {
            symbol
            for state, trans in merged.transitions.items()
            for symbol, target in trans.items()
            if target == state
        }
        assert "read" in self_loops

    def test_distinct_tails_do_not_merge(self):
        # {ab, abb} at k=1: all four prefix states have distinct tails
        merged = ktail_merge(build_pta([("a", "b"), ("a", "b", "b")]), 1)
        assert merged.language_upto(4) == {("a", "b"), ("a", "b", "b")}

    def test_k_must_be_positive(self):
        with pytest.raises(UsageError):
            ktail_merge(build_pta([]), 0)

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(
            st.lists(st.sampled_from("abc"), max_size=5).map(tuple),
            min_size=1,
            max_size=6,
        ),
        st.integers(1, 3),
    )
    def test_result_is_deterministic_dfa(self, sequences, k):
        merged = ktail_merge(build_pta(sequences), k)
        again = ktail_merge(build_pta(list(reversed(sequences))), k)
        assert merged == again
        for seq in sequences:
            assert merged.accepts(tuple(seq))


class TestMineAutomata:
    def test_function_without_calls_gets_empty_sequence_acceptor(
        self, base_program, base_scenario
    ):
        props = mine_automata(base_traces(base_program, base_scenario), PLAN_MAIN, k=2)
        assert len(props) == 1
        prop = props[0]
        assert prop.id == "fsm:main:k2"
        assert prop.automaton.accepts(())
        assert prop.automaton.language_upto(3) == {()}

    def test_fixture_call_to_clamp(self, base_program, base_scenario):
        props = mine_automata(base_traces(base_program, base_scenario, PLAN_BOTH), PLAN_BOTH, k=2)
        by_func = {p.func: p for p in props}
        assert set(by_func) == {"main", "clamp"}
        main_dfa = by_func["main"].automaton
        assert main_dfa.language_upto(3) == {("clamp",)}
        assert by_func["clamp"].automaton.language_upto(3) == {()}

    def test_zero_invocations_yield_no_property(self, base_program):
        plan = MonitorPlan(0, frozenset(), frozenset({"main", "clamp"}))
        traces = [Trace("base", "t1", "pass", [])]
        assert mine_automata(traces, plan) == []

    def test_symbols_outside_monitored_or_changed_are_excluded(self):
        events = [
            TraceEvent(0, EventKind.ENTER, "f", {"x": 1}),
            TraceEvent(1, EventKind.ENTER, "stray", {"y": 1}),
            TraceEvent(2, EventKind.EXIT, "stray", {"ret": 0, "y": 1}),
            TraceEvent(3, EventKind.ENTER, "g", {"z": 1}),
            TraceEvent(4, EventKind.EXIT, "g", {"ret": 0, "z": 1}),
            TraceEvent(5, EventKind.EXIT, "f", {"ret": 0, "x": 1}),
        ]
        plan = MonitorPlan(1, frozenset({"g"}), frozenset({"f"}))
        props = mine_automata([Trace("base", "t1", "pass", events)], plan, k=1)
        (prop,) = props
        assert prop.automaton.language_upto(2) == {("g",)}

    def test_nested_deeper_calls_excluded(self):
        events = [
            TraceEvent(0, EventKind.ENTER, "f", {"x": 1}),
            TraceEvent(1, EventKind.ENTER, "g", {"y": 1}),
            TraceEvent(2, EventKind.ENTER, "h", {"z": 1}),
            TraceEvent(3, EventKind.EXIT, "h", {"ret": 0, "z": 1}),
            TraceEvent(4, EventKind.EXIT, "g", {"ret": 0, "y": 1}),
            TraceEvent(5, EventKind.EXIT, "f", {"ret": 0, "x": 1}),
        ]
        plan = MonitorPlan(0, frozenset(), frozenset({"f", "g", "h"}))
        props = mine_automata([Trace("base", "t1", "pass", events)], plan, k=2)
        by_func = {p.func: p for p in props}
        assert by_func["f"].automaton.language_upto(2) == {("g",)}
        assert by_func["g"].automaton.language_upto(2) == {("h",)}


class TestTraceSoundness:
    def test_mined_properties_hold_on_training_traces(self):
        for seed in range(25):
            program, scenario = gen_program_and_scenario(seed)
            plan = monitor_all(program)
            traces = run_suite(program, scenario, plan, "base", 100_000)
            for prop in mine_properties(traces, plan, min_support=1, k=2):
                for trace in traces:
                    assert check_trace(prop, trace) == []
