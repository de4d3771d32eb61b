from __future__ import annotations

import pytest

from randprog import gen_version_pair
from regmine.minilang import parse_program
from regmine.scope import build_plan


def test_identical_versions_monitor_nothing(base_program):
    plan = build_plan(base_program, base_program, 1)
    assert plan.monitored == frozenset()
    assert plan.changed == frozenset()


def test_fixture_distance_one(base_program, upgraded_program):
    plan = build_plan(base_program, upgraded_program, 1)
    assert plan.changed == {"clamp"}
    assert plan.monitored == {"main"}
    assert plan.distance == 1


def test_distance_zero_monitors_nothing(base_program, upgraded_program, buggy_program):
    for upgraded in (upgraded_program, buggy_program):
        plan = build_plan(base_program, upgraded, 0)
        assert plan.monitored == frozenset()
        assert plan.changed == {"clamp"}


def test_distance_two_reaches_transitive_callers():
    base = parse_program(
        "fn main(x) { return mid(x); } fn mid(x) { return leaf(x); } fn leaf(x) { return x; }"
    )
    upgraded = parse_program(
        "fn main(x) { return mid(x); } fn mid(x) { return leaf(x); } fn leaf(x) { return x + 1; }"
    )
    assert build_plan(base, upgraded, 1).monitored == {"mid"}
    assert build_plan(base, upgraded, 2).monitored == {"mid", "main"}


def test_added_function_counts_as_change_location():
    base = parse_program("fn main(x) { return x; } fn helper(x) { return x; }")
    upgraded = parse_program(
        "fn main(x) { return g(x); } fn helper(x) { return x; } fn g(x) { return helper(x); }"
    )
    plan = build_plan(base, upgraded, 1)
    # main changed (calls g now); g added; helper is g's neighbor in the
    # upgraded graph, so it lands inside the neighborhood
    assert plan.changed == {"main"}
    assert "g" not in plan.monitored  # no base counterpart to compare with
    assert plan.monitored == {"helper"}


def test_deleted_function_neighbors_via_base_graph():
    base = parse_program(
        "fn main(x) { return x; } fn gone(x) { return helper(x); } fn helper(x) { return x; }"
    )
    upgraded = parse_program("fn main(x) { return x; } fn helper(x) { return x; }")
    plan = build_plan(base, upgraded, 1)
    assert plan.changed == frozenset()
    assert plan.monitored == {"helper"}


def test_negative_distance_rejected(base_program, upgraded_program):
    with pytest.raises(ValueError):
        build_plan(base_program, upgraded_program, -1)


class TestPlanLaws:
    def test_exclusion_and_version_safety(self):
        for seed in range(60):
            base, upgraded, _, _ = gen_version_pair(seed)
            for distance in (0, 1, 2):
                plan = build_plan(base, upgraded, distance)
                assert not (plan.monitored & plan.changed)
                for name in plan.monitored:
                    assert name in base.functions and name in upgraded.functions

    def test_monotonic_in_distance(self):
        for seed in range(60):
            base, upgraded, _, _ = gen_version_pair(seed)
            previous: frozenset[str] = frozenset()
            for distance in (0, 1, 2, 3):
                plan = build_plan(base, upgraded, distance)
                assert previous <= plan.monitored
                previous = plan.monitored
