"""Scope-restricted verification by exhaustive execution over finite domains.

Argument tuples are enumerated in lexicographic order over the declared
entry-parameter domains.  The first tuple whose trace violates the property
refutes it; a budget-exhausted execution before any refutation yields
Unknown, as does a domain product beyond the enumeration cap; otherwise the
property is proved for the whole scope.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .checking import Violation, check_trace
from .errors import UsageError
from .minilang import ast
from .minilang.interp import OutcomeKind, execute
from .properties import (
    AutomatonProperty,
    Property,
    PropertyStatus,
    sort_properties,
    with_status,
)
from .tracefile import BASE, PASS, MonitorPlan, Trace

DEFAULT_STEP_BUDGET = 100_000
DEFAULT_MAX_TUPLES = 1_000_000

STRICT = "strict"
LENIENT = "lenient"
MODES = (STRICT, LENIENT)

REASON_BUDGET = "budget_exhausted"


class VerdictKind(str, Enum):
    PROVED = "proved"
    REFUTED = "refuted"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    counterexample: tuple[int, ...] | None = None
    violation: Violation | None = None
    reason: str | None = None

    @staticmethod
    def proved() -> "Verdict":
        return Verdict(VerdictKind.PROVED)

    @staticmethod
    def refuted(args: tuple[int, ...], violation: Violation) -> "Verdict":
        return Verdict(VerdictKind.REFUTED, args, violation)

    @staticmethod
    def unknown() -> "Verdict":
        return Verdict(VerdictKind.UNKNOWN, reason=REASON_BUDGET)


def verification_plan(prop: Property) -> MonitorPlan:
    """Monitor exactly the property's function, plus an automaton's alphabet."""
    monitored = {prop.func}
    if isinstance(prop, AutomatonProperty):
        monitored.update(prop.automaton.alphabet())
    return MonitorPlan(0, frozenset(), frozenset(monitored))


def enumerate_args(domains: list[tuple[str, int, int]]):
    """Lexicographic Cartesian product of inclusive integer intervals."""
    ranges = [range(lo, hi + 1) for _, lo, hi in domains]
    return itertools.product(*ranges)


def domain_size(domains: list[tuple[str, int, int]]) -> int:
    return math.prod(hi - lo + 1 for _, lo, hi in domains)


def verify_property(
    program: ast.Program,
    domains: list[tuple[str, int, int]],
    prop: Property,
    step_budget: int = DEFAULT_STEP_BUDGET,
    max_tuples: int = DEFAULT_MAX_TUPLES,
) -> Verdict:
    if prop.func not in program.functions:
        raise UsageError(f"property {prop.id!r} names unknown function {prop.func!r}")
    if domain_size(domains) > max_tuples:
        return Verdict.unknown()
    plan = verification_plan(prop)
    for args in enumerate_args(domains):
        outcome, events = execute(program, list(args), step_budget, plan)
        trace = Trace(BASE, "verification", PASS, events)
        violations = check_trace(prop, trace)
        if violations:
            return Verdict.refuted(tuple(args), violations[0])
        if outcome.kind is OutcomeKind.BUDGET_EXHAUSTED:
            return Verdict.unknown()
    return Verdict.proved()


_VERDICT_TO_STATUS = {
    VerdictKind.PROVED: PropertyStatus.PROVED,
    VerdictKind.REFUTED: PropertyStatus.REFUTED,
    VerdictKind.UNKNOWN: PropertyStatus.UNKNOWN,
}


def prune(
    props: list[Property],
    program: ast.Program,
    domains: list[tuple[str, int, int]],
    mode: str = LENIENT,
    step_budget: int = DEFAULT_STEP_BUDGET,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    jobs: int = 1,
) -> list[Property]:
    """Verify every mined property and update its status in place.

    The returned list carries all properties for audit; downstream steps
    select the survivors via :func:`survivors`.
    """
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}")
    for p in props:
        if p.status is not PropertyStatus.MINED:
            raise UsageError(f"prune expects mined properties, {p.id!r} is {p.status.value}")
    ordered = sort_properties(props)

    def one(prop: Property) -> Property:
        verdict = verify_property(program, domains, prop, step_budget, max_tuples)
        return with_status(
            prop, _VERDICT_TO_STATUS[verdict.kind], counterexample=verdict.counterexample
        )

    if jobs > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, ordered))
    return [one(p) for p in ordered]


def survivors(props: list[Property], mode: str = LENIENT) -> list[Property]:
    """Proved properties, plus unknown ones in lenient mode.

    Refuted properties are always dropped from the pipeline.
    """
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}")
    keep = {PropertyStatus.PROVED}
    if mode == LENIENT:
        keep.add(PropertyStatus.UNKNOWN)
    return [p for p in props if p.status in keep]
