"""Scenario files: input domains plus a concrete test suite for one program.

Format (line-based, LF):

    #scenario
    domain <param> <lo> <hi>
    test <id> args=<int>[,<int>...] expect=<int>|error
    #end
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import FormatError, UsageError
from ..tracefile import (
    BASE,
    FAIL,
    PASS,
    UPGRADED,
    MonitorPlan,
    Trace,
)
from . import ast
from .interp import Outcome, OutcomeKind, execute

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TEST_ID_RE = re.compile(r"[A-Za-z0-9_.\-]+\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class, despite the name

    id: str
    args: tuple[int, ...]
    expect_value: int | None  # None means "expect a runtime error"

    def matches(self, outcome: Outcome) -> bool:
        if self.expect_value is None:
            return outcome.kind is OutcomeKind.RUNTIME_ERROR
        return outcome.kind is OutcomeKind.RETURNED and outcome.value == self.expect_value


@dataclass(frozen=True)
class Scenario:
    domains: dict[str, tuple[int, int]]  # inclusive [lo, hi] per entry parameter
    tests: tuple[TestCase, ...]


def encode_scenario(scenario: Scenario) -> str:
    lines = ["#scenario"]
    for name in sorted(scenario.domains):
        lo, hi = scenario.domains[name]
        lines.append(f"domain {name} {lo} {hi}")
    for t in scenario.tests:
        args = ",".join(str(a) for a in t.args)
        expect = "error" if t.expect_value is None else str(t.expect_value)
        lines.append(f"test {t.id} args={args} expect={expect}")
    lines.append("#end")
    return "\n".join(lines) + "\n"


def decode_scenario(text: str) -> Scenario:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "#scenario":
        raise FormatError("expected '#scenario' header", 1)
    domains: dict[str, tuple[int, int]] = {}
    tests: list[TestCase] = []
    seen_ids: set[str] = set()
    ended = False
    for i, line in enumerate(lines[1:], start=2):
        if ended:
            raise FormatError("content after '#end'", i)
        if line == "#end":
            ended = True
            continue
        fields = line.split(" ")
        if fields[0] == "domain":
            if len(fields) != 4:
                raise FormatError("expected 'domain <param> <lo> <hi>'", i)
            name = fields[1]
            if not _NAME_RE.match(name):
                raise FormatError(f"invalid parameter name {name!r}", i)
            if name in domains:
                raise FormatError(f"duplicate domain for {name!r}", i)
            if not (_INT_RE.match(fields[2]) and _INT_RE.match(fields[3])):
                raise FormatError("domain bounds must be integers", i)
            lo, hi = int(fields[2]), int(fields[3])
            if lo > hi:
                raise FormatError(f"empty domain [{lo}, {hi}]", i)
            domains[name] = (lo, hi)
        elif fields[0] == "test":
            if len(fields) != 4:
                raise FormatError("expected 'test <id> args=... expect=...'", i)
            test_id = fields[1]
            if not _TEST_ID_RE.match(test_id):
                raise FormatError(f"invalid test id {test_id!r}", i)
            if test_id in seen_ids:
                raise FormatError(f"duplicate test id {test_id!r}", i)
            seen_ids.add(test_id)
            if not fields[2].startswith("args="):
                raise FormatError("expected 'args=<ints>'", i)
            raw = fields[2][len("args=") :]
            args: tuple[int, ...] = ()
            if raw:
                parts = raw.split(",")
                if not all(_INT_RE.match(p) for p in parts):
                    raise FormatError(f"malformed args {raw!r}", i)
                args = tuple(int(p) for p in parts)
            if not fields[3].startswith("expect="):
                raise FormatError("expected 'expect=<int>|error'", i)
            raw = fields[3][len("expect=") :]
            if raw == "error":
                expect: int | None = None
            elif _INT_RE.match(raw):
                expect = int(raw)
            else:
                raise FormatError(f"malformed expectation {raw!r}", i)
            tests.append(TestCase(test_id, args, expect))
        else:
            raise FormatError(f"unrecognized line {line!r}", i)
    if not ended:
        raise FormatError("missing '#end'", len(lines))
    return Scenario(domains, tuple(tests))


def validate_scenario(program: ast.Program, scenario: Scenario) -> None:
    """Check the scenario against the program's entry signature."""
    params = program.entry_function().params
    missing = [p for p in params if p not in scenario.domains]
    if missing:
        raise FormatError("missing domain for parameter(s): " + ", ".join(missing))
    extra = [d for d in scenario.domains if d not in params]
    if extra:
        raise FormatError("domain for unknown parameter(s): " + ", ".join(sorted(extra)))
    for t in scenario.tests:
        if len(t.args) != len(params):
            raise FormatError(
                f"test {t.id!r} has {len(t.args)} arg(s), entry takes {len(params)}"
            )
        for p, a in zip(params, t.args):
            lo, hi = scenario.domains[p]
            if not lo <= a <= hi:
                raise FormatError(
                    f"test {t.id!r}: argument {p}={a} outside domain [{lo}, {hi}]"
                )


def ordered_domains(program: ast.Program, scenario: Scenario) -> list[tuple[str, int, int]]:
    """Domains in entry-parameter order, the enumeration order for verification."""
    validate_scenario(program, Scenario(scenario.domains, ()))
    return [
        (p, scenario.domains[p][0], scenario.domains[p][1])
        for p in program.entry_function().params
    ]


def run_suite(
    program: ast.Program,
    scenario: Scenario,
    plan: MonitorPlan,
    version_tag: str,
    step_budget: int,
) -> list[Trace]:
    """Execute every test under the plan, one verdict-tagged trace per test."""
    if version_tag not in (BASE, UPGRADED):
        raise UsageError(f"version tag must be 'base' or 'upgraded', got {version_tag!r}")
    validate_scenario(program, scenario)
    traces = []
    for t in scenario.tests:
        outcome, events = execute(program, list(t.args), step_budget, plan)
        verdict = PASS if t.matches(outcome) else FAIL
        traces.append(Trace(version_tag, t.id, verdict, events))
    return traces
