"""Runtime checking of properties against traces.

Invariants are evaluated at every matching entry/exit event.  Automata are
simulated once per completed invocation of their scope function over the
sequence of its direct calls visible in the trace; the first symbol without
a transition, or termination in a non-accepting state, yields one violation
for that invocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import FormatError
from .properties import (
    AutomatonProperty,
    InvariantProperty,
    Property,
)
from .tracefile import EventKind, Trace

END_OF_CALLS = "end"  # observed marker for non-accepting termination


@dataclass(frozen=True)
class Violation:
    property_id: str
    test_id: str
    event_seq: int
    observed: Union[tuple[tuple[str, int], ...], str]  # bindings or symbol

    def observed_bindings(self) -> dict[str, int]:
        if isinstance(self.observed, str):
            return {}
        return dict(self.observed)

    def render_observed(self) -> str:
        if isinstance(self.observed, str):
            return self.observed
        return " ".join(f"{k}={v}" for k, v in self.observed)


@dataclass(frozen=True)
class Invocation:
    """One completed call of a scope function, as visible in a trace."""

    enter_seq: int
    exit_seq: int
    calls: tuple[tuple[str, int], ...]  # (callee, seq of its ENTER event)


def scan_invocations(trace: Trace, scope_func: str) -> list[Invocation]:
    """Completed invocations of ``scope_func`` with their direct calls.

    A direct call is an ENTER event occurring while an invocation's frame is
    the innermost open frame; calls made by deeper callees are excluded.
    Invocations aborted by an error or budget exhaustion have no EXIT event
    and are not reported.
    """
    completed: list[Invocation] = []
    stack: list[tuple[str, int, list[tuple[str, int]]]] = []
    for ev in trace.events:
        if ev.kind is EventKind.ENTER:
            if stack and stack[-1][0] == scope_func:
                stack[-1][2].append((ev.func, ev.seq))
            stack.append((ev.func, ev.seq, []))
        elif ev.kind is EventKind.EXIT:
            if not stack or stack[-1][0] != ev.func:
                raise FormatError(
                    f"trace {trace.test_id!r}: EXIT {ev.func} does not match open ENTER"
                )
            func, enter_seq, calls = stack.pop()
            if func == scope_func:
                completed.append(Invocation(enter_seq, ev.seq, tuple(calls)))
    return completed


def _eval_op(op: str, left: int, right: int) -> bool:
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    if op == "<=":
        return left <= right
    if op == ">=":
        return left >= right
    raise AssertionError(f"unknown operator {op!r}")  # pragma: no cover


def _check_invariant(prop: InvariantProperty, trace: Trace) -> list[Violation]:
    wanted = EventKind.ENTER if prop.point == "entry" else EventKind.EXIT
    violations: list[Violation] = []
    for ev in trace.events:
        if ev.func != prop.func or ev.kind is not wanted:
            continue
        if prop.lhs not in ev.bindings:
            raise FormatError(
                f"variable {prop.lhs!r} absent from {prop.func} {prop.point} event "
                f"(plan/property mismatch)"
            )
        left = ev.bindings[prop.lhs]
        if isinstance(prop.rhs, str):
            if prop.rhs not in ev.bindings:
                raise FormatError(
                    f"variable {prop.rhs!r} absent from {prop.func} {prop.point} event "
                    f"(plan/property mismatch)"
                )
            right = ev.bindings[prop.rhs]
            observed = ((prop.lhs, left), (prop.rhs, right))
        else:
            right = prop.rhs
            observed = ((prop.lhs, left),)
        if not _eval_op(prop.op, left, right):
            violations.append(Violation(prop.id, trace.test_id, ev.seq, observed))
    return violations


def _check_automaton(prop: AutomatonProperty, trace: Trace) -> list[Violation]:
    dfa = prop.automaton
    violations: list[Violation] = []
    for invocation in scan_invocations(trace, prop.func):
        state = dfa.initial
        failed = False
        for symbol, seq in invocation.calls:
            nxt = dfa.step(state, symbol)
            if nxt is None:
                violations.append(Violation(prop.id, trace.test_id, seq, symbol))
                failed = True
                break
            state = nxt
        if not failed and state not in dfa.accepting:
            violations.append(
                Violation(prop.id, trace.test_id, invocation.exit_seq, END_OF_CALLS)
            )
    return violations


def check_trace(prop: Property, trace: Trace) -> list[Violation]:
    """All violations of ``prop`` in ``trace``, in event order."""
    if isinstance(prop, InvariantProperty):
        return _check_invariant(prop, trace)
    return _check_automaton(prop, trace)
