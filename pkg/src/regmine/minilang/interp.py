"""Big-step interpreter with step budget and non-invasive monitoring.

Semantics: 64-bit signed integers with wrapping overflow; division and
modulo truncate toward zero and raise ``div_by_zero`` / ``mod_by_zero`` on a
zero divisor; comparisons and the short-circuiting ``and`` / ``or`` yield
0/1; 0 is false, anything else is true.  Every statement and expression
evaluation costs one step; exceeding the budget aborts the execution.

Monitoring is configured purely by the plan: ENTER/EXIT events are emitted
for functions in ``plan.monitored`` only, and never change program
semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import UsageError
from ..tracefile import EventKind, MonitorPlan, TraceEvent
from . import ast

_WRAP = 2**64
_BIAS = 2**63


def wrap64(value: int) -> int:
    return (value + _BIAS) % _WRAP - _BIAS


class OutcomeKind(str, Enum):
    RETURNED = "returned"
    RUNTIME_ERROR = "error"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    value: int | None = None
    errcode: str | None = None

    @staticmethod
    def returned(value: int) -> "Outcome":
        return Outcome(OutcomeKind.RETURNED, value=value)

    @staticmethod
    def error(errcode: str) -> "Outcome":
        return Outcome(OutcomeKind.RUNTIME_ERROR, errcode=errcode)

    @staticmethod
    def budget_exhausted() -> "Outcome":
        return Outcome(OutcomeKind.BUDGET_EXHAUSTED)

    def render(self) -> str:
        if self.kind is OutcomeKind.RETURNED:
            return f"returned({self.value})"
        if self.kind is OutcomeKind.RUNTIME_ERROR:
            return f"error({self.errcode})"
        return "budget_exhausted"


class _Return(Exception):
    def __init__(self, value: int):
        self.value = value


class _RuntimeErr(Exception):
    def __init__(self, code: str):
        self.code = code


class _OutOfSteps(Exception):
    pass


class _Interp:
    def __init__(self, program: ast.Program, monitored: frozenset[str], budget: int):
        self.program = program
        self.monitored = monitored
        self.budget = budget
        self.steps = 0
        self.seq = 0
        self.events: list[TraceEvent] = []
        self.call_stack: list[str] = []

    def _emit(self, kind: EventKind, func: str, bindings: dict[str, int], errcode: str | None = None) -> None:
        self.events.append(TraceEvent(self.seq, kind, func, bindings, errcode))
        self.seq += 1

    def _step(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _OutOfSteps()

    def _raise_runtime(self, code: str):
        # the error event names the innermost monitored function, if any
        for fname in reversed(self.call_stack):
            if fname in self.monitored:
                self._emit(EventKind.ERROR, fname, {}, code)
                break
        raise _RuntimeErr(code)

    def run(self, args: list[int]) -> Outcome:
        entry = self.program.entry_function()
        if len(args) != len(entry.params):
            raise UsageError(
                f"arity mismatch: entry {entry.name!r} takes {len(entry.params)} "
                f"argument(s), got {len(args)}"
            )
        try:
            return Outcome.returned(self._call(self.program.entry, [wrap64(a) for a in args]))
        except _RuntimeErr as e:
            return Outcome.error(e.code)
        except _OutOfSteps:
            return Outcome.budget_exhausted()

    def _call(self, fname: str, argvals: list[int]) -> int:
        fn = self.program.functions[fname]
        env = dict(zip(fn.params, argvals))
        monitored = fname in self.monitored
        if monitored:
            self._emit(EventKind.ENTER, fname, {p: env[p] for p in fn.params})
        self.call_stack.append(fname)
        try:
            ret = 0
            try:
                for stmt in fn.body:
                    self._stmt(stmt, env)
            except _Return as r:
                ret = r.value
        finally:
            self.call_stack.pop()
        if monitored:
            bindings = {"ret": ret}
            bindings.update({p: env[p] for p in fn.params})
            self._emit(EventKind.EXIT, fname, bindings)
        return ret

    def _stmt(self, stmt: ast.Stmt, env: dict[str, int]) -> None:
        self._step()
        if isinstance(stmt, ast.Let):
            env[stmt.name] = self._expr(stmt.value, env)
        elif isinstance(stmt, ast.Assign):
            env[stmt.name] = self._expr(stmt.value, env)
        elif isinstance(stmt, ast.If):
            if self._expr(stmt.cond, env) != 0:
                for s in stmt.then:
                    self._stmt(s, env)
            else:
                for s in stmt.orelse:
                    self._stmt(s, env)
        elif isinstance(stmt, ast.While):
            while self._expr(stmt.cond, env) != 0:
                for s in stmt.body:
                    self._stmt(s, env)
        elif isinstance(stmt, ast.Return):
            raise _Return(self._expr(stmt.value, env))
        elif isinstance(stmt, ast.ExprStmt):
            self._expr(stmt.value, env)
        else:  # pragma: no cover
            raise AssertionError(f"unknown statement {stmt!r}")

    def _expr(self, expr: ast.Expr, env: dict[str, int]) -> int:
        self._step()
        if isinstance(expr, ast.IntLit):
            return expr.value
        if isinstance(expr, ast.Var):
            return env[expr.name]
        if isinstance(expr, ast.Call):
            argvals = [self._expr(a, env) for a in expr.args]
            return self._call(expr.func, argvals)
        if isinstance(expr, ast.BinOp):
            op = expr.op
            if op == "and":
                if self._expr(expr.left, env) == 0:
                    return 0
                return 1 if self._expr(expr.right, env) != 0 else 0
            if op == "or":
                if self._expr(expr.left, env) != 0:
                    return 1
                return 1 if self._expr(expr.right, env) != 0 else 0
            left = self._expr(expr.left, env)
            right = self._expr(expr.right, env)
            if op == "+":
                return wrap64(left + right)
            if op == "-":
                return wrap64(left - right)
            if op == "*":
                return wrap64(left * right)
            if op == "/":
                if right == 0:
                    self._raise_runtime("div_by_zero")
                return wrap64(_trunc_div(left, right))
            if op == "%":
                if right == 0:
                    self._raise_runtime("mod_by_zero")
                return wrap64(left - _trunc_div(left, right) * right)
            if op == "<":
                return int(left < right)
            if op == "<=":
                return int(left <= right)
            if op == "==":
                return int(left == right)
            if op == "!=":
                return int(left != right)
            if op == ">=":
                return int(left >= right)
            if op == ">":
                return int(left > right)
        raise AssertionError(f"unknown expression {expr!r}")  # pragma: no cover


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def execute(
    program: ast.Program,
    args: list[int],
    step_budget: int,
    plan: MonitorPlan,
) -> tuple[Outcome, list[TraceEvent]]:
    """Run the entry function on ``args`` and collect monitored events.

    The outcome never depends on the plan; the plan only selects which
    ENTER/EXIT/ERROR events are recorded.
    """
    if step_budget <= 0:
        raise UsageError("step budget must be positive")
    interp = _Interp(program, plan.monitored, step_budget)
    outcome = interp.run(list(args))
    return outcome, interp.events
