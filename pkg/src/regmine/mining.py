"""Property mining from base-version traces.

Two property families are mined for every monitored function: value
invariants over the variables observable at entry and exit events, and a
per-function automaton over the sequence of direct calls each invocation
performs.  Mining output is a pure function of its inputs: traces are
processed in test-id order and properties are returned sorted by id.
"""

from __future__ import annotations

from collections import defaultdict

from .checking import scan_invocations
from .errors import UsageError
from .properties import (
    AutomatonProperty,
    Dfa,
    InvariantProperty,
    Property,
    PropertyStatus,
    automaton_id,
    invariant_id,
    sort_properties,
)
from .tracefile import BASE, EventKind, MonitorPlan, Trace

DEFAULT_MIN_SUPPORT = 3
DEFAULT_K = 2


def _require_base(traces: list[Trace]) -> list[Trace]:
    for tr in traces:
        if tr.version != BASE:
            raise UsageError(
                f"mining needs base-version traces, got version={tr.version!r} "
                f"for test {tr.test_id!r}"
            )
    return sorted(traces, key=lambda tr: tr.test_id)


def _variables(sample: dict[str, int]) -> list[str]:
    """Observation order: parameters first, then ret."""
    names = [k for k in sample if k != "ret"]
    if "ret" in sample:
        names.append("ret")
    return names


def _unary_invariants(func: str, point: str, var: str, values: list[int]) -> list[InvariantProperty]:
    lo, hi = min(values), max(values)
    out = []

    def emit(lhs: str, op: str, rhs: int) -> None:
        out.append(
            InvariantProperty(invariant_id(func, point, lhs, op, rhs), func, point, lhs, op, rhs)
        )

    if lo == hi:
        emit(var, "==", lo)
        return out
    emit(var, ">=", lo)
    emit(var, "<=", hi)
    # x != 0 only when the observed range does not already exclude zero
    if 0 not in values and lo < 0 < hi:
        emit(var, "!=", 0)
    return out


def _pair_invariants(
    func: str, point: str, x: str, y: str, xs: list[int], ys: list[int]
) -> list[InvariantProperty]:
    out = []

    def emit(op: str) -> None:
        out.append(
            InvariantProperty(invariant_id(func, point, x, op, y), func, point, x, op, y)
        )

    if all(a == b for a, b in zip(xs, ys)):
        emit("==")
        return out
    if all(a <= b for a, b in zip(xs, ys)):
        emit("<=")
    if all(a >= b for a, b in zip(xs, ys)):
        emit(">=")
    if all(a != b for a, b in zip(xs, ys)):
        emit("!=")
    return out


def mine_invariants(
    traces: list[Trace], plan: MonitorPlan, min_support: int = DEFAULT_MIN_SUPPORT
) -> list[InvariantProperty]:
    """Every comparison-template instance holding on all observed samples.

    Points with fewer than ``min_support`` samples yield nothing: a support
    floor is the first defense against overfitted properties.
    """
    if min_support < 1:
        raise UsageError("min_support must be positive")
    samples: dict[tuple[str, str], list[dict[str, int]]] = defaultdict(list)
    for tr in _require_base(traces):
        for ev in tr.events:
            if ev.func not in plan.monitored:
                continue
            if ev.kind is EventKind.ENTER:
                samples[(ev.func, "entry")].append(ev.bindings)
            elif ev.kind is EventKind.EXIT:
                samples[(ev.func, "exit")].append(ev.bindings)

    props: list[InvariantProperty] = []
    for (func, point), rows in sorted(samples.items()):
        if len(rows) < min_support:
            continue
        variables = _variables(rows[0])
        for row in rows[1:]:
            if _variables(row) != variables:
                raise UsageError(
                    f"inconsistent bindings at ({func}, {point}); trace/plan mismatch"
                )
        columns = {v: [row[v] for row in rows] for v in variables}
        for v in variables:
            props.extend(_unary_invariants(func, point, v, columns[v]))
        for i, x in enumerate(variables):
            for y in variables[i + 1 :]:
                props.extend(_pair_invariants(func, point, x, y, columns[x], columns[y]))
    return sort_properties(props)  # type: ignore[return-value]


# ---- automata ----


def build_pta(sequences: list[tuple[str, ...]]) -> Dfa:
    """Prefix-tree acceptor accepting exactly the given sequence set."""
    transitions: dict[int, dict[str, int]] = {0: {}}
    accepting: set[int] = set()
    n = 1
    for seq in sequences:
        state = 0
        for symbol in seq:
            trans = transitions.setdefault(state, {})
            if symbol not in trans:
                trans[symbol] = n
                transitions[n] = {}
                n += 1
            state = trans[symbol]
        accepting.add(state)
    return Dfa(n, 0, frozenset(accepting), transitions).canonical()


def _tails(dfa: Dfa, k: int) -> dict[int, frozenset[tuple[str, ...]]]:
    """k-tail of each state: accepted suffixes of length at most k.

    The empty suffix belongs to a state's tail exactly when the state is
    accepting, so acceptance within k steps is part of the signature.
    """
    memo: dict[tuple[int, int], frozenset[tuple[str, ...]]] = {}

    def tail(state: int, depth: int) -> frozenset[tuple[str, ...]]:
        key = (state, depth)
        if key in memo:
            return memo[key]
        out: set[tuple[str, ...]] = set()
        if state in dfa.accepting:
            out.add(())
        if depth > 0:
            for symbol, target in dfa.transitions.get(state, {}).items():
                for suffix in tail(target, depth - 1):
                    out.add((symbol,) + suffix)
        result = frozenset(out)
        memo[key] = result
        return result

    return {s: tail(s, k) for s in range(dfa.n_states)}


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _quotient(dfa: Dfa, groups: list[list[int]]) -> Dfa:
    """Merge each group of states, then fold until deterministic."""
    uf = _UnionFind(dfa.n_states)
    for group in groups:
        for other in group[1:]:
            uf.union(group[0], other)
    # determinize: two transitions from one class on the same symbol force
    # their targets into one class as well
    changed = True
    while changed:
        changed = False
        seen: dict[tuple[int, str], int] = {}
        for src in range(dfa.n_states):
            for symbol, dst in dfa.transitions.get(src, {}).items():
                key = (uf.find(src), symbol)
                target = uf.find(dst)
                if key in seen and seen[key] != target:
                    uf.union(seen[key], target)
                    changed = True
                    seen = {}
                    break
                seen[key] = target
            else:
                continue
            break

    roots = sorted({uf.find(s) for s in range(dfa.n_states)})
    index = {root: i for i, root in enumerate(roots)}
    transitions: dict[int, dict[str, int]] = {}
    for src in range(dfa.n_states):
        for symbol, dst in dfa.transitions.get(src, {}).items():
            transitions.setdefault(index[uf.find(src)], {})[symbol] = index[uf.find(dst)]
    accepting = frozenset(index[uf.find(s)] for s in dfa.accepting)
    return Dfa(len(roots), index[uf.find(dfa.initial)], accepting, transitions).canonical()


def ktail_merge(pta: Dfa, k: int) -> Dfa:
    """Merge states with equal k-tails until a fixpoint, determinizing as
    needed.  Every sequence the PTA accepts remains accepted."""
    if k < 1:
        raise UsageError("k must be positive")
    dfa = pta.canonical()
    while True:
        tails = _tails(dfa, k)
        by_tail: dict[frozenset[tuple[str, ...]], list[int]] = defaultdict(list)
        for state in range(dfa.n_states):
            by_tail[tails[state]].append(state)
        groups = [g for g in by_tail.values() if len(g) > 1]
        if not groups:
            return dfa
        dfa = _quotient(dfa, groups)


def mine_automata(
    traces: list[Trace], plan: MonitorPlan, k: int = DEFAULT_K
) -> list[AutomatonProperty]:
    """One k-tail automaton per monitored function with >= 1 invocation.

    Training sequences are the direct calls each completed invocation makes
    to functions that are themselves monitored or changed; anything else
    never shows up in goal-driven traces and is excluded for robustness on
    hand-written ones.
    """
    if k < 1:
        raise UsageError("k must be positive")
    visible = plan.monitored | plan.changed
    ordered = _require_base(traces)
    props: list[AutomatonProperty] = []
    for func in sorted(plan.monitored):
        sequences: list[tuple[str, ...]] = []
        for tr in ordered:
            for invocation in scan_invocations(tr, func):
                sequences.append(
                    tuple(callee for callee, _ in invocation.calls if callee in visible)
                )
        if not sequences:
            continue
        dfa = ktail_merge(build_pta(sequences), k)
        props.append(AutomatonProperty(automaton_id(func, k), func, k, dfa))
    return props


def mine_properties(
    traces: list[Trace],
    plan: MonitorPlan,
    min_support: int = DEFAULT_MIN_SUPPORT,
    k: int = DEFAULT_K,
) -> list[Property]:
    """Both property families, canonically sorted, all with status mined."""
    props: list[Property] = []
    props.extend(mine_invariants(traces, plan, min_support))
    props.extend(mine_automata(traces, plan, k))
    assert all(p.status is PropertyStatus.MINED for p in props)
    return sort_properties(props)
