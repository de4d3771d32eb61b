"""Regression pipeline core: obsolete-property classification, anomaly
detection on failing tests, cause-effect chains, and static fault detection.

Analysis results are staged in a line-based file:

    #analysis
    anomaly <prop-id> test=<id> seq=<n> origin=<proved|unknown>
    edge <i> <j> reason=<shared_variable|call_relation>
    fault <prop-id> args=<int,...> outcome=<...>
    #end

Anomaly lines appear in priority order; ``edge`` lines reference anomaly
lines by 0-based position in the file and always point from an earlier
event to a strictly later one.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .checking import Violation, check_trace
from .errors import FormatError, UsageError
from .minilang import ast
from .minilang.changes import CallGraph
from .minilang.interp import execute
from .properties import Property, PropertyStatus, sort_properties, with_status
from .tracefile import FAIL, PASS, UPGRADED, MonitorPlan, Trace
from .verify import (
    DEFAULT_MAX_TUPLES,
    DEFAULT_STEP_BUDGET,
    VerdictKind,
    verify_property,
)

REASON_CALL = "call_relation"
REASON_SHARED = "shared_variable"

_ORIGIN_RANK = {"proved": 0, "unknown": 1}


@dataclass(frozen=True)
class Anomaly:
    """A violation of an up-to-date property in a failing upgraded run."""

    violation: Violation
    origin: str  # proved | unknown: how the property survived verification
    func: str  # the violated property's function

    @property
    def test_id(self) -> str:
        return self.violation.test_id

    @property
    def event_seq(self) -> int:
        return self.violation.event_seq

    @property
    def property_id(self) -> str:
        return self.violation.property_id


def priority_key(anomaly: Anomaly) -> tuple[int, int, str, str]:
    """Verified-property anomalies first, then event order, then ids."""
    return (
        _ORIGIN_RANK[anomaly.origin],
        anomaly.event_seq,
        anomaly.property_id,
        anomaly.test_id,
    )


@dataclass(frozen=True)
class ChainEdge:
    src: int  # index into the anomaly list the edge was built over
    dst: int
    reason: str


@dataclass(frozen=True)
class CauseEffectGraph:
    anomalies: tuple[Anomaly, ...]
    edges: tuple[ChainEdge, ...]
    roots: tuple[int, ...]  # indices with no incoming edge


@dataclass(frozen=True)
class RegressionFaultReport:
    property_id: str
    args: tuple[int, ...]
    outcome: str  # rendered outcome of replaying the counterexample


def classify_obsolete(
    props: list[Property], passing_runs: list[Trace]
) -> tuple[list[Property], list[Property]]:
    """Split surviving properties into (obsolete, up-to-date).

    A property violated by any passing upgraded run was intentionally
    invalidated by the upgrade; everything else is still expected to hold.
    The verification verdict is preserved as the property's origin.
    """
    for p in props:
        if p.status not in (PropertyStatus.PROVED, PropertyStatus.UNKNOWN):
            raise UsageError(
                f"classification expects proved/unknown properties, {p.id!r} is {p.status.value}"
            )
    for tr in passing_runs:
        if tr.verdict != PASS:
            raise UsageError(f"classification expects passing runs, {tr.test_id!r} failed")
        if tr.version != UPGRADED:
            raise UsageError(
                f"classification expects upgraded-version runs, {tr.test_id!r} is {tr.version}"
            )
    obsolete: list[Property] = []
    uptodate: list[Property] = []
    for prop in sort_properties(props):
        origin = prop.status.value
        violated = any(check_trace(prop, tr) for tr in passing_runs)
        status = PropertyStatus.OBSOLETE if violated else PropertyStatus.UPTODATE
        updated = with_status(prop, status, origin=origin)
        (obsolete if violated else uptodate).append(updated)
    return obsolete, uptodate


def detect_anomalies(uptodate: list[Property], failing_runs: list[Trace]) -> list[Anomaly]:
    """Every violation of an up-to-date property in a failing run, sorted by
    priority (verified origins first)."""
    for p in uptodate:
        if p.status is not PropertyStatus.UPTODATE:
            raise UsageError(
                f"anomaly detection expects up-to-date properties, {p.id!r} is {p.status.value}"
            )
        if p.origin not in _ORIGIN_RANK:
            raise UsageError(f"property {p.id!r} has no verification origin")
    for tr in failing_runs:
        if tr.verdict != FAIL:
            raise UsageError(f"anomaly detection expects failing runs, {tr.test_id!r} passed")
        if tr.version != UPGRADED:
            raise UsageError(
                f"anomaly detection expects upgraded-version runs, {tr.test_id!r} is {tr.version}"
            )
    anomalies: list[Anomaly] = []
    for tr in sorted(failing_runs, key=lambda t: t.test_id):
        for prop in sort_properties(uptodate):
            for violation in check_trace(prop, tr):
                anomalies.append(Anomaly(violation, prop.origin or "unknown", prop.func))
    return sorted(anomalies, key=priority_key)


def _related(a: Anomaly, b: Anomaly, cg: CallGraph) -> str | None:
    if a.func in cg.callees(b.func) or b.func in cg.callees(a.func):
        return REASON_CALL
    shared = set(a.violation.observed_bindings()) & set(b.violation.observed_bindings())
    if shared:
        return REASON_SHARED
    return None


def build_chains(anomalies: list[Anomaly], trace: Trace, cg: CallGraph) -> CauseEffectGraph:
    """Cause-effect graph over one failing test's anomalies.

    An edge runs from an earlier anomaly to a strictly later one when their
    functions are related in the call graph (either direction) or their
    observations share a variable; earlier events are candidate causes.
    """
    for a in anomalies:
        if a.test_id != trace.test_id:
            raise UsageError(
                f"anomaly of test {a.test_id!r} passed with trace of {trace.test_id!r}"
            )
    known_seqs = {ev.seq for ev in trace.events}
    for a in anomalies:
        if a.event_seq not in known_seqs:
            raise UsageError(f"anomaly seq {a.event_seq} not present in trace")
    edges: list[ChainEdge] = []
    for i, a in enumerate(anomalies):
        for j, b in enumerate(anomalies):
            if a.event_seq >= b.event_seq or i == j:
                continue
            reason = _related(a, b, cg)
            if reason is not None:
                edges.append(ChainEdge(i, j, reason))
    edges.sort(key=lambda e: (e.src, e.dst))
    targets = {e.dst for e in edges}
    roots = tuple(i for i in range(len(anomalies)) if i not in targets)
    return CauseEffectGraph(tuple(anomalies), tuple(edges), roots)


def static_check(
    uptodate: list[Property],
    upgraded: ast.Program,
    domains: list[tuple[str, int, int]],
    step_budget: int = DEFAULT_STEP_BUDGET,
    max_tuples: int = DEFAULT_MAX_TUPLES,
    jobs: int = 1,
) -> list[RegressionFaultReport]:
    """Verify up-to-date properties against the upgraded program; every
    refutation is a regression fault no test has revealed."""
    for p in uptodate:
        if p.status is not PropertyStatus.UPTODATE:
            raise UsageError(
                f"static check expects up-to-date properties, {p.id!r} is {p.status.value}"
            )
    ordered = sort_properties(uptodate)

    def one(prop: Property) -> RegressionFaultReport | None:
        verdict = verify_property(upgraded, domains, prop, step_budget, max_tuples)
        if verdict.kind is not VerdictKind.REFUTED:
            return None
        assert verdict.counterexample is not None
        outcome, _ = execute(
            upgraded,
            list(verdict.counterexample),
            step_budget,
            MonitorPlan(0, frozenset(), frozenset()),
        )
        return RegressionFaultReport(prop.id, verdict.counterexample, outcome.render())

    if jobs > 1 and len(ordered) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, ordered))
    else:
        results = [one(p) for p in ordered]
    return [r for r in results if r is not None]


# ---- analysis file codec ----


@dataclass(frozen=True)
class AnomalyLine:
    property_id: str
    test_id: str
    event_seq: int
    origin: str


@dataclass(frozen=True)
class EdgeLine:
    src: int  # 0-based index among the file's anomaly lines
    dst: int
    reason: str


@dataclass(frozen=True)
class FaultLine:
    property_id: str
    args: tuple[int, ...]
    outcome: str


_ANOMALY_RE = re.compile(
    r"anomaly (?P<pid>\S+) test=(?P<test>\S+) seq=(?P<seq>[0-9]+) origin=(?P<origin>proved|unknown)\Z"
)
_EDGE_RE = re.compile(
    r"edge (?P<src>[0-9]+) (?P<dst>[0-9]+) reason=(?P<reason>shared_variable|call_relation)\Z"
)
_FAULT_RE = re.compile(
    r"fault (?P<pid>\S+) args=(?P<args>(-?[0-9]+(,-?[0-9]+)*)?) outcome=(?P<outcome>\S+)\Z"
)


def encode_analysis(
    anomalies: list[AnomalyLine], edges: list[EdgeLine], faults: list[FaultLine]
) -> str:
    lines = ["#analysis"]
    for a in anomalies:
        lines.append(
            f"anomaly {a.property_id} test={a.test_id} seq={a.event_seq} origin={a.origin}"
        )
    for e in sorted(edges, key=lambda e: (e.src, e.dst)):
        lines.append(f"edge {e.src} {e.dst} reason={e.reason}")
    for f in sorted(faults, key=lambda f: (f.property_id, f.args)):
        args = ",".join(str(a) for a in f.args)
        lines.append(f"fault {f.property_id} args={args} outcome={f.outcome}")
    lines.append("#end")
    return "\n".join(lines) + "\n"


def decode_analysis(text: str) -> tuple[list[AnomalyLine], list[EdgeLine], list[FaultLine]]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "#analysis":
        raise FormatError("expected '#analysis' header", 1)
    anomalies: list[AnomalyLine] = []
    edges: list[EdgeLine] = []
    faults: list[FaultLine] = []
    ended = False
    for i, line in enumerate(lines[1:], start=2):
        if ended:
            raise FormatError("content after '#end'", i)
        if line == "#end":
            ended = True
            continue
        if line.startswith("anomaly "):
            m = _ANOMALY_RE.match(line)
            if not m:
                raise FormatError("malformed 'anomaly' line", i)
            anomalies.append(
                AnomalyLine(m["pid"], m["test"], int(m["seq"]), m["origin"])
            )
        elif line.startswith("edge "):
            m = _EDGE_RE.match(line)
            if not m:
                raise FormatError("malformed 'edge' line", i)
            src, dst = int(m["src"]), int(m["dst"])
            if src >= len(anomalies) or dst >= len(anomalies):
                raise FormatError("edge references an anomaly not yet listed", i)
            edges.append(EdgeLine(src, dst, m["reason"]))
        elif line.startswith("fault "):
            m = _FAULT_RE.match(line)
            if not m:
                raise FormatError("malformed 'fault' line", i)
            args = tuple(int(p) for p in m["args"].split(",")) if m["args"] else ()
            faults.append(FaultLine(m["pid"], args, m["outcome"]))
        else:
            raise FormatError(f"unrecognized line {line!r}", i)
    if not ended:
        raise FormatError("missing '#end'", len(lines))
    return anomalies, edges, faults


def analysis_records(
    anomalies: list[Anomaly], graphs: dict[str, CauseEffectGraph]
) -> tuple[list[AnomalyLine], list[EdgeLine]]:
    """Flatten prioritized anomalies and per-test chains to file records."""
    lines = [
        AnomalyLine(a.property_id, a.test_id, a.event_seq, a.origin) for a in anomalies
    ]
    position = {
        (a.property_id, a.test_id, a.event_seq): idx for idx, a in enumerate(anomalies)
    }
    edge_lines: list[EdgeLine] = []
    for graph in graphs.values():
        for edge in graph.edges:
            a = graph.anomalies[edge.src]
            b = graph.anomalies[edge.dst]
            edge_lines.append(
                EdgeLine(
                    position[(a.property_id, a.test_id, a.event_seq)],
                    position[(b.property_id, b.test_id, b.event_seq)],
                    edge.reason,
                )
            )
    edge_lines.sort(key=lambda e: (e.src, e.dst))
    return lines, edge_lines
