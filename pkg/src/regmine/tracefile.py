"""Trace and monitor-plan values plus their canonical on-disk codecs.

Both formats are line-based UTF-8 text with LF endings so that artifacts
diff cleanly in CI.  Encoding is canonical: equal values always produce
identical bytes (sets are serialized sorted, bindings keep their recorded
order, there are no timestamps).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import FormatError

BASE = "base"
UPGRADED = "upgraded"
VERSIONS = (BASE, UPGRADED)

PASS = "pass"
FAIL = "fail"
VERDICTS = (PASS, FAIL)

ERRCODES = ("div_by_zero", "mod_by_zero")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TEST_ID_RE = re.compile(r"[A-Za-z0-9_.\-]+\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")


class EventKind(str, Enum):
    ENTER = "ENTER"
    EXIT = "EXIT"
    ERROR = "ERROR"


@dataclass
class TraceEvent:
    """One monitored runtime event.

    ``bindings`` preserves recording order: parameters in declaration order
    for ENTER, ``ret`` first then parameters for EXIT, empty for ERROR.
    """

    seq: int
    kind: EventKind
    func: str
    bindings: dict[str, int] = field(default_factory=dict)
    errcode: str | None = None


@dataclass
class Trace:
    version: str
    test_id: str
    verdict: str
    events: list[TraceEvent] = field(default_factory=list)


@dataclass(frozen=True)
class MonitorPlan:
    """Externally supplied monitoring configuration.

    ``monitored`` is the set of functions whose entry/exit events are
    recorded; ``changed`` is the set of change locations, which are never
    monitored themselves.
    """

    distance: int
    changed: frozenset[str]
    monitored: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.changed & self.monitored
        if overlap:
            raise FormatError(
                "plan invariant violated: monitored overlaps changed: "
                + ",".join(sorted(overlap))
            )
        if self.distance < 0:
            raise FormatError("plan distance must be non-negative")


def _check_name(name: str, what: str, line: int | None = None) -> str:
    if not _NAME_RE.match(name):
        raise FormatError(f"invalid {what} name {name!r}", line)
    return name


def _parse_int(text: str, line: int) -> int:
    if not _INT_RE.match(text):
        raise FormatError(f"invalid integer {text!r}", line)
    return int(text)


def _encode_event(ev: TraceEvent) -> str:
    if ev.kind is EventKind.ERROR:
        return f"E {ev.seq} ERROR {ev.func} {ev.errcode}"
    parts = [f"E {ev.seq} {ev.kind.value} {ev.func}"]
    parts.extend(f"{k}={v}" for k, v in ev.bindings.items())
    return " ".join(parts)


def encode_traces(traces: list[Trace]) -> str:
    lines = ["#traces"]
    for tr in traces:
        lines.append(f"#trace version={tr.version} test={tr.test_id} verdict={tr.verdict}")
        lines.extend(_encode_event(ev) for ev in tr.events)
        lines.append("#endtrace")
    lines.append("#end")
    return "\n".join(lines) + "\n"


def _decode_event(line: str, lineno: int) -> TraceEvent:
    fields = line.split(" ")
    if len(fields) < 4:
        raise FormatError("event line needs at least 'E <seq> <kind> <func>'", lineno)
    seq = _parse_int(fields[1], lineno)
    if seq < 0:
        raise FormatError("event seq must be non-negative", lineno)
    try:
        kind = EventKind(fields[2])
    except ValueError:
        raise FormatError(f"unknown event kind {fields[2]!r}", lineno) from None
    func = _check_name(fields[3], "function", lineno)
    if kind is EventKind.ERROR:
        if len(fields) != 5:
            raise FormatError("ERROR event needs exactly one error code", lineno)
        if fields[4] not in ERRCODES:
            raise FormatError(f"unknown error code {fields[4]!r}", lineno)
        return TraceEvent(seq, kind, func, {}, fields[4])
    bindings: dict[str, int] = {}
    for tok in fields[4:]:
        name, eq, value = tok.partition("=")
        if not eq:
            raise FormatError(f"malformed binding {tok!r}", lineno)
        _check_name(name, "variable", lineno)
        if name in bindings:
            raise FormatError(f"duplicate binding {name!r}", lineno)
        bindings[name] = _parse_int(value, lineno)
    if kind is EventKind.EXIT and "ret" not in bindings:
        raise FormatError("EXIT event is missing the 'ret' binding", lineno)
    return TraceEvent(seq, kind, func, bindings)


def _check_nesting(trace: Trace, lineno_of: dict[int, int]) -> None:
    stack: list[str] = []
    last_seq = -1
    for ev in trace.events:
        lineno = lineno_of.get(id(ev))
        if ev.seq <= last_seq:
            raise FormatError("event seq is not strictly increasing", lineno)
        last_seq = ev.seq
        if ev.kind is EventKind.ENTER:
            stack.append(ev.func)
        elif ev.kind is EventKind.EXIT:
            if not stack or stack[-1] != ev.func:
                raise FormatError(
                    f"nesting violation: EXIT {ev.func} does not match open ENTER", lineno
                )
            stack.pop()
    # open frames are legal: aborted executions never emit their EXITs


def decode_traces(text: str) -> list[Trace]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "#traces":
        raise FormatError("expected '#traces' header", 1)
    traces: list[Trace] = []
    current: Trace | None = None
    lineno_of: dict[int, int] = {}
    ended = False
    for i, line in enumerate(lines[1:], start=2):
        if ended:
            raise FormatError("content after '#end'", i)
        if line == "#end":
            if current is not None:
                raise FormatError("'#end' inside an open trace", i)
            ended = True
        elif line.startswith("#trace "):
            if current is not None:
                raise FormatError("'#trace' inside an open trace", i)
            m = re.match(r"#trace version=(\S+) test=(\S+) verdict=(\S+)\Z", line)
            if not m:
                raise FormatError("malformed '#trace' line", i)
            version, test_id, verdict = m.groups()
            if version not in VERSIONS:
                raise FormatError(f"unknown version {version!r}", i)
            if not _TEST_ID_RE.match(test_id):
                raise FormatError(f"invalid test id {test_id!r}", i)
            if verdict not in VERDICTS:
                raise FormatError(f"unknown verdict {verdict!r}", i)
            current = Trace(version, test_id, verdict)
        elif line == "#endtrace":
            if current is None:
                raise FormatError("'#endtrace' without '#trace'", i)
            _check_nesting(current, lineno_of)
            traces.append(current)
            current = None
        elif line.startswith("E "):
            if current is None:
                raise FormatError("event line outside a trace", i)
            ev = _decode_event(line, i)
            current.events.append(ev)
            lineno_of[id(ev)] = i
        else:
            raise FormatError(f"unrecognized line {line!r}", i)
    if not ended:
        raise FormatError("missing '#end'", len(lines))
    return traces


def encode_plan(plan: MonitorPlan) -> str:
    lines = [f"#plan distance={plan.distance}"]
    lines.extend(f"changed {name}" for name in sorted(plan.changed))
    lines.extend(f"monitor {name}" for name in sorted(plan.monitored))
    lines.append("#end")
    return "\n".join(lines) + "\n"


def decode_plan(text: str) -> MonitorPlan:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty plan file", 1)
    m = re.match(r"#plan distance=([0-9]+)\Z", lines[0])
    if not m:
        raise FormatError("expected '#plan distance=<d>' header", 1)
    distance = int(m.group(1))
    changed: set[str] = set()
    monitored: set[str] = set()
    ended = False
    for i, line in enumerate(lines[1:], start=2):
        if ended:
            raise FormatError("content after '#end'", i)
        if line == "#end":
            ended = True
            continue
        fields = line.split(" ")
        if len(fields) != 2:
            raise FormatError(f"unrecognized line {line!r}", i)
        keyword, name = fields
        _check_name(name, "function", i)
        if keyword == "changed":
            changed.add(name)
        elif keyword == "monitor":
            monitored.add(name)
        else:
            raise FormatError(f"unrecognized keyword {keyword!r}", i)
    if not ended:
        raise FormatError("missing '#end'", len(lines))
    return MonitorPlan(distance, frozenset(changed), frozenset(monitored))
