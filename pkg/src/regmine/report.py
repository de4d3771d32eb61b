"""Hierarchical, prioritized rendering of analysis results.

Anomalies are presented in two bands: those violating statically verified
properties first, then those from unverified (unknown) properties, which
are the likeliest false positives.  Within a band the hierarchy is
test -> function -> anomalies in priority order.  Both renderers are pure:
equal reports produce byte-identical output.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

from .analyzer import Anomaly, AnomalyLine, EdgeLine, FaultLine, priority_key
from .errors import FormatError
from .properties import (
    AutomatonProperty,
    InvariantProperty,
    Property,
    PropertyStatus,
)
from .tracefile import PASS, Trace

_STATUS_ORDER = [s.value for s in PropertyStatus]


def prioritize(anomalies: list[Anomaly]) -> list[Anomaly]:
    """Stable priority order: proved origin before unknown, then event
    order, then property id."""
    return sorted(anomalies, key=priority_key)


def _line_key(line: AnomalyLine) -> tuple[int, int, str, str]:
    rank = 0 if line.origin == "proved" else 1
    return (rank, line.event_seq, line.property_id, line.test_id)


@dataclass(frozen=True)
class AnomalyView:
    index: int  # position in the global priority order
    line: AnomalyLine
    func: str
    root: bool


@dataclass(frozen=True)
class Report:
    property_counts: dict[str, int]
    test_counts: dict[str, tuple[int, int]]  # version -> (pass, fail)
    obsolete: list[Property]
    uptodate: list[Property]
    anomalies: list[AnomalyView]  # global priority order
    edges: list[tuple[int, int, str]]  # global anomaly indices
    faults: list[FaultLine]


def build_report(
    properties: list[Property],
    traces: list[Trace],
    analyses: list[tuple[list[AnomalyLine], list[EdgeLine], list[FaultLine]]],
) -> Report:
    by_id = {p.id: p for p in properties}

    property_counts = {status: 0 for status in _STATUS_ORDER}
    for p in properties:
        property_counts[p.status.value] += 1

    test_counts: dict[str, tuple[int, int]] = {}
    for tr in traces:
        passed, failed = test_counts.get(tr.version, (0, 0))
        if tr.verdict == PASS:
            passed += 1
        else:
            failed += 1
        test_counts[tr.version] = (passed, failed)

    merged_lines: list[AnomalyLine] = []
    keyed_edges: list[tuple[AnomalyLine, AnomalyLine, str]] = []
    faults: list[FaultLine] = []
    seen: set[tuple[str, str, int]] = set()
    for lines, edges, file_faults in analyses:
        for line in lines:
            key = (line.property_id, line.test_id, line.event_seq)
            if key in seen:
                raise FormatError(f"duplicate anomaly {key}")
            seen.add(key)
            merged_lines.append(line)
        for e in edges:
            keyed_edges.append((lines[e.src], lines[e.dst], e.reason))
        faults.extend(file_faults)

    merged_lines.sort(key=_line_key)
    position = {
        (line.property_id, line.test_id, line.event_seq): i
        for i, line in enumerate(merged_lines)
    }
    global_edges = sorted(
        (
            position[(a.property_id, a.test_id, a.event_seq)],
            position[(b.property_id, b.test_id, b.event_seq)],
            reason,
        )
        for a, b, reason in keyed_edges
    )
    edge_targets = {dst for _, dst, _ in global_edges}

    views: list[AnomalyView] = []
    for i, line in enumerate(merged_lines):
        prop = by_id.get(line.property_id)
        if prop is None:
            raise FormatError(
                f"anomaly references property {line.property_id!r} not in the report inputs"
            )
        views.append(AnomalyView(i, line, prop.func, i not in edge_targets))

    for f in faults:
        if f.property_id not in by_id:
            raise FormatError(
                f"fault references property {f.property_id!r} not in the report inputs"
            )

    return Report(
        property_counts,
        test_counts,
        [p for p in properties if p.status is PropertyStatus.OBSOLETE],
        [p for p in properties if p.status is PropertyStatus.UPTODATE],
        views,
        global_edges,
        sorted(faults, key=lambda f: (f.property_id, f.args)),
    )


def describe_property(prop: Property) -> str:
    if isinstance(prop, InvariantProperty):
        return f"{prop.func} {prop.point}: {prop.lhs} {prop.op} {prop.rhs}"
    assert isinstance(prop, AutomatonProperty)
    dfa = prop.automaton
    return f"{prop.func}: call-sequence automaton k={prop.k} states={dfa.n_states}"


def _summary_lines(r: Report) -> list[str]:
    total_props = sum(r.property_counts.values())
    status_part = " ".join(f"{s}={r.property_counts[s]}" for s in _STATUS_ORDER)
    total_pass = sum(p for p, _ in r.test_counts.values())
    total_fail = sum(f for _, f in r.test_counts.values())
    lines = [
        f"properties: total={total_props} | {status_part}",
        f"tests: total={total_pass + total_fail} | pass={total_pass} fail={total_fail}",
    ]
    for version in sorted(r.test_counts):
        passed, failed = r.test_counts[version]
        lines.append(f"tests ({version}): pass={passed} fail={failed}")
    proved = sum(1 for v in r.anomalies if v.line.origin == "proved")
    lines.append(
        f"anomalies: {len(r.anomalies)} | from-proved={proved} "
        f"from-unknown={len(r.anomalies) - proved}"
    )
    lines.append(f"static faults: {len(r.faults)}")
    return lines


def _band_views(r: Report, origin: str) -> list[AnomalyView]:
    return [v for v in r.anomalies if v.line.origin == origin]


def _grouped(views: list[AnomalyView]) -> list[tuple[str, list[tuple[str, list[AnomalyView]]]]]:
    """Group a band test -> function, groups sorted, anomalies kept in
    priority order."""
    tests: dict[str, dict[str, list[AnomalyView]]] = {}
    for v in views:
        tests.setdefault(v.line.test_id, {}).setdefault(v.func, []).append(v)
    return [
        (test, [(func, tests[test][func]) for func in sorted(tests[test])])
        for test in sorted(tests)
    ]

_BAND_TITLES = (
    ("proved", "anomalies from verified properties"),
    ("unknown", "anomalies from unverified properties"),
)


def render_text(r: Report) -> str:
    lines = ["regression analysis report", "=========================="]
    lines.append("")
    lines.append("summary")
    lines.extend(f"  {s}" for s in _summary_lines(r))

    def property_section(title: str, props: list[Property]) -> None:
        if not props:
            return
        lines.append("")
        lines.append(title)
        for p in props:
            lines.append(f"  {p.id}  {describe_property(p)}  origin={p.origin}")

    property_section("obsolete properties", r.obsolete)
    property_section("up-to-date properties", r.uptodate)

    for origin, title in _BAND_TITLES:
        views = _band_views(r, origin)
        if not views:
            continue
        lines.append("")
        lines.append(title)
        for test, groups in _grouped(views):
            lines.append(f"  test {test}")
            for func, members in groups:
                lines.append(f"    function {func}")
                for v in members:
                    role = "root" if v.root else "effect"
                    lines.append(
                        f"      [{v.index}] {v.line.property_id} seq={v.line.event_seq} {role}"
                    )

    if r.edges:
        lines.append("")
        lines.append("cause-effect chains")
        by_test: dict[str, list[tuple[int, int, str]]] = {}
        for src, dst, reason in r.edges:
            by_test.setdefault(r.anomalies[src].line.test_id, []).append((src, dst, reason))
        for test in sorted(by_test):
            lines.append(f"  test {test}")
            for src, dst, reason in by_test[test]:
                lines.append(f"    [{src}] -> [{dst}] reason={reason}")

    if r.faults:
        lines.append("")
        lines.append("static regression faults")
        for f in r.faults:
            args = ",".join(str(a) for a in f.args)
            lines.append(f"  {f.property_id} args={args} outcome={f.outcome}")

    return "\n".join(lines) + "\n"


_HTML_STYLE = (
    "body{font-family:sans-serif;margin:2em;}"
    "h1{border-bottom:2px solid #333;}"
    "ul{list-style:none;padding-left:1.2em;}"
    "li.root{font-weight:bold;border-left:3px solid #b00;padding-left:4px;}"
    "li.effect{color:#444;}"
    "table{border-collapse:collapse;}"
    "td,th{border:1px solid #999;padding:2px 8px;text-align:left;}"
    ".origin{color:#666;font-size:smaller;}"
)


def render_html(r: Report) -> str:
    esc = html.escape
    parts = [
        "<!DOCTYPE html>",
        '<html><head><meta charset="utf-8"><title>regression analysis report</title>',
        f"<style>{_HTML_STYLE}</style></head><body>",
        "<h1>regression analysis report</h1>",
        "<h2>summary</h2>",
        "<ul>",
    ]
    parts.extend(f"<li>{esc(s)}</li>" for s in _summary_lines(r))
    parts.append("</ul>")

    def property_section(title: str, props: list[Property]) -> None:
        if not props:
            return
        parts.append(f"<h2>{esc(title)}</h2><ul>")
        for p in props:
            parts.append(
                f"<li><code>{esc(p.id)}</code> {esc(describe_property(p))} "
                f'<span class="origin">origin={esc(str(p.origin))}</span></li>'
            )
        parts.append("</ul>")

    property_section("obsolete properties", r.obsolete)
    property_section("up-to-date properties", r.uptodate)

    for origin, title in _BAND_TITLES:
        views = _band_views(r, origin)
        if not views:
            continue
        parts.append(f"<h2>{esc(title)}</h2>")
        for test, groups in _grouped(views):
            parts.append(f"<h3>test {esc(test)}</h3>")
            for func, members in groups:
                parts.append(f"<h4>function {esc(func)}</h4><ul>")
                for v in members:
                    role = "root" if v.root else "effect"
                    parts.append(
                        f'<li class="{role}">[{v.index}] <code>{esc(v.line.property_id)}</code> '
                        f"seq={v.line.event_seq} ({role})</li>"
                    )
                parts.append("</ul>")

    if r.edges:
        parts.append("<h2>cause-effect chains</h2><ul>")
        for src, dst, reason in r.edges:
            parts.append(f"<li>[{src}] &rarr; [{dst}] reason={esc(reason)}</li>")
        parts.append("</ul>")

    if r.faults:
        parts.append("<h2>static regression faults</h2><ul>")
        for f in r.faults:
            args = ",".join(str(a) for a in f.args)
            parts.append(
                f"<li><code>{esc(f.property_id)}</code> args={esc(args)} "
                f"outcome={esc(f.outcome)}</li>"
            )
        parts.append("</ul>")

    parts.append("</body></html>")
    return "\n".join(parts) + "\n"
