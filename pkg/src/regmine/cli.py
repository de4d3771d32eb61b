"""Command-line pipeline, step by step or end to end.

Every stage reads and writes plain text artifacts so intermediate results
drop into CI jobs as inspectable files.  Exit codes: 0 clean, 1 anomalies
or faults found, 2 usage error, 3 parse/validation error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import analyzer, mining, report, scope, verify
from .errors import FormatError, MiniProcError, UsageError
from .minilang import (
    call_graph,
    decode_scenario,
    ordered_domains,
    parse_program,
    run_suite,
)
from .properties import PropertyStatus, decode_properties, encode_properties
from .tracefile import (
    FAIL,
    PASS,
    UPGRADED,
    decode_plan,
    decode_traces,
    encode_plan,
    encode_traces,
)

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INVALID = 3


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_program(path: str):
    return parse_program(_read(path))


def _load_scenario(path: str):
    return decode_scenario(_read(path))


# ---- stage implementations (shared by subcommands and pipeline) ----


def do_plan(base: str, upgraded: str, distance: int, out: str) -> None:
    plan = scope.build_plan(_load_program(base), _load_program(upgraded), distance)
    _write(out, encode_plan(plan))


def do_run(program: str, scenario: str, plan: str, version: str, budget: int, out: str) -> None:
    traces = run_suite(
        _load_program(program),
        _load_scenario(scenario),
        decode_plan(_read(plan)),
        version,
        budget,
    )
    _write(out, encode_traces(traces))


def do_mine(traces: str, plan: str, min_support: int, k: int, out: str) -> None:
    props = mining.mine_properties(
        decode_traces(_read(traces)), decode_plan(_read(plan)), min_support, k
    )
    _write(out, encode_properties(props))


def do_prune(
    properties: str, program: str, scenario: str, mode: str, budget: int, jobs: int, out: str
) -> None:
    prog = _load_program(program)
    domains = ordered_domains(prog, _load_scenario(scenario))
    props = verify.prune(
        decode_properties(_read(properties)), prog, domains, mode, budget, jobs=jobs
    )
    _write(out, encode_properties(props))


def do_classify(properties: str, traces: str, mode: str, out: str) -> None:
    props = decode_properties(_read(properties))
    kept = verify.survivors(props, mode)
    passing = [
        tr
        for tr in decode_traces(_read(traces))
        if tr.version == UPGRADED and tr.verdict == PASS
    ]
    obsolete, uptodate = analyzer.classify_obsolete(kept, passing)
    survivor_ids = {p.id for p in kept}
    rest = [p for p in props if p.id not in survivor_ids]
    _write(out, encode_properties(rest + obsolete + uptodate))


def do_analyze(properties: str, traces: str, upgraded: str, out: str) -> int:
    """Returns the number of anomalies found."""
    props = decode_properties(_read(properties))
    uptodate = [p for p in props if p.status is PropertyStatus.UPTODATE]
    runs = decode_traces(_read(traces))
    failing = [tr for tr in runs if tr.version == UPGRADED and tr.verdict == FAIL]
    anomalies = analyzer.detect_anomalies(uptodate, failing)
    cg = call_graph(_load_program(upgraded))
    graphs = {}
    for tr in sorted(failing, key=lambda t: t.test_id):
        per_test = [a for a in anomalies if a.test_id == tr.test_id]
        if per_test:
            graphs[tr.test_id] = analyzer.build_chains(per_test, tr, cg)
    lines, edges = analyzer.analysis_records(anomalies, graphs)
    _write(out, analyzer.encode_analysis(lines, edges, []))
    return len(anomalies)


def do_check(properties: str, upgraded: str, scenario: str, budget: int, jobs: int, out: str) -> int:
    """Returns the number of static regression faults found."""
    props = decode_properties(_read(properties))
    uptodate = [p for p in props if p.status is PropertyStatus.UPTODATE]
    prog = _load_program(upgraded)
    domains = ordered_domains(prog, _load_scenario(scenario))
    faults = analyzer.static_check(uptodate, prog, domains, budget, jobs=jobs)
    fault_lines = [analyzer.FaultLine(f.property_id, f.args, f.outcome) for f in faults]
    _write(out, analyzer.encode_analysis([], [], fault_lines))
    return len(faults)


def do_report(inputs: list[str], fmt: str, out: str | None) -> None:
    properties = []
    seen_ids: set[str] = set()
    traces = []
    analyses = []
    for path in inputs:
        text = _read(path)
        head = text.split("\n", 1)[0]
        if head == "#properties":
            for p in decode_properties(text):
                if p.id in seen_ids:
                    raise FormatError(f"duplicate property id {p.id!r} across inputs")
                seen_ids.add(p.id)
                properties.append(p)
        elif head == "#traces":
            traces.extend(decode_traces(text))
        elif head == "#analysis":
            analyses.append(analyzer.decode_analysis(text))
        else:
            raise FormatError(f"{path}: unrecognized artifact header {head!r}")
    rep = report.build_report(properties, traces, analyses)
    text = report.render_text(rep) if fmt == "text" else report.render_html(rep)
    if out is None:
        sys.stdout.write(text)
    else:
        _write(out, text)


def do_pipeline(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = {
        name: str(out_dir / f"{name}.txt")
        for name in (
            "plan",
            "traces_base",
            "traces_upgraded",
            "properties_mined",
            "properties_pruned",
            "properties_classified",
            "analysis",
            "faults",
            "report",
        )
    }
    do_plan(args.base, args.upgraded, args.distance, path["plan"])
    do_run(args.base, args.scenario_base, path["plan"], "base", args.budget, path["traces_base"])
    do_run(
        args.upgraded,
        args.scenario_upgraded,
        path["plan"],
        "upgraded",
        args.budget,
        path["traces_upgraded"],
    )
    do_mine(path["traces_base"], path["plan"], args.min_support, args.k, path["properties_mined"])
    do_prune(
        path["properties_mined"],
        args.base,
        args.scenario_base,
        args.mode,
        args.budget,
        args.jobs,
        path["properties_pruned"],
    )
    do_classify(
        path["properties_pruned"], path["traces_upgraded"], args.mode, path["properties_classified"]
    )
    n_anomalies = do_analyze(
        path["properties_classified"], path["traces_upgraded"], args.upgraded, path["analysis"]
    )
    n_faults = do_check(
        path["properties_classified"],
        args.upgraded,
        args.scenario_upgraded,
        args.budget,
        args.jobs,
        path["faults"],
    )
    report_inputs = [
        path["properties_classified"],
        path["traces_base"],
        path["traces_upgraded"],
        path["analysis"],
        path["faults"],
    ]
    do_report(report_inputs, "text", path["report"])
    do_report(report_inputs, "html", str(out_dir / "report.html"))
    return EXIT_FINDINGS if (n_anomalies or n_faults) else EXIT_CLEAN


# ---- argument parsing ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regmine",
        description="regression analysis via mined and verified behavioral properties",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute the goal-driven monitor plan")
    p.add_argument("--base", required=True)
    p.add_argument("--upgraded", required=True)
    p.add_argument("--distance", type=int, default=scope.DEFAULT_DISTANCE)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=lambda a: (do_plan(a.base, a.upgraded, a.distance, a.out), EXIT_CLEAN)[1])

    p = sub.add_parser("run", help="execute a test suite under a monitor plan")
    p.add_argument("--program", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--version", choices=["base", "upgraded"], required=True)
    p.add_argument("--budget", type=int, default=verify.DEFAULT_STEP_BUDGET)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (do_run(a.program, a.scenario, a.plan, a.version, a.budget, a.out), EXIT_CLEAN)[1]
    )

    p = sub.add_parser("mine", help="mine invariants and call-sequence automata from traces")
    p.add_argument("--traces", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--min-support", type=int, default=mining.DEFAULT_MIN_SUPPORT)
    p.add_argument("--k", type=int, default=mining.DEFAULT_K)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (do_mine(a.traces, a.plan, a.min_support, a.k, a.out), EXIT_CLEAN)[1]
    )

    p = sub.add_parser("prune", help="verify mined properties over the declared domains")
    p.add_argument("--properties", required=True)
    p.add_argument("--program", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=list(verify.MODES), default=verify.LENIENT)
    p.add_argument("--budget", type=int, default=verify.DEFAULT_STEP_BUDGET)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (
            do_prune(a.properties, a.program, a.scenario, a.mode, a.budget, a.jobs, a.out),
            EXIT_CLEAN,
        )[1]
    )

    p = sub.add_parser("classify", help="split surviving properties into obsolete/up-to-date")
    p.add_argument("--properties", required=True)
    p.add_argument("--traces", required=True, help="upgraded-version traces; passing runs are used")
    p.add_argument("--mode", choices=list(verify.MODES), default=verify.LENIENT)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (do_classify(a.properties, a.traces, a.mode, a.out), EXIT_CLEAN)[1]
    )

    p = sub.add_parser("analyze", help="explain failing tests via up-to-date property violations")
    p.add_argument("--properties", required=True)
    p.add_argument("--traces", required=True, help="upgraded-version traces; failing runs are used")
    p.add_argument("--upgraded", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (
            EXIT_FINDINGS if do_analyze(a.properties, a.traces, a.upgraded, a.out) else EXIT_CLEAN
        )
    )

    p = sub.add_parser("check", help="statically detect regression faults missed by the suite")
    p.add_argument("--properties", required=True)
    p.add_argument("--upgraded", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--budget", type=int, default=verify.DEFAULT_STEP_BUDGET)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(
        handler=lambda a: (
            EXIT_FINDINGS
            if do_check(a.properties, a.upgraded, a.scenario, a.budget, a.jobs, a.out)
            else EXIT_CLEAN
        )
    )

    p = sub.add_parser("report", help="render analysis artifacts as text or HTML")
    p.add_argument("--in", dest="inputs", action="append", required=True, metavar="FILE")
    p.add_argument("--format", choices=["text", "html"], default="text")
    p.add_argument("--out", default=None, help="output file; standard output when omitted")
    p.set_defaults(handler=lambda a: (do_report(a.inputs, a.format, a.out), EXIT_CLEAN)[1])

    p = sub.add_parser("pipeline", help="run all stages, writing artifacts into a directory")
    p.add_argument("--base", required=True)
    p.add_argument("--upgraded", required=True)
    p.add_argument("--scenario-base", required=True)
    p.add_argument("--scenario-upgraded", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--distance", type=int, default=scope.DEFAULT_DISTANCE)
    p.add_argument("--budget", type=int, default=verify.DEFAULT_STEP_BUDGET)
    p.add_argument("--min-support", type=int, default=mining.DEFAULT_MIN_SUPPORT)
    p.add_argument("--k", type=int, default=mining.DEFAULT_K)
    p.add_argument("--mode", choices=list(verify.MODES), default=verify.LENIENT)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=do_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.handler(args)
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError) as e:
        print(f"regmine: cannot read input: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"regmine: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (MiniProcError, FormatError) as e:
        print(f"regmine: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
