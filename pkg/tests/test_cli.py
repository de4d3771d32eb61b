from __future__ import annotations

import os
from pathlib import Path

import pytest

from conftest import FIXTURES
from regmine.cli import main

BASE = str(FIXTURES / "base.mp")
UPGRADED = str(FIXTURES / "upgraded.mp")
BUGGY = str(FIXTURES / "upgraded_buggy.mp")
SCN_BASE = str(FIXTURES / "scenario_base.scn")
SCN_UPG = str(FIXTURES / "scenario_upgraded.scn")

PIPELINE_FILES = [
    "plan.txt",
    "traces_base.txt",
    "traces_upgraded.txt",
    "properties_mined.txt",
    "properties_pruned.txt",
    "properties_classified.txt",
    "analysis.txt",
    "faults.txt",
    "report.txt",
    "report.html",
]


def pipeline_args(out_dir: Path, upgraded: str = BUGGY, scenario: str = SCN_UPG, **flags):
    args = [
        "pipeline",
        "--base",
        BASE,
        "--upgraded",
        upgraded,
        "--scenario-base",
        SCN_BASE,
        "--scenario-upgraded",
        scenario,
        "--out-dir",
        str(out_dir),
    ]
    for key, value in flags.items():
        args.extend([f"--{key.replace('_', '-')}", str(value)])
    return args


def read_all(out_dir: Path) -> dict[str, str]:
    return {name: (out_dir / name).read_text() for name in PIPELINE_FILES}


def test_missing_input_file_is_usage_error(tmp_path, capsys):
    code = main(["plan", "--base", "nope.mp", "--upgraded", UPGRADED, "--out", str(tmp_path / "p")])
    assert code == 2
    assert "cannot read input" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["plan", "--frobnicate"]) == 2


def test_malformed_program_is_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.mp"
    bad.write_text("fn main(x) { return y; }")
    code = main(["plan", "--base", str(bad), "--upgraded", UPGRADED, "--out", str(tmp_path / "p")])
    assert code == 3
    assert "invalid input" in capsys.readouterr().err


def test_malformed_trace_file_is_validation_error(tmp_path):
    traces = tmp_path / "t.txt"
    traces.write_text("#traces\nE 0 ENTER f\n#end\n")
    plan = tmp_path / "plan.txt"
    plan.write_text("#plan distance=1\n#end\n")
    code = main(["mine", "--traces", str(traces), "--plan", str(plan), "--out", str(tmp_path / "o")])
    assert code == 3


def test_plan_command(tmp_path):
    out = tmp_path / "plan.txt"
    assert main(["plan", "--base", BASE, "--upgraded", BUGGY, "--out", str(out)]) == 0
    assert out.read_text() == "#plan distance=1\nchanged clamp\nmonitor main\n#end\n"


def test_pipeline_on_buggy_upgrade_exits_one(tmp_path):
    out_dir = tmp_path / "out"
    assert main(pipeline_args(out_dir)) == 1
    for name in PIPELINE_FILES:
        assert (out_dir / name).exists(), name
    report = (out_dir / "report.txt").read_text()
    assert "anomalies: 1" in report
    assert "static faults: 1" in report


def test_pipeline_identical_versions_exits_zero(tmp_path):
    out_dir = tmp_path / "out"
    assert main(pipeline_args(out_dir, upgraded=BASE, scenario=SCN_BASE)) == 0
    report = (out_dir / "report.txt").read_text()
    assert "anomalies: 0" in report
    assert "static faults: 0" in report
    assert "properties: total=0" in report


def test_pipeline_equals_manual_stage_sequence(tmp_path):
    auto_dir = tmp_path / "auto"
    assert main(pipeline_args(auto_dir)) == 1

    manual = tmp_path / "manual"
    manual.mkdir()
    p = lambda name: str(manual / name)
    assert main(["plan", "--base", BASE, "--upgraded", BUGGY, "--out", p("plan.txt")]) == 0
    assert (
        main(
            ["run", "--program", BASE, "--scenario", SCN_BASE, "--plan", p("plan.txt"),
             "--version", "base", "--out", p("traces_base.txt")]
        )
        == 0
    )
    assert (
        main(
            ["run", "--program", BUGGY, "--scenario", SCN_UPG, "--plan", p("plan.txt"),
             "--version", "upgraded", "--out", p("traces_upgraded.txt")]
        )
        == 0
    )
    assert (
        main(
            ["mine", "--traces", p("traces_base.txt"), "--plan", p("plan.txt"),
             "--out", p("properties_mined.txt")]
        )
        == 0
    )
    assert (
        main(
            ["prune", "--properties", p("properties_mined.txt"), "--program", BASE,
             "--scenario", SCN_BASE, "--out", p("properties_pruned.txt")]
        )
        == 0
    )
    assert (
        main(
            ["classify", "--properties", p("properties_pruned.txt"),
             "--traces", p("traces_upgraded.txt"), "--out", p("properties_classified.txt")]
        )
        == 0
    )
    assert (
        main(
            ["analyze", "--properties", p("properties_classified.txt"),
             "--traces", p("traces_upgraded.txt"), "--upgraded", BUGGY,
             "--out", p("analysis.txt")]
        )
        == 1
    )
    assert (
        main(
            ["check", "--properties", p("properties_classified.txt"), "--upgraded", BUGGY,
             "--scenario", SCN_UPG, "--out", p("faults.txt")]
        )
        == 1
    )
    report_inputs = []
    for name in ("properties_classified.txt", "traces_base.txt", "traces_upgraded.txt",
                 "analysis.txt", "faults.txt"):
        report_inputs.extend(["--in", p(name)])
    assert main(["report", *report_inputs, "--format", "text", "--out", p("report.txt")]) == 0
    assert main(["report", *report_inputs, "--format", "html", "--out", p("report.html")]) == 0

    auto = read_all(auto_dir)
    for name in PIPELINE_FILES:
        assert (manual / name).read_text() == auto[name], name


def test_rerun_is_idempotent(tmp_path):
    out_dir = tmp_path / "out"
    assert main(pipeline_args(out_dir)) == 1
    first = read_all(out_dir)
    assert main(pipeline_args(out_dir)) == 1
    assert read_all(out_dir) == first


def test_report_to_stdout(tmp_path, capsys):
    out_dir = tmp_path / "out"
    main(pipeline_args(out_dir))
    code = main(["report", "--in", str(out_dir / "properties_classified.txt")])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("regression analysis report")


def test_analyze_exit_zero_without_findings(tmp_path):
    out_dir = tmp_path / "out"
    main(pipeline_args(out_dir, upgraded=UPGRADED))  # intended change only, no bug
    code = main(
        ["analyze", "--properties", str(out_dir / "properties_classified.txt"),
         "--traces", str(out_dir / "traces_upgraded.txt"), "--upgraded", UPGRADED,
         "--out", str(out_dir / "analysis2.txt")]
    )
    assert code == 0


def test_outputs_written_atomically(tmp_path):
    # no partial artifacts appear next to the target on failure
    out = tmp_path / "plan.txt"
    bad = tmp_path / "bad.mp"
    bad.write_text("fn main(x) {")
    assert main(["plan", "--base", str(bad), "--upgraded", UPGRADED, "--out", str(out)]) == 3
    assert not out.exists()
    assert list(tmp_path.glob("plan.txt.*")) == []
