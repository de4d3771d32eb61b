"""MiniProc: parser, interpreter, differ, call graphs, and suite runner."""

from .ast import ENTRY_NAME, Function, Program
from .changes import CallGraph, ChangeSet, call_graph, diff_programs
from .interp import Outcome, OutcomeKind, execute, wrap64
from .parser import parse_program
from .scenario import (
    Scenario,
    TestCase,
    decode_scenario,
    encode_scenario,
    ordered_domains,
    run_suite,
    validate_scenario,
)

__all__ = [
    "ENTRY_NAME",
    "Function",
    "Program",
    "CallGraph",
    "ChangeSet",
    "call_graph",
    "diff_programs",
    "Outcome",
    "OutcomeKind",
    "execute",
    "wrap64",
    "parse_program",
    "Scenario",
    "TestCase",
    "decode_scenario",
    "encode_scenario",
    "ordered_domains",
    "run_suite",
    "validate_scenario",
]
