"""Version diffing and static call graphs for MiniProc programs."""

from __future__ import annotations

from dataclasses import dataclass

from . import ast


@dataclass(frozen=True)
class ChangeSet:
    changed: frozenset[str]  # present in both versions, body or params differ
    added: frozenset[str]  # only in the upgraded version
    deleted: frozenset[str]  # only in the base version

    def locations(self) -> frozenset[str]:
        """All change locations, used to seed neighborhood computation."""
        return self.changed | self.added | self.deleted


@dataclass(frozen=True)
class CallGraph:
    """Map from every function to the set of functions it calls directly."""

    edges: dict[str, frozenset[str]]

    def callees(self, func: str) -> frozenset[str]:
        return self.edges.get(func, frozenset())


def diff_programs(base: ast.Program, upgraded: ast.Program) -> ChangeSet:
    base_names = set(base.functions)
    upg_names = set(upgraded.functions)
    changed = set()
    for name in base_names & upg_names:
        b, u = base.functions[name], upgraded.functions[name]
        if b.body_hash != u.body_hash or b.params != u.params:
            changed.add(name)
    return ChangeSet(
        frozenset(changed),
        frozenset(upg_names - base_names),
        frozenset(base_names - upg_names),
    )


def call_graph(program: ast.Program) -> CallGraph:
    edges: dict[str, frozenset[str]] = {}
    for name, fn in program.functions.items():
        callees = {
            e.func for e in ast.walk_exprs(fn.body) if isinstance(e, ast.Call)
        }
        edges[name] = frozenset(callees)
    return CallGraph(edges)
