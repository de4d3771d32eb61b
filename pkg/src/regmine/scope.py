"""Goal-driven monitor plans: trace the neighborhood of a change, not the change.

The neighborhood is measured as hop distance over the undirected union of
both versions' call graphs, so callers and callees of changed code are both
covered.  Changed, added, and deleted functions all count as change
locations for the distance computation; only functions present in both
versions are ever monitored (their data stays comparable across versions),
and the changed functions themselves are always excluded.
"""

from __future__ import annotations

from collections import deque

from .minilang import ast
from .minilang.changes import call_graph, diff_programs
from .tracefile import MonitorPlan

DEFAULT_DISTANCE = 1


def _undirected_union(base: ast.Program, upgraded: ast.Program) -> dict[str, set[str]]:
    adjacency: dict[str, set[str]] = {}
    for program in (base, upgraded):
        graph = call_graph(program)
        for caller, callees in graph.edges.items():
            adjacency.setdefault(caller, set())
            for callee in callees:
                adjacency.setdefault(callee, set())
                adjacency[caller].add(callee)
                adjacency[callee].add(caller)
    return adjacency


def build_plan(base: ast.Program, upgraded: ast.Program, distance: int) -> MonitorPlan:
    if distance < 0:
        raise ValueError("distance must be non-negative")
    diff = diff_programs(base, upgraded)
    adjacency = _undirected_union(base, upgraded)

    # multi-source BFS from every change location
    dist: dict[str, int] = {name: 0 for name in diff.locations()}
    queue = deque(sorted(dist))
    while queue:
        current = queue.popleft()
        if dist[current] >= distance:
            continue
        for neighbor in adjacency.get(current, ()):
            if neighbor not in dist:
                dist[neighbor] = dist[current] + 1
                queue.append(neighbor)

    both_versions = set(base.functions) & set(upgraded.functions)
    monitored = {
        name
        for name, d in dist.items()
        if d <= distance and name in both_versions and name not in diff.changed
    }
    return MonitorPlan(distance, diff.changed, frozenset(monitored))
