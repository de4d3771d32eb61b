"""Mined property values (value invariants and call-sequence automata),
their lifecycle statuses, and the canonical property-file codec.

File format (line-based, LF):

    #properties
    inv <id> <func> <entry|exit> <lhs> <op> <rhs> [origin=<o>] status=<s>
    fsm <id> <func> k=<k> init=<state> accept=<s1,s2,...> [origin=<o>] status=<s>
    trans <state> <symbol> <state'>
    endfsm
    cex <prop-id> args=<int,...>
    #end

Properties are always serialized sorted by id.  Automaton states use the
canonical numbering: breadth-first from the initial state, exploring
symbols in lexicographic order.  A ``cex`` line records the refuting
argument tuple and follows the property it belongs to.  ``origin=``
preserves the verification verdict (proved or unknown) once a property has
been classified obsolete or up-to-date.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .errors import FormatError

ENTRY = "entry"
EXIT = "exit"
POINTS = (ENTRY, EXIT)

INV_OPS = ("==", "!=", "<=", ">=")
_OP_SLUG = {"==": "eq", "!=": "ne", "<=": "le", ">=": "ge"}

ORIGIN_PROVED = "proved"
ORIGIN_UNKNOWN = "unknown"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"-?[0-9]+\Z")


class PropertyStatus(str, Enum):
    MINED = "mined"
    PROVED = "proved"
    REFUTED = "refuted"
    UNKNOWN = "unknown"
    OBSOLETE = "obsolete"
    UPTODATE = "uptodate"


@dataclass(frozen=True)
class Dfa:
    """Deterministic finite automaton over function-name symbols."""

    n_states: int
    initial: int
    accepting: frozenset[int]
    transitions: dict[int, dict[str, int]]  # state -> symbol -> state

    def step(self, state: int, symbol: str) -> int | None:
        return self.transitions.get(state, {}).get(symbol)

    def accepts(self, sequence: tuple[str, ...]) -> bool:
        state: int | None = self.initial
        for symbol in sequence:
            state = self.step(state, symbol)
            if state is None:
                return False
        return state in self.accepting

    def alphabet(self) -> list[str]:
        symbols = {s for trans in self.transitions.values() for s in trans}
        return sorted(symbols)

    def canonical(self) -> "Dfa":
        """Renumber states breadth-first from init, symbols in sorted order."""
        order: dict[int, int] = {self.initial: 0}
        queue = deque([self.initial])
        while queue:
            state = queue.popleft()
            trans = self.transitions.get(state, {})
            for symbol in sorted(trans):
                target = trans[symbol]
                if target not in order:
                    order[target] = len(order)
                    queue.append(target)
        transitions: dict[int, dict[str, int]] = {}
        for state, new_id in order.items():
            trans = self.transitions.get(state, {})
            if trans:
                transitions[new_id] = {s: order[t] for s, t in sorted(trans.items())}
        accepting = frozenset(order[s] for s in self.accepting if s in order)
        return Dfa(len(order), 0, accepting, transitions)

    def language_upto(self, max_len: int) -> set[tuple[str, ...]]:
        """Every accepted sequence of length at most ``max_len``."""
        accepted: set[tuple[str, ...]] = set()
        frontier: list[tuple[int, tuple[str, ...]]] = [(self.initial, ())]
        if self.initial in self.accepting:
            accepted.add(())
        for _ in range(max_len):
            nxt: list[tuple[int, tuple[str, ...]]] = []
            for state, prefix in frontier:
                for symbol, target in self.transitions.get(state, {}).items():
                    word = prefix + (symbol,)
                    if target in self.accepting:
                        accepted.add(word)
                    nxt.append((target, word))
            frontier = nxt
        return accepted


@dataclass(frozen=True)
class InvariantProperty:
    id: str
    func: str
    point: str  # entry | exit
    lhs: str
    op: str  # == != <= >=
    rhs: Union[int, str]  # integer constant or variable name
    status: PropertyStatus = PropertyStatus.MINED
    origin: str | None = None  # proved | unknown, set at classification
    counterexample: tuple[int, ...] | None = None


@dataclass(frozen=True)
class AutomatonProperty:
    id: str
    func: str
    k: int
    automaton: Dfa
    status: PropertyStatus = PropertyStatus.MINED
    origin: str | None = None
    counterexample: tuple[int, ...] | None = None


Property = Union[InvariantProperty, AutomatonProperty]


def invariant_id(func: str, point: str, lhs: str, op: str, rhs: Union[int, str]) -> str:
    return f"inv:{func}:{point}:{lhs}:{_OP_SLUG[op]}:{rhs}"


def automaton_id(func: str, k: int) -> str:
    return f"fsm:{func}:k{k}"


def sort_properties(props: list[Property]) -> list[Property]:
    return sorted(props, key=lambda p: p.id)


def with_status(
    prop: Property,
    status: PropertyStatus,
    origin: str | None = None,
    counterexample: tuple[int, ...] | None = None,
) -> Property:
    return replace(prop, status=status, origin=origin, counterexample=counterexample)


# ---- codec ----


def _encode_cex(prop: Property) -> list[str]:
    if prop.counterexample is None:
        return []
    args = ",".join(str(a) for a in prop.counterexample)
    return [f"cex {prop.id} args={args}"]


def _tail_fields(prop: Property) -> str:
    origin = f"origin={prop.origin} " if prop.origin is not None else ""
    return f"{origin}status={prop.status.value}"


def encode_properties(props: list[Property]) -> str:
    lines = ["#properties"]
    for prop in sort_properties(props):
        if isinstance(prop, InvariantProperty):
            lines.append(
                f"inv {prop.id} {prop.func} {prop.point} {prop.lhs} {prop.op} "
                f"{prop.rhs} {_tail_fields(prop)}"
            )
            lines.extend(_encode_cex(prop))
        else:
            dfa = prop.automaton.canonical()
            accept = ",".join(str(s) for s in sorted(dfa.accepting))
            lines.append(
                f"fsm {prop.id} {prop.func} k={prop.k} init={dfa.initial} "
                f"accept={accept} {_tail_fields(prop)}"
            )
            for state in sorted(dfa.transitions):
                for symbol, target in dfa.transitions[state].items():
                    lines.append(f"trans {state} {symbol} {target}")
            lines.append("endfsm")
            lines.extend(_encode_cex(prop))
    lines.append("#end")
    return "\n".join(lines) + "\n"


def _parse_tail(fields: list[str], lineno: int) -> tuple[str | None, PropertyStatus]:
    origin: str | None = None
    status: PropertyStatus | None = None
    for tok in fields:
        key, eq, value = tok.partition("=")
        if not eq:
            raise FormatError(f"malformed field {tok!r}", lineno)
        if key == "origin":
            if value not in (ORIGIN_PROVED, ORIGIN_UNKNOWN):
                raise FormatError(f"unknown origin {value!r}", lineno)
            origin = value
        elif key == "status":
            try:
                status = PropertyStatus(value)
            except ValueError:
                raise FormatError(f"unknown status {value!r}", lineno) from None
        else:
            raise FormatError(f"unknown field {key!r}", lineno)
    if status is None:
        raise FormatError("missing status= field", lineno)
    return origin, status


def _parse_args_field(tok: str, lineno: int) -> tuple[int, ...]:
    if not tok.startswith("args="):
        raise FormatError("expected 'args=<ints>'", lineno)
    raw = tok[len("args=") :]
    if raw == "":
        return ()
    parts = raw.split(",")
    if not all(_INT_RE.match(p) for p in parts):
        raise FormatError(f"malformed args {raw!r}", lineno)
    return tuple(int(p) for p in parts)


def decode_properties(text: str) -> list[Property]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "#properties":
        raise FormatError("expected '#properties' header", 1)
    props: list[Property] = []
    by_id: dict[str, int] = {}
    ended = False

    i = 1
    while i < len(lines):
        line = lines[i]
        lineno = i + 1
        i += 1
        if ended:
            raise FormatError("content after '#end'", lineno)
        if line == "#end":
            ended = True
            continue
        fields = line.split(" ")
        if fields[0] == "inv":
            if len(fields) not in (8, 9):
                raise FormatError("malformed 'inv' line", lineno)
            _, pid, func, point, lhs, op, rhs_raw = fields[:7]
            if not _NAME_RE.match(func):
                raise FormatError(f"invalid function name {func!r}", lineno)
            if point not in POINTS:
                raise FormatError(f"unknown point {point!r}", lineno)
            if not _NAME_RE.match(lhs):
                raise FormatError(f"invalid variable {lhs!r}", lineno)
            if op not in INV_OPS:
                raise FormatError(f"unknown operator {op!r}", lineno)
            rhs: Union[int, str]
            if _INT_RE.match(rhs_raw):
                rhs = int(rhs_raw)
            elif _NAME_RE.match(rhs_raw):
                rhs = rhs_raw
                if rhs == lhs:
                    raise FormatError("invariant relates a variable to itself", lineno)
            else:
                raise FormatError(f"malformed rhs {rhs_raw!r}", lineno)
            origin, status = _parse_tail(fields[7:], lineno)
            if pid != invariant_id(func, point, lhs, op, rhs):
                raise FormatError(f"id {pid!r} does not match invariant fields", lineno)
            if pid in by_id:
                raise FormatError(f"duplicate property id {pid!r}", lineno)
            by_id[pid] = len(props)
            props.append(InvariantProperty(pid, func, point, lhs, op, rhs, status, origin))
        elif fields[0] == "fsm":
            if len(fields) not in (7, 8):
                raise FormatError("malformed 'fsm' line", lineno)
            _, pid, func = fields[:3]
            if not _NAME_RE.match(func):
                raise FormatError(f"invalid function name {func!r}", lineno)
            if not fields[3].startswith("k="):
                raise FormatError("expected 'k=<k>'", lineno)
            try:
                k = int(fields[3][2:])
            except ValueError:
                raise FormatError("malformed k", lineno) from None
            if k < 1:
                raise FormatError("k must be positive", lineno)
            if not fields[4].startswith("init="):
                raise FormatError("expected 'init=<state>'", lineno)
            try:
                initial = int(fields[4][5:])
            except ValueError:
                raise FormatError("malformed init state", lineno) from None
            if not fields[5].startswith("accept="):
                raise FormatError("expected 'accept=<states>'", lineno)
            raw = fields[5][7:]
            accepting: set[int] = set()
            if raw:
                for part in raw.split(","):
                    if not part.isdigit():
                        raise FormatError(f"malformed accept state {part!r}", lineno)
                    accepting.add(int(part))
            origin, status = _parse_tail(fields[6:], lineno)
            transitions: dict[int, dict[str, int]] = {}
            states = {initial} | accepting
            closed = False
            while i < len(lines):
                tline = lines[i]
                tno = i + 1
                i += 1
                if tline == "endfsm":
                    closed = True
                    break
                tfields = tline.split(" ")
                if tfields[0] != "trans" or len(tfields) != 4:
                    raise FormatError("expected 'trans <s> <symbol> <s2>' or 'endfsm'", tno)
                if not (tfields[1].isdigit() and tfields[3].isdigit()):
                    raise FormatError("malformed transition states", tno)
                src, dst = int(tfields[1]), int(tfields[3])
                symbol = tfields[2]
                if not _NAME_RE.match(symbol):
                    raise FormatError(f"invalid symbol {symbol!r}", tno)
                if symbol in transitions.get(src, {}):
                    raise FormatError(
                        f"nondeterministic transition from {src} on {symbol!r}", tno
                    )
                transitions.setdefault(src, {})[symbol] = dst
                states.add(src)
                states.add(dst)
            if not closed:
                raise FormatError("missing 'endfsm'", len(lines))
            n_states = max(states) + 1 if states else 1
            dfa = Dfa(n_states, initial, frozenset(accepting), transitions)
            if pid != automaton_id(func, k):
                raise FormatError(f"id {pid!r} does not match automaton fields", lineno)
            if pid in by_id:
                raise FormatError(f"duplicate property id {pid!r}", lineno)
            by_id[pid] = len(props)
            props.append(AutomatonProperty(pid, func, k, dfa, status, origin))
        elif fields[0] == "cex":
            if len(fields) != 3:
                raise FormatError("malformed 'cex' line", lineno)
            pid = fields[1]
            if pid not in by_id:
                raise FormatError(f"cex for unknown property {pid!r}", lineno)
            args = _parse_args_field(fields[2], lineno)
            idx = by_id[pid]
            if props[idx].counterexample is not None:
                raise FormatError(f"duplicate cex for {pid!r}", lineno)
            props[idx] = replace(props[idx], counterexample=args)
        else:
            raise FormatError(f"unrecognized line {line!r}", lineno)
    if not ended:
        raise FormatError("missing '#end'", len(lines))
    return props
