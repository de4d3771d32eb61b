"""Abstract syntax for MiniProc, the bundled deterministic subject language.

Programs are pure over 64-bit signed integers (wrapping overflow); the only
observable effects are the monitored entry/exit events the interpreter emits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

ENTRY_NAME = "main"


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / % < <= == != >= > and or
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[IntLit, Var, BinOp, Call]


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class Return:
    value: Expr


@dataclass(frozen=True)
class ExprStmt:
    value: Expr


Stmt = Union[Let, Assign, If, While, Return, ExprStmt]


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    body_hash: str  # hash of the comment-stripped, whitespace-normalized body


@dataclass(frozen=True)
class Program:
    functions: dict[str, Function]
    entry: str

    def entry_function(self) -> Function:
        return self.functions[self.entry]


def walk_exprs(stmts: tuple[Stmt, ...]):
    """Yield every expression node reachable from a statement list."""

    def from_expr(e: Expr):
        yield e
        if isinstance(e, BinOp):
            yield from from_expr(e.left)
            yield from from_expr(e.right)
        elif isinstance(e, Call):
            for a in e.args:
                yield from from_expr(a)

    for s in stmts:
        if isinstance(s, (Let, Assign, Return, ExprStmt)):
            yield from from_expr(s.value)
        elif isinstance(s, If):
            yield from from_expr(s.cond)
            yield from walk_exprs(s.then)
            yield from walk_exprs(s.orelse)
        elif isinstance(s, While):
            yield from from_expr(s.cond)
            yield from walk_exprs(s.body)
