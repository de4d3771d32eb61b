"""Recursive-descent parser for MiniProc.

Grammar (UTF-8, LF, ``//`` line comments):

    program := funcdef+
    funcdef := "fn" NAME "(" [NAME ("," NAME)*] ")" block
    block   := "{" stmt* "}"
    stmt    := "let" NAME "=" expr ";" | NAME "=" expr ";"
             | "if" expr block ["else" block] | "while" expr block
             | "return" expr ";" | expr ";"
    expr    := precedence climbing: or < and < comparisons < additive
               < multiplicative < unary "-" < primary

Parsing also performs the semantic checks: unique function and parameter
names, every call targets a defined function, and every variable read (or
assignment target) is preceded by a parameter or let binding on all paths.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from ..errors import MiniProcError
from . import ast

KEYWORDS = {"fn", "let", "if", "else", "while", "return", "and", "or"}

_MAX_LITERAL = 2**63 - 1

# longest-match first
_SYMBOLS = ["<=", ">=", "==", "!=", "(", ")", "{", "}", ",", ";", "=", "<", ">", "+", "-", "*", "/", "%"]

_COMPARISONS = {"<", "<=", "==", "!=", ">=", ">"}
_ADDITIVE = {"+", "-"}
_MULTIPLICATIVE = {"*", "/", "%"}

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # "name" | "int" | "sym" | "eof"
    text: str
    line: int
    col: int
    offset: int


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        m = _NAME_RE.match(source, i)
        if m:
            text = m.group()
            tokens.append(Token("name", text, line, col, i))
            i = m.end()
            col += len(text)
            continue
        m = _INT_RE.match(source, i)
        if m:
            text = m.group()
            tokens.append(Token("int", text, line, col, i))
            i = m.end()
            col += len(text)
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col, i))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise MiniProcError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("eof", "", line, col, n))
    return tokens


def normalize_body(body_source: str) -> str:
    """Strip ``//`` comments and collapse whitespace runs to single spaces."""
    no_comments = re.sub(r"//[^\n]*", "", body_source)
    return re.sub(r"\s+", " ", no_comments).strip()


def body_hash(body_source: str) -> str:
    return hashlib.sha256(normalize_body(body_source).encode("utf-8")).hexdigest()


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise MiniProcError(message, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.kind != "eof" else "end of input"
            self.error(f"expected {want!r}, found {got!r}", tok)
        return self.next()

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_keyword(self, word: str) -> bool:
        return self.at("name", word)

    def parse_name(self, what: str) -> Token:
        tok = self.peek()
        if tok.kind != "name" or tok.text in KEYWORDS:
            self.error(f"expected {what}", tok)
        return self.next()

    # ---- toplevel ----

    def parse_program(self) -> ast.Program:
        functions: dict[str, ast.Function] = {}
        if self.at("eof"):
            self.error("empty program: at least one function definition required")
        while not self.at("eof"):
            fn, name_tok = self.parse_funcdef()
            if fn.name in functions:
                self.error(f"duplicate name: function {fn.name!r}", name_tok)
            functions[fn.name] = fn
        if ast.ENTRY_NAME not in functions:
            raise MiniProcError(f"no entry function {ast.ENTRY_NAME!r} defined")
        program = ast.Program(functions, ast.ENTRY_NAME)
        self._check_calls(program)
        return program

    def parse_funcdef(self) -> tuple[ast.Function, Token]:
        self.expect("name", "fn")
        name_tok = self.parse_name("function name")
        self.expect("sym", "(")
        params: list[str] = []
        if not self.at("sym", ")"):
            while True:
                p = self.parse_name("parameter name")
                if p.text in params:
                    self.error(f"duplicate name: parameter {p.text!r}", p)
                params.append(p.text)
                if self.at("sym", ","):
                    self.next()
                else:
                    break
        self.expect("sym", ")")
        open_tok = self.peek()
        body = self.parse_block()
        close_tok = self.tokens[self.pos - 1]  # the "}" just consumed
        span = self.source[open_tok.offset : close_tok.offset + 1]
        self._check_bindings(body, set(params))
        return (
            ast.Function(name_tok.text, tuple(params), body, body_hash(span)),
            name_tok,
        )

    def parse_block(self) -> tuple[ast.Stmt, ...]:
        self.expect("sym", "{")
        stmts: list[ast.Stmt] = []
        while not self.at("sym", "}"):
            if self.at("eof"):
                self.error("unterminated block: expected '}'")
            stmts.append(self.parse_stmt())
        self.expect("sym", "}")
        return tuple(stmts)

    # ---- statements ----

    def parse_stmt(self) -> ast.Stmt:
        if self.at_keyword("let"):
            self.next()
            name = self.parse_name("variable name")
            self.expect("sym", "=")
            value = self.parse_expr()
            self.expect("sym", ";")
            return ast.Let(name.text, value)
        if self.at_keyword("if"):
            self.next()
            cond = self.parse_expr()
            then = self.parse_block()
            orelse: tuple[ast.Stmt, ...] = ()
            if self.at_keyword("else"):
                self.next()
                orelse = self.parse_block()
            return ast.If(cond, then, orelse)
        if self.at_keyword("while"):
            self.next()
            cond = self.parse_expr()
            body = self.parse_block()
            return ast.While(cond, body)
        if self.at_keyword("return"):
            self.next()
            value = self.parse_expr()
            self.expect("sym", ";")
            return ast.Return(value)
        if (
            self.peek().kind == "name"
            and self.peek().text not in KEYWORDS
            and self.peek(1).kind == "sym"
            and self.peek(1).text == "="
        ):
            name = self.next()
            self.next()  # "="
            value = self.parse_expr()
            self.expect("sym", ";")
            return ast.Assign(name.text, value)
        value = self.parse_expr()
        self.expect("sym", ";")
        return ast.ExprStmt(value)

    # ---- expressions ----

    def parse_expr(self) -> ast.Expr:
        return self.parse_or()

    def parse_or(self) -> ast.Expr:
        left = self.parse_and()
        while self.at_keyword("or"):
            self.next()
            left = ast.BinOp("or", left, self.parse_and())
        return left

    def parse_and(self) -> ast.Expr:
        left = self.parse_comparison()
        while self.at_keyword("and"):
            self.next()
            left = ast.BinOp("and", left, self.parse_comparison())
        return left

    def parse_comparison(self) -> ast.Expr:
        left = self.parse_additive()
        while self.peek().kind == "sym" and self.peek().text in _COMPARISONS:
            op = self.next().text
            left = ast.BinOp(op, left, self.parse_additive())
        return left

    def parse_additive(self) -> ast.Expr:
        left = self.parse_multiplicative()
        while self.peek().kind == "sym" and self.peek().text in _ADDITIVE:
            op = self.next().text
            left = ast.BinOp(op, left, self.parse_multiplicative())
        return left

    def parse_multiplicative(self) -> ast.Expr:
        left = self.parse_unary()
        while self.peek().kind == "sym" and self.peek().text in _MULTIPLICATIVE:
            op = self.next().text
            left = ast.BinOp(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> ast.Expr:
        # negation desugars to 0 - x, so negative constants are writable
        if self.at("sym", "-"):
            self.next()
            return ast.BinOp("-", ast.IntLit(0), self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> ast.Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            value = int(tok.text)
            if value > _MAX_LITERAL:
                self.error("integer literal out of 64-bit range", tok)
            return ast.IntLit(value)
        if tok.kind == "name" and tok.text not in KEYWORDS:
            self.next()
            if self.at("sym", "("):
                self.next()
                args: list[ast.Expr] = []
                if not self.at("sym", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at("sym", ","):
                            self.next()
                        else:
                            break
                self.expect("sym", ")")
                return ast.Call(tok.text, tuple(args))
            return ast.Var(tok.text)
        if tok.kind == "sym" and tok.text == "(":
            self.next()
            inner = self.parse_expr()
            self.expect("sym", ")")
            return inner
        self.error("expected an expression", tok)
        raise AssertionError("unreachable")

    # ---- semantic checks ----

    def _check_calls(self, program: ast.Program) -> None:
        for fn in program.functions.values():
            for e in ast.walk_exprs(fn.body):
                if isinstance(e, ast.Call) and e.func not in program.functions:
                    raise MiniProcError(
                        f"undefined call target {e.func!r} in function {fn.name!r}"
                    )

    def _check_bindings(self, body: tuple[ast.Stmt, ...], params: set[str]) -> None:
        """Reject reads (and assignment targets) not bound on all paths."""

        def check_expr(e: ast.Expr, bound: set[str]) -> None:
            if isinstance(e, ast.Var):
                if e.name not in bound:
                    raise MiniProcError(f"unbound variable {e.name!r}")
            elif isinstance(e, ast.BinOp):
                check_expr(e.left, bound)
                check_expr(e.right, bound)
            elif isinstance(e, ast.Call):
                for a in e.args:
                    check_expr(a, bound)

        def check_stmts(stmts: tuple[ast.Stmt, ...], bound: set[str]) -> set[str]:
            bound = set(bound)
            for s in stmts:
                if isinstance(s, ast.Let):
                    check_expr(s.value, bound)
                    bound.add(s.name)
                elif isinstance(s, ast.Assign):
                    check_expr(s.value, bound)
                    if s.name not in bound:
                        raise MiniProcError(f"unbound variable {s.name!r}")
                elif isinstance(s, ast.If):
                    check_expr(s.cond, bound)
                    after_then = check_stmts(s.then, bound)
                    after_else = check_stmts(s.orelse, bound)
                    # only bindings made on all paths survive the branch
                    bound |= after_then & after_else
                elif isinstance(s, ast.While):
                    check_expr(s.cond, bound)
                    check_stmts(s.body, bound)  # body may not execute
                elif isinstance(s, ast.Return):
                    check_expr(s.value, bound)
                elif isinstance(s, ast.ExprStmt):
                    check_expr(s.value, bound)
            return bound

        check_stmts(body, params)


def parse_program(source: str) -> ast.Program:
    """Parse MiniProc source into a validated Program."""
    return _Parser(source).parse_program()
