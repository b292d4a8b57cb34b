"""Tokenizer and recursive-descent parser for the patch language.

Grammar (EBNF):

    patch           := decl*
    param_decl      := "param" NAME ["[" dims "]"]
    var_decl        := "var" NAME "[" dims "]" ":" ("bool" | "int(" INT "," INT ")")
    relax_decl      := "relax" NAME
    constraint_decl := "constraint" ["forall" binder ("," binder)* ":"] expr cmp expr
    binder          := NAME "in" (expr ".." expr | NAME)
    cmp             := "<=" | ">=" | "=="
    expr            := term (("+" | "-") term)*
    term            := factor ("*" factor)*
    factor          := INT | NAME ["[" expr ("," expr)* "]"]
                     | "sum" "(" binder ("," binder)* ":" expr ")"
                     | "hamming" "(" NAME "," NAME ")"
                     | "(" expr ")"

Ranges are half-open: a..b covers a, a+1, ..., b-1.
"""
from __future__ import annotations

import re

from .ast import (
    Binder,
    BinOp,
    ConstraintDecl,
    DimDom,
    HammingExpr,
    IndexedRef,
    IntLit,
    NameRef,
    ParamDecl,
    Patch,
    RangeDom,
    RelaxDecl,
    Span,
    SumExpr,
    VarDecl,
)

KEYWORDS = {"param", "var", "relax", "constraint", "forall", "in", "sum", "hamming", "bool", "int"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\.\.|<=|>=|==|[+\-*()\[\],:])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Syntax error with position and the token set that was expected."""

    def __init__(self, line: int, col: int, expected: set[str], found: str):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        self.found = found
        exp = ", ".join(sorted(expected))
        super().__init__(f"line {line}, col {col}: expected {exp}, found {found}")


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    @property
    def end_col(self):
        return self.col + len(self.text)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(line, col, {"token"}, repr(text[pos]))
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(value)
        else:
            if kind == "name" and value in KEYWORDS:
                tokens.append(_Token(value, value, line, col))
            elif kind == "op":
                tokens.append(_Token(value, value, line, col))
            else:
                tokens.append(_Token(kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(tok.line, tok.col, {kind}, tok.text or "end of input")
        return self.advance()

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def _span(self, start: _Token, end: _Token) -> Span:
        return Span(start.line, start.col, end.line, end.col)

    # --- declarations ---

    def parse_patch(self) -> Patch:
        decls = []
        while not self.at("eof"):
            decls.append(self.parse_decl())
        return Patch(tuple(decls), source_text=self.text)

    def parse_decl(self):
        tok = self.peek()
        if tok.kind == "param":
            return self.parse_param()
        if tok.kind == "var":
            return self.parse_var()
        if tok.kind == "relax":
            return self.parse_relax()
        if tok.kind == "constraint":
            return self.parse_constraint()
        raise ParseError(
            tok.line, tok.col, {"param", "var", "relax", "constraint"}, tok.text or "end of input"
        )

    def parse_param(self) -> ParamDecl:
        start = self.expect("param")
        name = self.expect("name")
        dims = ()
        end = name
        if self.at("["):
            self.advance()
            dims = self.parse_expr_list()
            end = self.expect("]")
        return ParamDecl(name.text, tuple(dims), span=self._span(start, end))

    def parse_var(self) -> VarDecl:
        start = self.expect("var")
        name = self.expect("name")
        self.expect("[")
        dims = self.parse_expr_list()
        self.expect("]")
        self.expect(":")
        tok = self.peek()
        if tok.kind == "bool":
            end = self.advance()
            return VarDecl(name.text, tuple(dims), "bool", span=self._span(start, end))
        if tok.kind == "int":
            self.advance()
            self.expect("(")
            lo = int(self.expect("int").text)
            self.expect(",")
            hi = int(self.expect("int").text)
            end = self.expect(")")
            return VarDecl(name.text, tuple(dims), "int", lo, hi, span=self._span(start, end))
        raise ParseError(tok.line, tok.col, {"bool", "int"}, tok.text or "end of input")

    def parse_relax(self) -> RelaxDecl:
        start = self.expect("relax")
        name = self.expect("name")
        return RelaxDecl(name.text, span=self._span(start, name))

    def parse_constraint(self) -> ConstraintDecl:
        start = self.expect("constraint")
        quantifiers = ()
        if self.at("forall"):
            self.advance()
            binders = [self.parse_binder()]
            while self.at(","):
                self.advance()
                binders.append(self.parse_binder())
            self.expect(":")
            quantifiers = tuple(binders)
        lhs = self.parse_expr()
        tok = self.peek()
        if tok.kind not in ("<=", ">=", "=="):
            raise ParseError(tok.line, tok.col, {"<=", ">=", "=="}, tok.text or "end of input")
        rel = self.advance()
        rhs = self.parse_expr()
        end = self.tokens[self.pos - 1]
        return ConstraintDecl(quantifiers, lhs, rel.kind, rhs, span=self._span(start, end))

    def parse_binder(self) -> Binder:
        tok = self.peek()
        if tok.kind != "name":
            raise ParseError(tok.line, tok.col, {"binder"}, tok.text or "end of input")
        name = self.advance()
        self.expect("in")
        lo = self.parse_expr()
        if self.at(".."):
            self.advance()
            hi = self.parse_expr()
            end = self.tokens[self.pos - 1]
            return Binder(name.text, RangeDom(lo, hi), span=self._span(name, end))
        if isinstance(lo, NameRef):
            return Binder(name.text, DimDom(lo.name), span=self._span(name, self.tokens[self.pos - 1]))
        tok = self.peek()
        raise ParseError(tok.line, tok.col, {"..", "dimension name"}, tok.text or "end of input")

    # --- expressions ---

    def parse_expr_list(self) -> list:
        exprs = [self.parse_expr()]
        while self.at(","):
            self.advance()
            exprs.append(self.parse_expr())
        return exprs

    def parse_expr(self):
        left = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            right = self.parse_term()
            left = BinOp(op.kind, left, right, span=_merge(left, right))
        return left

    def parse_term(self):
        left = self.parse_factor()
        while self.at("*"):
            self.advance()
            right = self.parse_factor()
            left = BinOp("*", left, right, span=_merge(left, right))
        return left

    def parse_factor(self):
        tok = self.peek()
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text), span=self._span(tok, tok))
        if tok.kind == "name":
            self.advance()
            if self.at("["):
                self.advance()
                args = self.parse_expr_list()
                end = self.expect("]")
                return IndexedRef(tok.text, tuple(args), span=self._span(tok, end))
            return NameRef(tok.text, span=self._span(tok, tok))
        if tok.kind == "sum":
            self.advance()
            self.expect("(")
            binders = [self.parse_binder()]
            while self.at(","):
                self.advance()
                binders.append(self.parse_binder())
            self.expect(":")
            body = self.parse_expr()
            end = self.expect(")")
            return SumExpr(tuple(binders), body, span=self._span(tok, end))
        if tok.kind == "hamming":
            self.advance()
            self.expect("(")
            var = self.expect("name")
            self.expect(",")
            ref = self.expect("name")
            end = self.expect(")")
            return HammingExpr(var.text, ref.text, span=self._span(tok, end))
        if tok.kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise ParseError(
            tok.line, tok.col, {"integer", "name", "sum", "hamming", "("}, tok.text or "end of input"
        )


def _merge(left, right) -> Span:
    if left.span is None or right.span is None:
        return None
    return Span(left.span.line, left.span.col, right.span.end_line, right.span.end_col)


def parse(text: str) -> Patch:
    """Parse a patch; raises ParseError with line/column and expected tokens."""
    return _Parser(text).parse_patch()
