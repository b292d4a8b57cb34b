"""Deterministic pretty printer; parse(pretty_print(p)) == p structurally."""
from __future__ import annotations

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
    SumExpr,
    VarDecl,
)

_ADD, _MUL, _ATOM = 1, 2, 3


def _prec(expr) -> int:
    if isinstance(expr, BinOp):
        return _MUL if expr.op == "*" else _ADD
    return _ATOM


def _fmt(expr, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, NameRef):
        return expr.name
    if isinstance(expr, IndexedRef):
        return f"{expr.name}[{', '.join(_fmt(a) for a in expr.args)}]"
    if isinstance(expr, SumExpr):
        binders = ", ".join(_fmt_binder(b) for b in expr.binders)
        return f"sum({binders} : {_fmt(expr.body)})"
    if isinstance(expr, HammingExpr):
        return f"hamming({expr.var_name}, {expr.ref_name})"
    if isinstance(expr, BinOp):
        prec = _prec(expr)
        text = "{} {} {}".format(
            _fmt(expr.left, prec, False), expr.op, _fmt(expr.right, prec, True)
        )
        # left-associative grammar: parenthesize when precedence would bind
        # differently on reparse
        if prec < parent_prec or (prec == parent_prec and right_side):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {expr!r}")


def _fmt_binder(b: Binder) -> str:
    if isinstance(b.domain, RangeDom):
        return f"{b.name} in {_fmt(b.domain.lo)}..{_fmt(b.domain.hi)}"
    if isinstance(b.domain, DimDom):
        return f"{b.name} in {b.domain.name}"
    raise TypeError(f"bad binder domain: {b.domain!r}")


def _fmt_decl(decl) -> str:
    if isinstance(decl, ParamDecl):
        if decl.dims:
            return f"param {decl.name}[{', '.join(_fmt(d) for d in decl.dims)}]"
        return f"param {decl.name}"
    if isinstance(decl, VarDecl):
        dims = ", ".join(_fmt(d) for d in decl.dims)
        kind = "bool" if decl.kind == "bool" else f"int({decl.lo}, {decl.hi})"
        return f"var {decl.name}[{dims}] : {kind}"
    if isinstance(decl, RelaxDecl):
        return f"relax {decl.name}"
    if isinstance(decl, ConstraintDecl):
        head = "constraint "
        if decl.quantifiers:
            head += "forall " + ", ".join(_fmt_binder(b) for b in decl.quantifiers) + ": "
        return f"{head}{_fmt(decl.lhs)} {decl.relation} {_fmt(decl.rhs)}"
    raise TypeError(f"not a declaration: {decl!r}")


def pretty_print(patch: Patch) -> str:
    return "\n".join(_fmt_decl(d) for d in patch.decls) + ("\n" if patch.decls else "")
