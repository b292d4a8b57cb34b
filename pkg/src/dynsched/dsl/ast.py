"""AST node types for the constraint-patch language.

Source spans never participate in structural equality, so a reparse of the
pretty-printed form compares equal to the original tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


def _span_field():
    return field(default=None, compare=False, repr=False)


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class NameRef:
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class IndexedRef:
    name: str
    args: tuple["Expr", ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*"
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RangeDom:
    """Half-open range lo..hi."""

    lo: "Expr"
    hi: "Expr"


@dataclass(frozen=True)
class DimDom:
    """Shorthand ``i in N``: the half-open range 0..N."""

    name: str


@dataclass(frozen=True)
class Binder:
    name: str
    domain: Union[RangeDom, DimDom]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class SumExpr:
    binders: tuple[Binder, ...]
    body: "Expr"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class HammingExpr:
    """Builtin hamming(var_family, reference_param): cellwise |x - c| summed."""

    var_name: str
    ref_name: str
    span: Optional[Span] = _span_field()


Expr = Union[IntLit, NameRef, IndexedRef, BinOp, SumExpr, HammingExpr]


# --- declarations ----------------------------------------------------------


@dataclass(frozen=True)
class ParamDecl:
    name: str
    dims: tuple[Expr, ...] = ()  # empty for scalars
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class VarDecl:
    name: str
    dims: tuple[Expr, ...]
    kind: str  # "bool" | "int"
    lo: Optional[int] = None
    hi: Optional[int] = None
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class RelaxDecl:
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ConstraintDecl:
    quantifiers: tuple[Binder, ...]
    lhs: Expr
    relation: str  # "<=", ">=", "=="
    rhs: Expr
    span: Optional[Span] = _span_field()


Decl = Union[ParamDecl, VarDecl, RelaxDecl, ConstraintDecl]


@dataclass(frozen=True)
class Patch:
    decls: tuple[Decl, ...]
    source_text: str = field(default="", compare=False, repr=False)

    def decl_names(self) -> list[str]:
        return [d.name for d in self.decls if not isinstance(d, ConstraintDecl)]
