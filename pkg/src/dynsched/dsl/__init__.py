"""Constraint-patch language: parser, binder, grounder, docs."""

from .ast import (
    Binder,
    BinOp,
    ConstraintDecl,
    Decl,
    DimDom,
    Expr,
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
from .parser import ParseError, parse
from .pretty import pretty_print
from .bind import (
    ArityMismatch,
    BindError,
    BoundPatch,
    NonlinearTerm,
    UnknownParameter,
    UnknownVariable,
    bind,
)
from .ground import BoundsViolation, EmptyRangeWarning, fresh_group_names, ground
from .docs import GRAMMAR_SUMMARY, doc_lookup, reference_sections

__all__ = [
    "ArityMismatch",
    "BindError",
    "Binder",
    "BinOp",
    "BoundPatch",
    "BoundsViolation",
    "ConstraintDecl",
    "Decl",
    "DimDom",
    "EmptyRangeWarning",
    "Expr",
    "GRAMMAR_SUMMARY",
    "HammingExpr",
    "IndexedRef",
    "IntLit",
    "NameRef",
    "NonlinearTerm",
    "ParamDecl",
    "ParseError",
    "Patch",
    "RangeDom",
    "RelaxDecl",
    "Span",
    "SumExpr",
    "UnknownParameter",
    "UnknownVariable",
    "VarDecl",
    "bind",
    "doc_lookup",
    "fresh_group_names",
    "ground",
    "parse",
    "pretty_print",
    "reference_sections",
]
