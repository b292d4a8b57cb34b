"""Name resolution, arity/shape checking, and linearity checking for patches.

Binding resolves every identifier against (in order) quantifier indices, the
patch's own declarations, the model's parameters/variable families, and the
instance data. An undeclared or unresolvable name is the patch-language
analog of a data KeyError and the primary hallucination signal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from ..model.core import ModelIR, VariableFamily
from ..model.builders import Instance
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


class BindError(Exception):
    kind = "BindError"

    def __init__(self, message: str, span: Optional[Span] = None):
        self.span = span
        at = f" (at {span})" if span else ""
        super().__init__(f"{message}{at}")


class UnknownParameter(BindError):
    kind = "UnknownParameter"

    def __init__(self, name: str, span: Optional[Span] = None):
        self.name = name
        super().__init__(f"unknown parameter {name!r}: not in instance data or model", span)


class UnknownVariable(BindError):
    kind = "UnknownVariable"

    def __init__(self, name: str, span: Optional[Span] = None):
        self.name = name
        super().__init__(f"unknown variable {name!r}: no such variable family", span)


class ArityMismatch(BindError):
    kind = "ArityMismatch"

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message, span)


class NonlinearTerm(BindError):
    kind = "NonlinearTerm"

    def __init__(self, message: str, span: Optional[Span] = None):
        super().__init__(message, span)


@dataclass(frozen=True)
class BoundPatch:
    patch: Patch
    model: ModelIR
    param_values: Mapping[str, object]  # declared params, resolved
    new_families: tuple[VariableFamily, ...]
    relax_names: tuple[str, ...]


def value_shape(value) -> tuple[int, ...]:
    """Shape of a nested-tuple array; () for scalars. Must be rectangular."""
    if not isinstance(value, tuple):
        return ()
    if len(value) == 0:
        return (0,)
    sub = value_shape(value[0])
    for item in value[1:]:
        if value_shape(item) != sub:
            raise ArityMismatch("ragged array value")
    return (len(value),) + sub


def _flat_values(value):
    if not isinstance(value, tuple):
        yield value
        return
    for item in value:
        yield from _flat_values(item)


class _Binding:
    def __init__(self, patch: Patch, model: ModelIR, instance: Instance):
        self.patch = patch
        self.model = model
        self.instance = instance
        self.param_values: dict[str, object] = {}
        self.new_families: list[VariableFamily] = []
        self.relax_names: list[str] = []

    def lookup_value(self, name: str):
        """Raw value for a name: declared patch param, model param, or
        instance data key. None when absent everywhere."""
        if name in self.param_values:
            return self.param_values[name]
        if name in self.model.params:
            return self.model.params[name]
        if name in self.instance.data:
            return self.instance.data[name]
        return None

    def family(self, name: str) -> Optional[VariableFamily]:
        if self.model.has_family(name):
            return self.model.family(name)
        for fam in self.new_families:
            if fam.name == name:
                return fam
        return None

    def scalar(self, name: str, span) -> int:
        value = self.lookup_value(name)
        if value is None:
            if self.family(name) is not None:
                raise ArityMismatch(f"variable family {name!r} used without indices", span)
            raise UnknownParameter(name, span)
        if isinstance(value, tuple):
            raise ArityMismatch(f"array parameter {name!r} used without indices", span)
        return value

    def const_eval(self, expr) -> int:
        """Evaluate a constant (degree-0, binder-free) expression."""
        if isinstance(expr, IntLit):
            return expr.value
        if isinstance(expr, NameRef):
            return self.scalar(expr.name, expr.span)
        if isinstance(expr, BinOp):
            l = self.const_eval(expr.left)
            r = self.const_eval(expr.right)
            return l + r if expr.op == "+" else l - r if expr.op == "-" else l * r
        if isinstance(expr, IndexedRef):
            value = self.lookup_value(expr.name)
            if value is None:
                raise UnknownVariable(expr.name, expr.span)
            for arg in expr.args:
                idx = self.const_eval(arg)
                if not isinstance(value, tuple) or not 0 <= idx < len(value):
                    raise ArityMismatch(
                        f"bad index into parameter {expr.name!r}", expr.span
                    )
                value = value[idx]
            if isinstance(value, tuple):
                raise ArityMismatch(f"partial index into {expr.name!r}", expr.span)
            return value
        raise ArityMismatch("expression is not a compile-time constant", getattr(expr, "span", None))

    # --- declaration binding ---

    def bind_decls(self):
        seen = set()
        for decl in self.patch.decls:
            if not isinstance(decl, ConstraintDecl):
                if decl.name in seen:
                    raise BindError(f"duplicate declaration of {decl.name!r}", decl.span)
                seen.add(decl.name)
            if isinstance(decl, ParamDecl):
                self._bind_param(decl)
            elif isinstance(decl, VarDecl):
                self._bind_var(decl)
            elif isinstance(decl, RelaxDecl):
                self.relax_names.append(decl.name)
        for decl in self.patch.decls:
            if isinstance(decl, ConstraintDecl):
                self._check_constraint(decl)

    def _bind_param(self, decl: ParamDecl):
        value = None
        if decl.name in self.instance.data:
            value = self.instance.data[decl.name]
        elif decl.name in self.model.params:
            value = self.model.params[decl.name]
        if value is None:
            raise UnknownParameter(decl.name, decl.span)
        shape = value_shape(value)
        if decl.dims:
            want = tuple(self.const_eval(d) for d in decl.dims)
            if shape != want:
                raise ArityMismatch(
                    f"parameter {decl.name!r} declared with dims {want}, data has shape {shape}",
                    decl.span,
                )
        elif shape != ():
            raise ArityMismatch(
                f"parameter {decl.name!r} declared scalar, data has shape {shape}", decl.span
            )
        self.param_values[decl.name] = value

    def _bind_var(self, decl: VarDecl):
        dims = tuple(self.const_eval(d) for d in decl.dims)
        if any(d <= 0 for d in dims):
            raise ArityMismatch(f"variable {decl.name!r} has non-positive extent {dims}", decl.span)
        if self.family(decl.name) is not None:
            raise BindError(f"variable {decl.name!r} collides with an existing family", decl.span)
        if decl.kind == "bool":
            fam = VariableFamily(decl.name, dims)
        else:
            if decl.lo > decl.hi:
                raise ArityMismatch(f"variable {decl.name!r}: lo > hi", decl.span)
            fam = VariableFamily(decl.name, dims, kind="int", lo=decl.lo, hi=decl.hi)
        self.new_families.append(fam)

    # --- constraint checking (names, arity, linearity) ---

    def _check_constraint(self, decl: ConstraintDecl):
        scope: set[str] = set()
        for b in decl.quantifiers:
            self._check_binder(b, scope)
            scope.add(b.name)
        dl = self._degree(decl.lhs, scope)
        dr = self._degree(decl.rhs, scope)
        if dl > 1 or dr > 1:
            raise NonlinearTerm("constraint is not linear in the decision variables", decl.span)

    def _check_binder(self, b: Binder, scope: set[str]):
        if b.name in scope:
            raise BindError(f"duplicate quantifier index {b.name!r}", b.span)
        if (
            self.family(b.name) is not None
            or self.lookup_value(b.name) is not None
        ):
            raise BindError(f"quantifier index {b.name!r} shadows an existing name", b.span)
        if isinstance(b.domain, DimDom):
            value = self.lookup_value(b.domain.name)
            if value is None:
                raise UnknownParameter(b.domain.name, b.span)
            if isinstance(value, tuple):
                raise ArityMismatch(
                    f"binder range {b.domain.name!r} must be a scalar", b.span
                )
        else:
            self._check_index_expr(b.domain.lo, scope)
            self._check_index_expr(b.domain.hi, scope)

    def _check_index_expr(self, expr, scope: set[str]):
        deg = self._degree(expr, scope)
        if deg > 0:
            raise NonlinearTerm(
                "decision variable used in an index or range position",
                getattr(expr, "span", None),
            )

    def _degree(self, expr, scope: set[str]) -> int:
        if isinstance(expr, IntLit):
            return 0
        if isinstance(expr, NameRef):
            if expr.name in scope:
                return 0
            self.scalar(expr.name, expr.span)  # raises when unresolvable
            return 0
        if isinstance(expr, IndexedRef):
            fam = self.family(expr.name)
            if fam is not None:
                if len(expr.args) != len(fam.dims):
                    raise ArityMismatch(
                        f"{expr.name!r} expects {len(fam.dims)} indices, got {len(expr.args)}",
                        expr.span,
                    )
                for arg in expr.args:
                    self._check_index_expr(arg, scope)
                return 1
            value = self.lookup_value(expr.name)
            if value is None:
                raise UnknownVariable(expr.name, expr.span)
            shape = value_shape(value)
            if len(expr.args) != len(shape):
                raise ArityMismatch(
                    f"parameter {expr.name!r} has {len(shape)} dimensions, got {len(expr.args)} indices",
                    expr.span,
                )
            for arg in expr.args:
                self._check_index_expr(arg, scope)
            return 0
        if isinstance(expr, BinOp):
            dl = self._degree(expr.left, scope)
            dr = self._degree(expr.right, scope)
            if expr.op == "*":
                if dl > 0 and dr > 0:
                    raise NonlinearTerm(
                        "product of two decision-variable expressions", expr.span
                    )
                return dl + dr
            return max(dl, dr)
        if isinstance(expr, SumExpr):
            inner = set(scope)
            for b in expr.binders:
                self._check_binder(b, inner)
                inner.add(b.name)
            return self._degree(expr.body, inner)
        if isinstance(expr, HammingExpr):
            fam = self.family(expr.var_name)
            if fam is None:
                raise UnknownVariable(expr.var_name, expr.span)
            if fam.kind != "bool":
                raise ArityMismatch(
                    f"hamming over non-boolean family {expr.var_name!r}", expr.span
                )
            ref = self.lookup_value(expr.ref_name)
            if ref is None:
                raise UnknownParameter(expr.ref_name, expr.span)
            shape = value_shape(ref)
            if shape != fam.dims:
                raise ArityMismatch(
                    f"hamming reference {expr.ref_name!r} shape {shape} does not match "
                    f"family dims {fam.dims}",
                    expr.span,
                )
            for v in _flat_values(ref):
                if v not in (0, 1):
                    raise ArityMismatch(
                        f"hamming reference {expr.ref_name!r} must be 0/1-valued", expr.span
                    )
            return 1
        raise TypeError(f"not an expression: {expr!r}")


def bind(patch: Patch, model: ModelIR, instance: Instance) -> BoundPatch:
    """Resolve and check a parsed patch against a model and its instance."""
    binding = _Binding(patch, model, instance)
    binding.bind_decls()
    return BoundPatch(
        patch=patch,
        model=model,
        param_values=dict(binding.param_values),
        new_families=tuple(binding.new_families),
        relax_names=tuple(binding.relax_names),
    )
