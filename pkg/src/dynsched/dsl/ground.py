"""Expansion of bound patches into explicit linear constraints.

Quantifier ranges are half-open: ``a..b`` covers a..b-1 and ``i in N``
covers 0..N-1. The hamming builtin linearizes |x - c| cellwise as
c*(1-x) + (1-c)*x for a 0/1 reference c.
"""
from __future__ import annotations

import warnings
from typing import Optional

from ..model.core import GroundedPatch, LinearConstraint, ModelIR, merge_terms
from .ast import (
    BinOp,
    ConstraintDecl,
    DimDom,
    HammingExpr,
    IndexedRef,
    IntLit,
    NameRef,
    RangeDom,
    Span,
    SumExpr,
)
from .bind import BoundPatch


class EmptyRangeWarning(UserWarning):
    """A quantifier expanded to zero index tuples."""


class BoundsViolation(Exception):
    """An index fell outside a family's or parameter's declared extents."""

    def __init__(self, message: str, span: Optional[Span] = None):
        self.span = span
        at = f" (at {span})" if span else ""
        super().__init__(f"{message}{at}")


class _LinForm:
    """Linear form: variable-cell coefficients plus an integer constant."""

    __slots__ = ("coefs", "const")

    def __init__(self, coefs=None, const=0):
        self.coefs = coefs or {}
        self.const = const

    def add(self, other, sign=1):
        out = dict(self.coefs)
        for key, c in other.coefs.items():
            out[key] = out.get(key, 0) + sign * c
        return _LinForm(out, self.const + sign * other.const)

    def scale(self, k: int):
        return _LinForm({key: k * c for key, c in self.coefs.items()}, k * self.const)

    @property
    def is_const(self):
        return all(c == 0 for c in self.coefs.values())


class _Grounder:
    def __init__(self, bound: BoundPatch, model: ModelIR):
        self.bound = bound
        self.model = model
        self.families = {f.name: f for f in model.var_families}
        self.families.update({f.name: f for f in bound.new_families})

    def lookup(self, name: str):
        if name in self.bound.param_values:
            return self.bound.param_values[name]
        if name in self.model.params:
            return self.model.params[name]
        return None

    def eval_const(self, expr, env) -> int:
        form = self.eval_expr(expr, env)
        if not form.is_const:
            raise BoundsViolation(
                "expected a constant expression", getattr(expr, "span", None)
            )
        return form.const

    def binder_range(self, binder, env) -> range:
        if isinstance(binder.domain, DimDom):
            hi = self.lookup(binder.domain.name)
            return range(0, hi)
        lo = self.eval_const(binder.domain.lo, env)
        hi = self.eval_const(binder.domain.hi, env)
        return range(lo, hi)

    def expand_binders(self, binders, env):
        """Yield env dicts for the cartesian product of binder ranges."""
        if not binders:
            yield env
            return
        first, rest = binders[0], binders[1:]
        for value in self.binder_range(first, env):
            child = dict(env)
            child[first.name] = value
            yield from self.expand_binders(rest, child)

    def eval_expr(self, expr, env) -> _LinForm:
        if isinstance(expr, IntLit):
            return _LinForm(const=expr.value)
        if isinstance(expr, NameRef):
            if expr.name in env:
                return _LinForm(const=env[expr.name])
            return _LinForm(const=self.lookup(expr.name))
        if isinstance(expr, IndexedRef):
            idx = tuple(self.eval_const(a, env) for a in expr.args)
            fam = self.families.get(expr.name)
            if fam is not None:
                for i, (ix, ext) in enumerate(zip(idx, fam.dims)):
                    if not 0 <= ix < ext:
                        raise BoundsViolation(
                            f"index {ix} outside extent {ext} of {expr.name!r} (dim {i})",
                            expr.span,
                        )
                return _LinForm(coefs={(expr.name, fam.offset_of(idx)): 1})
            value = self.lookup(expr.name)
            for i, ix in enumerate(idx):
                if not isinstance(value, tuple) or not 0 <= ix < len(value):
                    raise BoundsViolation(
                        f"index {ix} outside parameter {expr.name!r} (dim {i})", expr.span
                    )
                value = value[ix]
            return _LinForm(const=value)
        if isinstance(expr, BinOp):
            left = self.eval_expr(expr.left, env)
            right = self.eval_expr(expr.right, env)
            if expr.op == "+":
                return left.add(right)
            if expr.op == "-":
                return left.add(right, sign=-1)
            if left.is_const:
                return right.scale(left.const)
            return left.scale(right.const)
        if isinstance(expr, SumExpr):
            acc = _LinForm()
            for env2 in self.expand_binders(expr.binders, env):
                acc = acc.add(self.eval_expr(expr.body, env2))
            return acc
        if isinstance(expr, HammingExpr):
            fam = self.families[expr.var_name]
            ref = self.lookup(expr.ref_name)
            flat = _flatten(ref)
            coefs = {}
            const = 0
            for off, c in enumerate(flat):
                if c == 1:
                    const += 1
                    coefs[(expr.var_name, off)] = coefs.get((expr.var_name, off), 0) - 1
                else:
                    coefs[(expr.var_name, off)] = coefs.get((expr.var_name, off), 0) + 1
            assert len(flat) == fam.size
            return _LinForm(coefs, const)
        raise TypeError(f"not an expression: {expr!r}")

    def ground_constraint(self, decl: ConstraintDecl) -> tuple[LinearConstraint, ...]:
        out = []
        expanded = False
        for env in self.expand_binders(decl.quantifiers, {}):
            expanded = True
            lhs = self.eval_expr(decl.lhs, env)
            rhs = self.eval_expr(decl.rhs, env)
            diff = lhs.add(rhs, sign=-1)
            terms = merge_terms(
                (c, fam, off) for (fam, off), c in diff.coefs.items()
            )
            out.append(LinearConstraint(terms, decl.relation, -diff.const))
        if decl.quantifiers and not expanded:
            warnings.warn(
                f"quantifier at {decl.span} spans an empty range; no constraints produced",
                EmptyRangeWarning,
                stacklevel=3,
            )
        return tuple(out)


def _flatten(value):
    if not isinstance(value, tuple):
        return (value,)
    out = []
    for item in value:
        out.extend(_flatten(item))
    return tuple(out)


def fresh_group_names(model: ModelIR, count: int, base: str = "dyn") -> list[str]:
    taken = set(model.group_names())
    names = []
    k = 1
    while len(names) < count:
        cand = f"{base}_{k}"
        if cand not in taken:
            names.append(cand)
            taken.add(cand)
        k += 1
    return names


def ground(bound: BoundPatch, model: ModelIR, base_name: str = "dyn") -> GroundedPatch:
    """Expand a bound patch into a fully numeric GroundedPatch."""
    grounder = _Grounder(bound, model)
    con_decls = [d for d in bound.patch.decls if isinstance(d, ConstraintDecl)]
    names = fresh_group_names(model, len(con_decls), base_name)
    groups = tuple(
        (name, grounder.ground_constraint(decl))
        for name, decl in zip(names, con_decls)
    )
    return GroundedPatch(
        new_params=dict(bound.param_values),
        new_var_families=bound.new_families,
        new_groups=groups,
        relaxed=bound.relax_names,
    )
