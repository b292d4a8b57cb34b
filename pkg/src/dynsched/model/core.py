"""Core model IR: variable families, linear constraints, assignments, patches.

Everything here is immutable after construction; operations return new
objects and are safe to share between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

Relation = str  # one of "<=", ">=", "=="
RELATIONS = ("<=", ">=", "==")

ParamValue = Union[int, tuple]  # scalar or nested tuple of ints


class ModelError(Exception):
    """Base class for model-layer failures."""


class SchemaError(ModelError):
    """Instance data is missing a key or has the wrong shape/values."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class PartialAssignment(ModelError):
    """An assignment does not cover every variable of the model."""


class FamilyMismatch(ModelError):
    """Two assignments disagree on a family's existence or dimensions."""


class UnknownGroup(ModelError):
    """A patch asked to relax a constraint group that does not exist."""


@dataclass(frozen=True)
class VariableFamily:
    """A named, dense block of decision variables.

    ``kind`` is "bool" or "int"; booleans always have bounds (0, 1).
    Cells are addressed by row-major offset into ``dims``.
    """

    name: str
    dims: tuple[int, ...]
    kind: str = "bool"
    lo: int = 0
    hi: int = 1

    def __post_init__(self):
        if self.kind not in ("bool", "int"):
            raise ValueError(f"bad variable kind {self.kind!r}")
        if self.kind == "bool" and (self.lo, self.hi) != (0, 1):
            raise ValueError(f"boolean family {self.name} must have bounds (0, 1)")
        if self.lo > self.hi:
            raise ValueError(f"family {self.name}: lo {self.lo} > hi {self.hi}")
        if not self.dims or any(d <= 0 for d in self.dims):
            raise ValueError(f"family {self.name}: extents must be positive, got {self.dims}")

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def offset_of(self, index: Sequence[int]) -> int:
        if len(index) != len(self.dims):
            raise IndexError(f"{self.name}: expected {len(self.dims)} indices, got {len(index)}")
        off = 0
        for i, (ix, ext) in enumerate(zip(index, self.dims)):
            if not 0 <= ix < ext:
                raise IndexError(f"{self.name}: index {ix} out of range for dim {i} (extent {ext})")
            off = off * ext + ix
        return off

    def index_of(self, offset: int) -> tuple[int, ...]:
        if not 0 <= offset < self.size:
            raise IndexError(f"{self.name}: offset {offset} out of range")
        idx = []
        for ext in reversed(self.dims):
            idx.append(offset % ext)
            offset //= ext
        return tuple(reversed(idx))


# A term is (coefficient, family name, row-major offset).
Term = tuple[int, str, int]


def merge_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    """Combine duplicate variable references and drop zero coefficients."""
    acc: dict[tuple[str, int], int] = {}
    order: list[tuple[str, int]] = []
    for coef, fam, off in terms:
        key = (fam, off)
        if key not in acc:
            acc[key] = 0
            order.append(key)
        acc[key] += coef
    return tuple((acc[k], k[0], k[1]) for k in order if acc[k] != 0)


@dataclass(frozen=True)
class LinearExpr:
    """Sum of integer-coefficient terms plus a constant."""

    terms: tuple[Term, ...]
    constant: int = 0

    def value(self, assignment: "Assignment") -> int:
        return self.constant + sum(c * assignment.value(f, o) for c, f, o in self.terms)


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(terms) relation constant`` with pre-merged coefficients."""

    terms: tuple[Term, ...]
    relation: Relation
    constant: int

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"bad relation {self.relation!r}")

    def holds(self, assignment: "Assignment") -> bool:
        lhs = sum(c * assignment.value(f, o) for c, f, o in self.terms)
        if self.relation == "<=":
            return lhs <= self.constant
        if self.relation == ">=":
            return lhs >= self.constant
        return lhs == self.constant


@dataclass(frozen=True)
class Assignment:
    """Values for every cell of each family, keyed by family name.

    Each family's values are a flat row-major tuple.
    """

    values: Mapping[str, tuple[int, ...]]

    @staticmethod
    def from_arrays(arrays: Mapping[str, Sequence[int]]) -> "Assignment":
        return Assignment({name: tuple(vals) for name, vals in arrays.items()})

    def value(self, family: str, offset: int) -> int:
        return self.values[family][offset]

    def family_values(self, family: str) -> tuple[int, ...]:
        return self.values[family]

    def has_family(self, family: str) -> bool:
        return family in self.values


@dataclass(frozen=True)
class Objective:
    sense: str  # "minimize" | "maximize"
    expr: LinearExpr

    def __post_init__(self):
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"bad objective sense {self.sense!r}")


@dataclass(frozen=True)
class ModelIR:
    """A complete constraint model: params, variables, named constraint groups."""

    name: str
    params: Mapping[str, ParamValue]
    var_families: tuple[VariableFamily, ...]
    constraint_groups: tuple[tuple[str, tuple[LinearConstraint, ...]], ...]
    objective: Objective

    def __post_init__(self):
        names = [g for g, _ in self.constraint_groups]
        if len(names) != len(set(names)):
            raise ValueError("duplicate constraint group names")
        fam_names = [f.name for f in self.var_families]
        if len(fam_names) != len(set(fam_names)):
            raise ValueError("duplicate variable family names")

    def family(self, name: str) -> VariableFamily:
        for fam in self.var_families:
            if fam.name == name:
                return fam
        raise KeyError(name)

    def has_family(self, name: str) -> bool:
        return any(f.name == name for f in self.var_families)

    def group(self, name: str) -> tuple[LinearConstraint, ...]:
        for g, cons in self.constraint_groups:
            if g == name:
                return cons
        raise KeyError(name)

    def group_names(self) -> list[str]:
        return [g for g, _ in self.constraint_groups]

    def num_variables(self) -> int:
        return sum(f.size for f in self.var_families)


@dataclass(frozen=True)
class GroundedPatch:
    """Fully numeric patch: the bridge between the DSL grounder and apply_patch.

    ``new_groups`` entries are (group name, constraints); ``relaxed`` lists
    group names to delete.
    """

    new_params: Mapping[str, ParamValue] = field(default_factory=dict)
    new_var_families: tuple[VariableFamily, ...] = ()
    new_groups: tuple[tuple[str, tuple[LinearConstraint, ...]], ...] = ()
    relaxed: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvaluationReport:
    feasible: bool
    violated: tuple[tuple[str, int], ...]  # (group name, index within group)
    objective: int


def evaluate_assignment(model: ModelIR, assignment: Assignment) -> EvaluationReport:
    """Check every grounded constraint; objective is reported regardless."""
    for fam in model.var_families:
        if not assignment.has_family(fam.name):
            raise PartialAssignment(f"assignment missing family {fam.name}")
        vals = assignment.family_values(fam.name)
        if len(vals) != fam.size:
            raise PartialAssignment(
                f"assignment for {fam.name} has {len(vals)} cells, expected {fam.size}"
            )
        for v in vals:
            if not fam.lo <= v <= fam.hi:
                raise PartialAssignment(
                    f"assignment value {v} outside bounds of {fam.name}"
                )
    violated = []
    for gname, cons in model.constraint_groups:
        for i, con in enumerate(cons):
            if not con.holds(assignment):
                violated.append((gname, i))
    objective = model.objective.expr.value(assignment)
    return EvaluationReport(not violated, tuple(violated), objective)


def hamming_distance(a: Assignment, b: Assignment, family: str) -> int:
    """Number of cells of ``family`` on which the two assignments differ."""
    if not (a.has_family(family) and b.has_family(family)):
        raise FamilyMismatch(f"family {family} missing from one assignment")
    va, vb = a.family_values(family), b.family_values(family)
    if len(va) != len(vb):
        raise FamilyMismatch(
            f"family {family}: sizes differ ({len(va)} vs {len(vb)})"
        )
    return sum(1 for x, y in zip(va, vb) if x != y)


def apply_patch(model: ModelIR, grounded: GroundedPatch) -> ModelIR:
    """Append the patch's params/variables/groups and drop relaxed groups.

    The input model is never modified; untouched groups are carried over
    unchanged.
    """
    existing = set(model.group_names())
    for name in grounded.relaxed:
        if name not in existing:
            raise UnknownGroup(f"cannot relax unknown group {name!r}")
    for name, _ in grounded.new_groups:
        if name in existing:
            raise ValueError(f"patch group name {name!r} collides with the model")
    for fam in grounded.new_var_families:
        if model.has_family(fam.name):
            raise ValueError(f"patch family {fam.name!r} collides with the model")

    params = dict(model.params)
    params.update(grounded.new_params)
    relax = set(grounded.relaxed)
    groups = tuple(
        (g, cons) for g, cons in model.constraint_groups if g not in relax
    ) + tuple(grounded.new_groups)
    return ModelIR(
        name=model.name,
        params=params,
        var_families=model.var_families + grounded.new_var_families,
        constraint_groups=groups,
        objective=model.objective,
    )
