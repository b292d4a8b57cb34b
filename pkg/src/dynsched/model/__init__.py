"""Model IR, instance schemas, model builders, and double-entry checkers."""

from .core import (
    Assignment,
    EvaluationReport,
    FamilyMismatch,
    GroundedPatch,
    LinearConstraint,
    LinearExpr,
    ModelError,
    ModelIR,
    Objective,
    PartialAssignment,
    SchemaError,
    UnknownGroup,
    VariableFamily,
    apply_patch,
    evaluate_assignment,
    hamming_distance,
    merge_terms,
)
from .builders import (
    AM,
    KINDS,
    ND,
    PM,
    UNASSIGNED_PENALTY,
    Instance,
    assignment_to_nested,
    build_model,
    schedule_family,
    validate_instance,
)
from .checkers import checkers_for

__all__ = [
    "AM",
    "Assignment",
    "EvaluationReport",
    "FamilyMismatch",
    "GroundedPatch",
    "Instance",
    "KINDS",
    "LinearConstraint",
    "LinearExpr",
    "ModelError",
    "ModelIR",
    "ND",
    "Objective",
    "PM",
    "PartialAssignment",
    "SchemaError",
    "UNASSIGNED_PENALTY",
    "UnknownGroup",
    "VariableFamily",
    "apply_patch",
    "assignment_to_nested",
    "build_model",
    "checkers_for",
    "evaluate_assignment",
    "hamming_distance",
    "merge_terms",
    "schedule_family",
    "validate_instance",
]
