"""The patch-language reference manual and error-driven section lookup.

The reference ships as a static corpus of sections, embedded into a
retrieval store at first use. ``doc_lookup`` returns the section most
relevant to an error kind and is what the repair loop splices into its
prompts; unrecognized kinds fall back to the full grammar summary.
"""
from __future__ import annotations

from ..rag import Store

GRAMMAR_SUMMARY = """\
Patch language summary. A patch is a sequence of declarations:
  param NAME                 -- scalar parameter, value read from instance data
  param NAME[N,M]            -- array parameter with declared dimensions
  var NAME[N,M] : bool       -- new boolean variable family
  var NAME[N] : int(lo, hi)  -- new bounded integer variable family
  relax GROUPNAME            -- delete an existing constraint group by name
  constraint forall i in 0..N, j in M: expr CMP expr
                             -- quantified linear constraint; CMP is <=, >= or ==
Expressions: integer literals, scalar parameters, indexed references
name[i,j], sum(i in 0..N : expr), hamming(varFamily, refParam),
addition, subtraction, and multiplication by a constant.
Ranges are half-open: a..b covers a, a+1, ..., b-1, and "i in N" means
i in 0..N. Arithmetic is integer-only; constraints must be linear in the
decision variables.
"""

SECTIONS: tuple[tuple[str, str, str], ...] = (
    (
        "params",
        "param declarations and instance data binding",
        "A 'param NAME' declaration binds NAME to a value read from the "
        "instance data by exactly that key; 'param NAME[N,M]' declares an "
        "array parameter whose shape must match the data. Declaring or "
        "referencing a parameter that is missing from the instance data and "
        "the model raises UnknownParameter: only use parameter names that "
        "exist in the instance JSON (or add the value to the data first). "
        "Never invent parameters; prefer numeric literals when the prompt "
        "gives concrete numbers.",
    ),
    (
        "vars",
        "variable families and indexed references",
        "Decision variables live in named families declared by the model "
        "(for example workerHours[w,h] or nurseDayShift[n,d,s]) or added by "
        "'var NAME[dims] : bool' / 'var NAME[dims] : int(lo, hi)'. An "
        "indexed reference name[i,j] must name an existing family, spelled "
        "exactly; referencing an unknown family raises UnknownVariable. The "
        "number of indices must equal the family's dimension count or "
        "ArityMismatch is raised.",
    ),
    (
        "relax",
        "relax declarations",
        "'relax GROUPNAME' deletes the named constraint group from the "
        "model (constraint removal). The group name must match one of the "
        "model's constraint group names exactly, otherwise applying the "
        "patch fails with UnknownGroup.",
    ),
    (
        "forall",
        "forall quantifiers and binders",
        "A constraint may be quantified: 'constraint forall i in 0..N, j in "
        "S: expr <= expr'. Each binder is 'NAME in lo..hi' (half-open "
        "range) or 'NAME in DIM' meaning 0..DIM. After 'forall' the parser "
        "expects at least one binder followed by ':'. ParseError expected "
        "binder means the binder list is missing or malformed. Binder names "
        "must be fresh identifiers and must not shadow parameters or "
        "variable families.",
    ),
    (
        "ranges",
        "half-open ranges",
        "Ranges are half-open everywhere: a..b covers a, a+1, ..., b-1, "
        "matching range(a, b) loops. To include an endpoint D2 write "
        "D1..D2+1. An empty range (lo >= hi) produces zero constraints and "
        "an EmptyRange warning.",
    ),
    (
        "sum",
        "sum expressions",
        "sum(i in 0..N : expr) adds expr over the binder range; multiple "
        "binders form a cartesian product: sum(d in 0..D, s in 0..S : "
        "X[n,d,s]). The body must be linear in the decision variables.",
    ),
    (
        "hamming",
        "hamming builtin for schedule distance",
        "hamming(varFamily, refParam) is the number of cells where the "
        "boolean family differs from the 0/1 reference array; use it for "
        "minimum-perturbation bounds such as 'constraint "
        "hamming(nurseDayShift, origSchedule) <= T_perturb'. The reference "
        "parameter must have exactly the family's dimensions. Absolute "
        "values are not available in the language; hamming is the supported "
        "way to express |x - c| summed.",
    ),
    (
        "linearity",
        "linearity and integer arithmetic",
        "Constraints must be linear: a product may contain at most one "
        "decision-variable factor, otherwise NonlinearTerm is raised. Only "
        "integer literals and integer parameters exist; there is no "
        "division and no floating point.",
    ),
)


def reference_sections() -> tuple[tuple[str, str, str], ...]:
    return SECTIONS


_DOC_STORE: Store | None = None

# direct routes for the error kinds the binder/grounder actually raise
_KIND_ROUTES = {
    "UnknownParameter": "params",
    "UnknownVariable": "vars",
    "ArityMismatch": "vars",
    "NonlinearTerm": "linearity",
    "UnknownGroup": "relax",
    "BoundsViolation": "ranges",
    "EmptyRange": "ranges",
}


def _doc_store() -> Store:
    global _DOC_STORE
    if _DOC_STORE is None:
        store = Store()
        store.add_many(
            ("dsl_doc", f"{sid} {title} {text}", text, f"doc-{sid}")
            for sid, title, text in SECTIONS
        )
        _DOC_STORE = store
    return _DOC_STORE


def doc_lookup(error_kind: str) -> str:
    """Reference section most relevant to an error kind.

    Exact error-class names route directly; anything else is retrieved from
    the section store, falling back to the grammar summary when nothing
    matches.
    """
    for kind, sid in _KIND_ROUTES.items():
        if error_kind.split(":")[0].strip() == kind:
            return _section_text(sid)
    store = _doc_store()
    hits = store.retrieve(error_kind, k=1, stage="dsl_doc")
    if hits and store.similarity(error_kind, hits[0]) > 0.0:
        return hits[0].output_text
    return GRAMMAR_SUMMARY


def _section_text(sid: str) -> str:
    for s, _, text in SECTIONS:
        if s == sid:
            return text
    return GRAMMAR_SUMMARY
