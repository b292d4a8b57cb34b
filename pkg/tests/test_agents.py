"""Prompt assembly, plan parsing, the fixing loop, and fixture replay."""
import pytest

from dynsched import agents
from dynsched.agents import (
    BackendError,
    FixExhausted,
    FixtureBackend,
    ListParseError,
    PlanParseError,
    PlanSections,
    RecordingBackend,
    build_coding_prompt,
    build_paraphrase_prompt,
    build_planning_prompt,
    build_repair_prompt,
    paraphrase,
    parse_plan,
    prompt_hash,
    run_pipeline,
)
from dynsched.dsl.docs import GRAMMAR_SUMMARY, doc_lookup
from dynsched.model import build_model
from dynsched.rag import Store

from conftest import nsp_instance, static_nurse_instance


class Session:
    def __init__(self, instance):
        self.instance = instance
        self.model = build_model(instance)


class Scripted:
    name = "scripted"

    def __init__(self, *responses):
        self.queue = list(responses)
        self.prompts = []

    def complete(self, prompt):
        self.prompts.append(prompt)
        if not self.queue:
            raise BackendError("script exhausted")
        return self.queue.pop(0)


PLAN_OK = (
    "New Parameters:\nK: affected nurse\nD1: blocked day\n"
    "New Variables:\nNone\n"
    "New Constraints:\nnurseDayShift[K,D1,s] = 0 for every shift s\n"
)

PATCH_OK = "param K\nparam D1\nconstraint forall s in 0..S: nurseDayShift[K,D1,s] == 0\n"


class TestPlanParsing:
    def test_sections_extracted_verbatim(self):
        sections = parse_plan(PLAN_OK)
        assert sections.new_params == (("K", "affected nurse"), ("D1", "blocked day"))
        assert sections.new_constraints_text.startswith("nurseDayShift")

    def test_none_gives_empty_list(self):
        assert parse_plan(PLAN_OK).new_vars == ()

    def test_missing_section_raises(self):
        with pytest.raises(PlanParseError) as err:
            parse_plan("New Parameters:\nNone\nNew Variables:\nNone\n")
        assert "New Constraints:" in str(err.value)

    def test_plan_retries_once_then_succeeds(self):
        session = Session(nsp_instance(K=0, D1=2))
        backend = Scripted("garbage without sections", PLAN_OK)
        sections, transcript = agents.plan(session, "Nurse K off day D1.", backend)
        assert sections.new_params[0][0] == "K"
        assert len(transcript) == 2
        assert "rejected" in backend.prompts[1]

    def test_plan_fails_after_second_garbage(self):
        session = Session(nsp_instance(K=0, D1=2))
        backend = Scripted("junk", "more junk")
        with pytest.raises(PlanParseError):
            agents.plan(session, "Nurse K off day D1.", backend)


class TestPromptAssembly:
    def test_planning_prompt_blocks_in_order(self):
        session = Session(nsp_instance(K=0, D1=2))
        store = Store()
        ex = store.add("planning", "nurse example input", "example output")
        prompt = build_planning_prompt(session, "Nurse K off day D1.", ex)
        role = prompt.index("### Role ###")
        instr = prompt.index("### Instruction ###")
        example = prompt.index("### Example ###")
        problem = prompt.index("### Problem ###")
        nl = prompt.index("New Constraint:\nNurse K off day D1.")
        assert role < instr < example < problem < nl
        assert "Parameters:" in prompt and "Decision Variables:" in prompt
        assert "Constraints:" in prompt

    def test_coding_prompt_blocks_in_order(self):
        session = Session(nsp_instance(K=0, D1=2))
        store = Store()
        ex = store.add("coding", "coding example input", "patch output")
        plan = parse_plan(PLAN_OK)
        prompt = build_coding_prompt(session, "Nurse K off day D1.", plan, ex)
        order = [
            prompt.index("### Role ###"),
            prompt.index("### Example ###"),
            prompt.index("### Problem ###"),
            prompt.index("New Constraint:"),
            prompt.index("### Plan ###"),
            prompt.index("### Current Model ###"),
            prompt.index("### Patch Language ###"),
        ]
        assert order == sorted(order)
        assert GRAMMAR_SUMMARY.splitlines()[0] in prompt

    def test_empty_store_omits_example_block(self):
        session = Session(nsp_instance(K=0, D1=2))
        prompt = build_planning_prompt(session, "Nurse K off day D1.", None)
        assert "### Example ###" not in prompt

    def test_repair_prompt_contains_doc_section(self):
        from dynsched.dsl import UnknownParameter

        err = UnknownParameter("reducedHours")
        prompt = build_repair_prompt("param reducedHours\n", err)
        assert doc_lookup("UnknownParameter") in prompt
        assert "reducedHours" in prompt


class TestPipeline:
    def test_success_first_attempt(self):
        session = Session(nsp_instance(K=0, D1=2))
        backend = Scripted(PLAN_OK, PATCH_OK)
        result = run_pipeline(session, "Nurse K off day D1.", backend)
        assert result.attempts == 1
        assert result.transcript[-1][2] == "ok"
        assert len(result.grounded.new_groups[0][1]) == 4  # S = 4 shifts

    def test_repair_recovers_on_second_attempt(self):
        session = Session(nsp_instance(K=0, D1=2))
        bad = "constraint forall s in 0..S nurseDayShift[K,D1,s] == 0\n"
        backend = Scripted(PLAN_OK, bad, PATCH_OK)
        result = run_pipeline(session, "Nurse K off day D1.", backend)
        assert result.attempts == 2
        assert len(result.transcript) == 2
        assert "ParseError" in result.transcript[0][2]

    def test_fix_exhausted_after_max_attempts(self):
        session = Session(nsp_instance(K=0, D1=2))
        backend = Scripted(PLAN_OK, "junk(", "junk((", "junk(((")
        with pytest.raises(FixExhausted) as err:
            run_pipeline(session, "Nurse K off day D1.", backend, max_attempts=3)
        assert len(err.value.transcript) == 3
        assert err.value.last_kind == "ParseError"

    def test_repair_prompt_for_unknown_param_names_binding_doc(self):
        session = Session(nsp_instance(K=0, D1=2))
        bad = "param reducedHours\nconstraint sum(d in 0..D, s in 0..S : nurseDayShift[0,d,s]) <= reducedHours\n"
        backend = Scripted(PLAN_OK, bad, PATCH_OK)
        result = run_pipeline(session, "Nurse K off day D1.", backend)
        assert result.attempts == 2
        repair_prompt = backend.prompts[-1]
        assert doc_lookup("UnknownParameter") in repair_prompt

    def test_fixture_determinism(self):
        session = Session(nsp_instance(K=0, D1=2))
        recorder = RecordingBackend(Scripted(PLAN_OK, PATCH_OK))
        nl = "Nurse K off day D1."
        first = run_pipeline(session, nl, recorder)
        replay1 = run_pipeline(session, nl, FixtureBackend(recorder.records))
        replay2 = run_pipeline(session, nl, FixtureBackend(recorder.records))
        assert replay1 == replay2
        assert replay1.transcript == first.transcript

    def test_unmatched_prompt_names_hash(self):
        session = Session(nsp_instance(K=0, D1=2))
        backend = FixtureBackend([])
        with pytest.raises(BackendError) as err:
            run_pipeline(session, "Nurse K off day D1.", backend)
        assert "prompt hash" in str(err.value)

    def test_fuzzy_fallback_matches_nl_line(self):
        session = Session(nsp_instance(K=0, D1=2))
        nl = "Nurse K off day D1."
        records = [
            {
                "prompt_sha256": "0" * 64,
                "nl_line": nl,
                "stage": "planning",
                "response": PLAN_OK,
            },
            {
                "prompt_sha256": "1" * 64,
                "nl_line": nl,
                "stage": "coding",
                "response": PATCH_OK,
            },
        ]
        result = run_pipeline(session, nl, FixtureBackend(records, fuzzy=True))
        assert result.attempts == 1


class TestParaphrase:
    def test_four_numbered_lines(self):
        backend = Scripted("1. first\n2. second\n3. third\n4. fourth\n")
        assert paraphrase("text", 4, backend) == ["first", "second", "third", "fourth"]

    def test_single_variant(self):
        backend = Scripted("1. only one\n")
        assert paraphrase("text", 1, backend) == ["only one"]

    def test_too_few_lines_raises(self):
        backend = Scripted("1. first\n2. second\n3. third\n")
        with pytest.raises(ListParseError):
            paraphrase("text", 4, backend)

    def test_prompt_requests_count(self):
        prompt = build_paraphrase_prompt("desc", 4)
        assert "4" in prompt and "desc" in prompt


def test_prompt_hash_stable():
    assert prompt_hash("abc") == prompt_hash("abc")
    assert prompt_hash("abc") != prompt_hash("abd")
