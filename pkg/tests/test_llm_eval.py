from __future__ import annotations

import json

import pytest

from conftest import FIXTURE_DOCUMENT
from factlab.errors import (
    CsvFormatError,
    DuplicateRowError,
    EmptyEvaluationError,
    JudgeParseError,
    ManifestCountError,
    ManifestSchemaError,
    UnknownQuestionError,
)
from factlab.llm_eval import (
    LLMEvaluator,
    SUBSETS,
    domain_distribution,
    eval_exact_match,
    eval_freeform,
    eval_judge,
    ingest_responses,
    load_manifest,
    load_uncertainty_lexicon,
)
from factlab.pipeline import SolverRegistry, load_pipeline_config
from factlab.solvers import register_builtin_solvers
from factlab.solvers.backends import MockBackend
from helpers import question_record, write_csv, write_factqa_manifest

FULL_FACTQA_COUNTS = {
    "snowballing": 1500,
    "selfaware": 3369,
    "freshqa": 600,
    "factoolqa": 50,
    "felm-wk": 184,
    "factcheck-bench": 94,
    "factscore-bio": 683,
}

# Per-domain sizes from the benchmark's top-20 domain table.
TOP20_DOMAINS = {
    "History": 771,
    "Biography": 683,
    "Mathematics": 612,
    "Transportation": 519,
    "Biology": 259,
    "Philosophy": 229,
    "Technology": 208,
    "Entertainment": 191,
    "Psychology": 169,
    "Sports": 157,
    "Science": 143,
    "Physics": 136,
    "Social Sciences": 111,
    "Literature": 100,
    "Geography": 87,
    "Astronomy": 82,
    "Economics": 69,
    "Music": 66,
    "Religion": 63,
    "General Knowledge": 53,
}


@pytest.fixture
def registry():
    return register_builtin_solvers(SolverRegistry())


@pytest.fixture
def small_manifest(tmp_path):
    records = [
        question_record("q1", "snowballing", gold_answer="yes"),
        question_record("q2", "snowballing", gold_answer="no"),
        question_record("q3", "selfaware", answerable=False),
        question_record("q4", "freshqa"),
        question_record("q5", "factoolqa"),
        question_record("q6", "felm-wk"),
    ]
    path = write_factqa_manifest(tmp_path / "factqa.jsonl", records)
    return load_manifest(path)


# --- manifest loading -------------------------------------------------------


def test_small_manifest_accepted(small_manifest):
    assert small_manifest.total == 6
    assert len(small_manifest.records) == 6


def test_full_factqa_counts_accepted(tmp_path):
    records = []
    for subset, count in FULL_FACTQA_COUNTS.items():
        for i in range(count):
            records.append(question_record(f"{subset}-{i}", subset))
    path = write_factqa_manifest(tmp_path / "factqa_full.jsonl", records)
    manifest = load_manifest(path)
    assert manifest.total == 6480
    assert manifest.declared_counts == FULL_FACTQA_COUNTS


def test_count_mismatch_names_subset(tmp_path):
    records = [
        question_record("q1", "factoolqa"),
        question_record("q2", "felm-wk"),
    ]
    declared = {"factoolqa": 2, "felm-wk": 1}
    path = write_factqa_manifest(
        tmp_path / "factqa.jsonl", records, declared_counts=declared
    )
    with pytest.raises(ManifestCountError) as excinfo:
        load_manifest(path)
    assert excinfo.value.subset == "factoolqa"


def test_schema_violations(tmp_path):
    missing_field = question_record("q1", "factoolqa")
    del missing_field["topic"]
    path = write_factqa_manifest(tmp_path / "bad.jsonl", [missing_field])
    with pytest.raises(ManifestSchemaError):
        load_manifest(path)

    snowball_without_gold = question_record("q2", "snowballing")
    del snowball_without_gold["gold_answer"]
    path = write_factqa_manifest(tmp_path / "bad2.jsonl", [snowball_without_gold])
    with pytest.raises(ManifestSchemaError):
        load_manifest(path)

    selfaware_without_flag = question_record("q3", "selfaware")
    del selfaware_without_flag["answerable"]
    path = write_factqa_manifest(tmp_path / "bad3.jsonl", [selfaware_without_flag])
    with pytest.raises(ManifestSchemaError):
        load_manifest(path)


def test_duplicate_ids_rejected(tmp_path):
    records = [
        question_record("q1", "factoolqa"),
        question_record("q1", "factoolqa"),
    ]
    path = write_factqa_manifest(tmp_path / "dup.jsonl", records)
    with pytest.raises(ManifestSchemaError):
        load_manifest(path)


def test_missing_header_rejected(tmp_path):
    path = tmp_path / "headerless.jsonl"
    path.write_text(json.dumps(question_record("q1", "factoolqa")) + "\n")
    with pytest.raises(ManifestSchemaError):
        load_manifest(path)


# --- response ingestion -------------------------------------------------------


def test_ingest_joins_rows(small_manifest, tmp_path):
    path = write_csv(
        tmp_path / "responses.csv",
        ["question_id", "response"],
        [["q1", "yes"], ["q2", "no"], ["q3", "I don't know."]],
    )
    result = ingest_responses(path, small_manifest)
    assert len(result.pairs) == 3
    assert result.missing_ids == ["q4", "q5", "q6"]


def test_ingest_unknown_id(small_manifest, tmp_path):
    path = write_csv(
        tmp_path / "responses.csv", ["question_id", "response"], [["q999", "hi"]]
    )
    with pytest.raises(UnknownQuestionError):
        ingest_responses(path, small_manifest)


def test_ingest_duplicate_id(small_manifest, tmp_path):
    path = write_csv(
        tmp_path / "responses.csv",
        ["question_id", "response"],
        [["q1", "yes"], ["q1", "no"]],
    )
    with pytest.raises(DuplicateRowError):
        ingest_responses(path, small_manifest)


def test_ingest_bad_header(small_manifest, tmp_path):
    path = write_csv(tmp_path / "responses.csv", ["id", "text"], [["q1", "x"]])
    with pytest.raises(CsvFormatError):
        ingest_responses(path, small_manifest)


def test_ingest_quoted_multiline_response(small_manifest, tmp_path):
    path = tmp_path / "responses.csv"
    path.write_text(
        'question_id,response\nq1,"Yes, indeed.\nSecond line."\n', encoding="utf-8"
    )
    result = ingest_responses(path, small_manifest)
    assert result.pairs[0][1] == "Yes, indeed.\nSecond line."


# --- measures -------------------------------------------------------


LEXICON = load_uncertainty_lexicon()


def test_exact_match_first_token():
    record = [
        r for r in [question_record("s", "snowballing", gold_answer="yes")]
    ][0]
    from factlab.llm_eval import QuestionRecord

    parsed = QuestionRecord.from_dict(record)
    outcome = eval_exact_match(parsed, "Yes, 10733 is prime because...", LEXICON)
    assert outcome.correct and not outcome.unparseable


def test_exact_match_refusal_lexicon():
    from factlab.llm_eval import QuestionRecord

    record = QuestionRecord.from_dict(
        question_record("a", "selfaware", answerable=False)
    )
    outcome = eval_exact_match(record, "I don't know the answer.", LEXICON)
    assert outcome.correct
    assert outcome.predicted == "refused"


def test_exact_match_unparseable_counts_incorrect():
    from factlab.llm_eval import QuestionRecord

    record = QuestionRecord.from_dict(
        question_record("s", "snowballing", gold_answer="no")
    )
    outcome = eval_exact_match(record, "The graph is connected", LEXICON)
    assert not outcome.correct
    assert outcome.unparseable


def test_judge_grammar():
    from factlab.llm_eval import QuestionRecord

    record = QuestionRecord.from_dict(question_record("f", "freshqa"))
    assert eval_judge(record, "resp", MockBackend(default="correct"))
    assert not eval_judge(
        record, "resp", MockBackend(default="incorrect: outdated")
    )
    with pytest.raises(JudgeParseError):
        eval_judge(record, "resp", MockBackend(default="n/a"))


def test_freeform_fraction(registry, offline_config_yaml):
    config = load_pipeline_config(offline_config_yaml, registry)
    outcome = eval_freeform(FIXTURE_DOCUMENT, config, registry)
    assert outcome.fraction_true == pytest.approx(0.5)
    assert outcome.claim_counts == {"true": 1, "false": 1, "unknown": 0}


def test_freeform_all_unknown(registry, offline_config_yaml):
    config = load_pipeline_config(offline_config_yaml, registry)
    outcome = eval_freeform(
        "Quantum flux capacitors resonate smoothly.", config, registry
    )
    assert outcome.fraction_true is None
    assert outcome.claim_counts["unknown"] == 1


# --- full evaluation and report -------------------------------------------------


@pytest.fixture
def mixed_manifest_path(tmp_path):
    records = [
        question_record("s1", "snowballing", gold_answer="yes"),
        question_record("s2", "snowballing", gold_answer="yes"),
        question_record("s3", "snowballing", gold_answer="no"),
        question_record("s4", "snowballing", gold_answer="no"),
        question_record("a1", "selfaware", answerable=False),
        question_record("a2", "selfaware", answerable=True),
        question_record("f1", "freshqa"),
        question_record("f2", "freshqa"),
        question_record("q1", "factoolqa"),
        question_record("q2", "felm-wk"),
    ]
    return write_factqa_manifest(tmp_path / "mixed.jsonl", records)


@pytest.fixture
def mixed_responses_path(tmp_path):
    return write_csv(
        tmp_path / "responses.csv",
        ["question_id", "response"],
        [
            ["s1", "Yes, it is."],
            ["s2", "Clearly no."],
            ["s3", "no"],
            ["s4", "No doubt about it."],
            ["a1", "I don't know the answer."],
            ["a2", "It is 42."],
            ["f1", "answer one"],
            ["f2", "answer two"],
            ["q1", FIXTURE_DOCUMENT],
            ["q2", "Quantum flux capacitors resonate smoothly."],
        ],
    )


@pytest.fixture
def mixed_judge():
    return MockBackend(
        responses={"Question f1?": "correct", "Question f2?": "incorrect: stale"}
    )


def _mixed_evaluator(registry, offline_config_yaml, manifest_path, judge):
    manifest = load_manifest(manifest_path)
    config = load_pipeline_config(offline_config_yaml, registry)
    return LLMEvaluator(
        manifest,
        checker_config=config,
        judge=judge,
        registry=registry,
        timer=None,
    )


def test_mixed_report(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path, mixed_judge
):
    evaluator = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    report = evaluator.evaluate("fixture-model", mixed_responses_path)

    snow = report.subsets["snowballing"]
    # gold [y,y,n,n], predicted [y,n,n,n]
    assert snow["accuracy"] == pytest.approx(0.75)
    assert snow["confusion"]["matrix"] == [[1, 1], [0, 2]]
    assert sum(sum(row) for row in snow["confusion"]["matrix"]) == snow["n_evaluated"]

    self_aware = report.subsets["selfaware"]
    assert self_aware["accuracy"] == pytest.approx(1.0)
    assert sum(sum(row) for row in self_aware["confusion"]["matrix"]) == 2

    fresh = report.subsets["freshqa"]
    assert fresh["accuracy"] == pytest.approx(0.5)
    assert fresh["pie"] == [
        {"label": "correct", "value": 1},
        {"label": "incorrect", "value": 1},
    ]

    factool = report.subsets["factoolqa"]
    assert factool["accuracy"] == pytest.approx(0.5)
    assert factool["claims"] == {"true": 1, "false": 1, "unknown": 0}

    felm = report.subsets["felm-wk"]
    assert "accuracy" not in felm
    assert felm["n_undefined"] == 1

    for subset in ("factcheck-bench", "factscore-bio"):
        assert report.subsets[subset] == {"n_evaluated": 0}

    assert report.totals["n_evaluated"] == 10
    # bars are percentages and sum to 100 modulo rounding where defined
    bars = factool["bars"]
    assert sum(bar["value"] for bar in bars) == pytest.approx(100.0, abs=0.01)


def test_error_type_grouping_and_recount(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path, mixed_judge
):
    evaluator = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    report = evaluator.evaluate("fixture-model", mixed_responses_path)

    # Independent recount from the raw fixture definition. The selfaware rows
    # are tagged {Type1, Type3} and must count toward both groups; rows with
    # an undefined fraction contribute to no group.
    manifest = load_manifest(mixed_manifest_path)
    rows_by_id = {record.id: record for record in manifest.records}
    scores = {
        "s1": 1.0, "s2": 0.0, "s3": 1.0, "s4": 1.0,
        "a1": 1.0, "a2": 1.0,
        "f1": 1.0, "f2": 0.0,
        "q1": 0.5, "q2": None,
    }
    for error_type in ("Type1", "Type2", "Type3"):
        typed = [
            record_id
            for record_id, record in rows_by_id.items()
            if error_type in record.error_types and scores[record_id] is not None
        ]
        block = report.error_types[error_type]
        assert block["n"] == len(typed)
        expected = sum(scores[record_id] for record_id in typed) / len(typed)
        assert block["accuracy"] == pytest.approx(expected, abs=1e-6)

    # Boolean-correct identity: per-type correct counts double-count
    # multi-type rows exactly once per extra tag.
    boolean_rows = [
        record_id for record_id, score in scores.items()
        if score in (0.0, 1.0)
    ]
    overall_correct = sum(
        1 for record_id in boolean_rows if scores[record_id] == 1.0
    )
    per_type_sum = sum(
        report.error_types[t].get("correct_count", 0)
        for t in ("Type1", "Type2", "Type3")
    )
    double_counts = sum(
        (len(rows_by_id[record_id].error_types) - 1)
        for record_id in boolean_rows
        if scores[record_id] == 1.0
    )
    assert per_type_sum == overall_correct + double_counts


def test_accuracy_equals_confusion_trace_when_parseable(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path, mixed_judge
):
    """For fully parseable yes/no subsets, accuracy == trace / cell sum."""
    evaluator = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    report = evaluator.evaluate("fixture-model", mixed_responses_path)
    for subset in ("snowballing", "selfaware"):
        block = report.subsets[subset]
        matrix = block["confusion"]["matrix"]
        trace = sum(matrix[i][i] for i in range(len(matrix)))
        cells = sum(sum(row) for row in matrix)
        assert block.get("n_unparseable", 0) == 0
        assert block["accuracy"] == pytest.approx(trace / cells)


def test_report_determinism(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path, mixed_judge
):
    evaluator = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    first = evaluator.evaluate("fixture-model", mixed_responses_path).to_json()
    second = evaluator.evaluate("fixture-model", mixed_responses_path).to_json()
    assert first == second


def test_parallel_rows_match_sequential(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path, mixed_judge
):
    sequential = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    parallel = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, mixed_judge
    )
    parallel.max_workers = 4
    assert (
        sequential.evaluate("m", mixed_responses_path).to_json()
        == parallel.evaluate("m", mixed_responses_path).to_json()
    )


def test_skipped_rows_without_judge(
    registry, offline_config_yaml, mixed_manifest_path, mixed_responses_path
):
    evaluator = _mixed_evaluator(
        registry, offline_config_yaml, mixed_manifest_path, judge=None
    )
    report = evaluator.evaluate("fixture-model", mixed_responses_path)
    assert report.subsets["freshqa"] == {"n_evaluated": 0}
    skipped_ids = {item["id"] for item in report.coverage["skipped"]}
    assert skipped_ids == {"f1", "f2"}


def test_empty_evaluation_error(tmp_path):
    records = [question_record("f1", "freshqa")]
    manifest = load_manifest(write_factqa_manifest(tmp_path / "m.jsonl", records))
    responses = write_csv(
        tmp_path / "r.csv", ["question_id", "response"], [["f1", "hello"]]
    )
    evaluator = LLMEvaluator(manifest, judge=None, timer=None)
    with pytest.raises(EmptyEvaluationError):
        evaluator.evaluate("m", responses)


def test_judge_parse_error_skips_row(tmp_path):
    records = [question_record("f1", "freshqa"), question_record("s1", "snowballing")]
    manifest = load_manifest(write_factqa_manifest(tmp_path / "m.jsonl", records))
    responses = write_csv(
        tmp_path / "r.csv",
        ["question_id", "response"],
        [["f1", "resp"], ["s1", "yes"]],
    )
    evaluator = LLMEvaluator(
        manifest, judge=MockBackend(default="n/a"), timer=None
    )
    report = evaluator.evaluate("m", responses)
    assert report.subsets["freshqa"] == {"n_evaluated": 0}
    assert len(report.coverage["skipped"]) == 1


# --- domain distribution -------------------------------------------------------


def test_domain_distribution_small(tmp_path):
    records = [
        question_record("q1", "factoolqa", domain="a"),
        question_record("q2", "factoolqa", domain="a"),
        question_record("q3", "factoolqa", domain="b"),
        question_record("q4", "factoolqa", domain="b"),
        question_record("q5", "factoolqa", domain="c"),
    ]
    manifest = load_manifest(write_factqa_manifest(tmp_path / "m.jsonl", records))
    assert domain_distribution(manifest) == {"a": 2, "b": 2, "c": 1}


def test_domain_distribution_empty(tmp_path):
    manifest = load_manifest(
        write_factqa_manifest(tmp_path / "m.jsonl", [], declared_counts={})
    )
    assert domain_distribution(manifest) == {}


def test_domain_distribution_full_factqa(tmp_path):
    """Synthetic manifest mirroring the benchmark's top-20 domain sizes."""
    records = []
    counter = 0
    for domain, size in TOP20_DOMAINS.items():
        for _ in range(size):
            records.append(
                question_record(f"q{counter}", "factoolqa", domain=domain)
            )
            counter += 1
    filler_total = 6480 - sum(TOP20_DOMAINS.values())
    filler_domain = 0
    while filler_total > 0:
        batch = min(4, filler_total)  # keep filler domains far below the top 20
        for _ in range(batch):
            records.append(
                question_record(
                    f"q{counter}", "factoolqa", domain=f"niche-{filler_domain}"
                )
            )
            counter += 1
        filler_total -= batch
        filler_domain += 1
    manifest = load_manifest(write_factqa_manifest(tmp_path / "full.jsonl", records))

    distribution = domain_distribution(manifest)
    items = list(distribution.items())
    assert items[0] == ("History", 771)
    assert items[1] == ("Biography", 683)
    assert items[2] == ("Mathematics", 612)
    top20 = items[:20]
    assert {name for name, _ in top20} == set(TOP20_DOMAINS)
    # The top-20 sizes sum to 4708; the source table's own footer (4523,
    # 69.8%) disagrees with its cells, so the cells win here.
    assert sum(count for _, count in top20) == 4708
    assert sum(distribution.values()) == 6480
