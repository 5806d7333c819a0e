"""LLM factuality scoring across the seven question-benchmark subsets.

Uploaded responses are joined to a question manifest, each row is scored by
the measure its subset calls for (exact match, refusal detection, judge
backend, or a full fact-checking pipeline), and the per-subset results are
folded into one multi-aspect report. Rows that cannot be evaluated are
skipped and counted, never fatal: uploads are user-provided and partially
malformed in practice.
"""

from __future__ import annotations

import csv
import json
import re
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Any, Callable, Mapping, Sequence

from .errors import (
    CsvFormatError,
    DuplicateRowError,
    EmptyEvaluationError,
    FactLabError,
    JudgeParseError,
    ManifestCountError,
    ManifestSchemaError,
    UnknownQuestionError,
)
from .pipeline import PipelineConfig, SolverRegistry
from .response import evaluate_response
from .solvers.backends import Generation, TextGenerationBackend

SUBSETS = (
    "snowballing",
    "selfaware",
    "freshqa",
    "factoolqa",
    "felm-wk",
    "factcheck-bench",
    "factscore-bio",
)
YES_NO_SUBSETS = ("snowballing", "selfaware")
FREEFORM_SUBSETS = ("factoolqa", "felm-wk", "factcheck-bench", "factscore-bio")
ERROR_TYPES = ("Type1", "Type2", "Type3")

JUDGE_PROMPT = (
    "Question:\n{question}\n\nResponse:\n{response}\n{note}\n"
    "Is the response factually correct? Answer with exactly one of: "
    "correct, incorrect.\n"
)

_ALPHA_TOKEN = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class QuestionRecord:
    """One benchmark question with its provenance and evaluation labels."""

    id: str
    question: str
    domain: str
    topic: str
    ability: str
    task: str
    source: str
    subset: str
    error_types: tuple[str, ...] = ()
    gold_answer: str | None = None
    answerable: bool | None = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "QuestionRecord":
        for key in ("id", "question", "domain", "topic", "ability", "task", "source"):
            value = data.get(key)
            if not isinstance(value, str) or not value.strip():
                raise ManifestSchemaError(f"record is missing field {key!r}")
        subset = data.get("subset")
        if subset not in SUBSETS:
            raise ManifestSchemaError(f"unknown subset {subset!r}")
        error_types = tuple(data.get("error_types", ()))
        for error_type in error_types:
            if error_type not in ERROR_TYPES:
                raise ManifestSchemaError(f"unknown error type {error_type!r}")
        gold_answer = data.get("gold_answer")
        answerable = data.get("answerable")
        if subset == "snowballing":
            if not isinstance(gold_answer, str) or gold_answer.lower() not in (
                "yes",
                "no",
            ):
                raise ManifestSchemaError(
                    f"snowballing record {data.get('id')!r} needs a yes/no "
                    "gold_answer"
                )
            gold_answer = gold_answer.lower()
        if subset == "selfaware" and not isinstance(answerable, bool):
            raise ManifestSchemaError(
                f"selfaware record {data.get('id')!r} needs a boolean answerable"
            )
        return cls(
            id=str(data["id"]),
            question=str(data["question"]),
            domain=str(data["domain"]),
            topic=str(data["topic"]),
            ability=str(data["ability"]),
            task=str(data["task"]),
            source=str(data["source"]),
            subset=str(subset),
            error_types=error_types,
            gold_answer=gold_answer,
            answerable=answerable,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "question": self.question,
            "domain": self.domain,
            "topic": self.topic,
            "ability": self.ability,
            "task": self.task,
            "source": self.source,
            "subset": self.subset,
            "error_types": list(self.error_types),
        }
        if self.gold_answer is not None:
            out["gold_answer"] = self.gold_answer
        if self.answerable is not None:
            out["answerable"] = self.answerable
        return out


@dataclass
class DatasetManifest:
    name: str
    records: list[QuestionRecord]
    declared_counts: dict[str, int]

    def by_id(self) -> dict[str, QuestionRecord]:
        return {record.id: record for record in self.records}

    @property
    def total(self) -> int:
        return sum(self.declared_counts.values())


def load_manifest(path) -> DatasetManifest:
    """Load and validate a question manifest (JSON header + JSONL records).

    The first line is a header object carrying ``declared_counts`` per
    subset; actual per-subset record counts must match it exactly.
    """
    header: Mapping[str, Any] | None = None
    records: list[QuestionRecord] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestSchemaError(f"{path}:{lineno}: {exc}") from exc
            if header is None:
                if not isinstance(data, Mapping) or "declared_counts" not in data:
                    raise ManifestSchemaError(
                        f"{path}:{lineno}: first line must be a header with "
                        "declared_counts"
                    )
                header = data
                continue
            try:
                record = QuestionRecord.from_dict(data)
            except ManifestSchemaError as exc:
                raise ManifestSchemaError(f"{path}:{lineno}: {exc}") from None
            if record.id in seen_ids:
                raise ManifestSchemaError(
                    f"{path}:{lineno}: duplicate record id {record.id!r}"
                )
            seen_ids.add(record.id)
            records.append(record)
    if header is None:
        raise ManifestSchemaError(f"{path}: manifest has no header line")

    declared = header["declared_counts"]
    if not isinstance(declared, Mapping):
        raise ManifestSchemaError("declared_counts must be a mapping")
    declared_counts = {}
    for subset, count in declared.items():
        if subset not in SUBSETS:
            raise ManifestSchemaError(f"declared_counts has unknown subset {subset!r}")
        declared_counts[subset] = int(count)

    actual = Counter(record.subset for record in records)
    for subset in SUBSETS:
        expected = declared_counts.get(subset, 0)
        if actual.get(subset, 0) != expected:
            raise ManifestCountError(
                subset,
                f"subset {subset!r} declares {expected} records but has "
                f"{actual.get(subset, 0)}",
            )
    return DatasetManifest(
        name=str(header.get("name", "factqa")),
        records=records,
        declared_counts=declared_counts,
    )


@dataclass
class IngestResult:
    pairs: list[tuple[QuestionRecord, str]]
    missing_ids: list[str]


def ingest_responses(path, manifest: DatasetManifest) -> IngestResult:
    """Join an uploaded response CSV (``question_id,response``) to the manifest.

    Manifest records without a response are reported as missing coverage,
    not as an error; unknown or duplicated ids are errors.
    """
    by_id = manifest.by_id()
    pairs: list[tuple[QuestionRecord, str]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("CSV is empty") from None
        if header != ["question_id", "response"]:
            raise CsvFormatError(
                f"expected header question_id,response, got {','.join(header)}"
            )
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 2:
                raise CsvFormatError("expected 2 columns", row=row_number)
            question_id, response = row
            if question_id not in by_id:
                raise UnknownQuestionError(
                    f"row {row_number}: question id {question_id!r} is not in "
                    "the manifest"
                )
            if question_id in seen:
                raise DuplicateRowError(
                    f"row {row_number}: duplicate question id {question_id!r}"
                )
            seen.add(question_id)
            pairs.append((by_id[question_id], response))
    missing = sorted(set(by_id) - seen)
    return IngestResult(pairs=pairs, missing_ids=missing)


# --- per-subset measures -------------------------------------------------


def load_uncertainty_lexicon(path=None) -> tuple[str, ...]:
    """Refusal phrases, from the bundled list or a user-supplied file."""
    if path is None:
        text = (
            resources.files("factlab")
            .joinpath("data/uncertainty_lexicon.txt")
            .read_text(encoding="utf-8")
        )
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    phrases = []
    for line in text.splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            phrases.append(line)
    return tuple(phrases)


def _normalize_response(text: str) -> str:
    text = text.lower().replace("’", "'")
    return re.sub(r"\s+", " ", text).strip()


def first_yes_no_token(response: str) -> str | None:
    for token in _ALPHA_TOKEN.findall(_normalize_response(response)):
        if token in ("yes", "no"):
            return token
    return None


def is_refusal(response: str, lexicon: Sequence[str]) -> bool:
    normalized = _normalize_response(response)
    return any(phrase in normalized for phrase in lexicon)


@dataclass(frozen=True)
class ExactMatchOutcome:
    correct: bool
    predicted: str | None
    unparseable: bool = False


def eval_exact_match(
    record: QuestionRecord,
    response: str,
    lexicon: Sequence[str],
) -> ExactMatchOutcome:
    """Short-answer scoring for the yes/no subsets.

    Snowballing compares the first yes/no token against the gold answer; a
    response with no such token counts as incorrect and is flagged
    unparseable. Selfaware classifies the response as a refusal via the
    uncertainty lexicon and scores refusal against answerability.
    """
    if record.subset == "snowballing":
        token = first_yes_no_token(response)
        if token is None:
            return ExactMatchOutcome(correct=False, predicted=None, unparseable=True)
        return ExactMatchOutcome(correct=token == record.gold_answer, predicted=token)
    if record.subset == "selfaware":
        refused = is_refusal(response, lexicon)
        predicted = "refused" if refused else "answered"
        correct = refused == (not record.answerable)
        return ExactMatchOutcome(correct=correct, predicted=predicted)
    raise ValueError(f"exact match does not apply to subset {record.subset!r}")


def eval_judge(
    record: QuestionRecord,
    response: str,
    judge: TextGenerationBackend,
    usage_sink: list[Generation] | None = None,
) -> bool:
    """Judge-based scoring for fresh questions; strict correct/incorrect grammar."""
    note = (
        f"Current answer: {record.gold_answer}\n" if record.gold_answer else ""
    )
    generation = judge.generate(
        JUDGE_PROMPT.format(question=record.question, response=response, note=note)
    )
    if usage_sink is not None:
        usage_sink.append(generation)
    match = re.search(r"[A-Za-z]+", generation.text)
    token = match.group(0).lower() if match else ""
    if token == "correct":
        return True
    if token == "incorrect":
        return False
    raise JudgeParseError(
        f"judge output {generation.text[:60]!r} is not correct/incorrect"
    )


@dataclass(frozen=True)
class FreeformOutcome:
    fraction_true: float | None
    claim_counts: dict[str, int]
    cost_usd: float


def eval_freeform(
    response: str,
    checker_config: PipelineConfig,
    registry: SolverRegistry | None = None,
) -> FreeformOutcome:
    """Pipeline-checked scoring for free-form subsets.

    Returns the response credibility (undefined when every claim is
    Unknown) plus the claim-label tallies feeding the report's bar chart.
    """
    report = evaluate_response(response, checker_config, registry)
    counts = {"true": 0, "false": 0, "unknown": 0}
    for claim_report in report.claims:
        counts[claim_report.verdict.label.value] += 1
    return FreeformOutcome(
        fraction_true=report.credibility,
        claim_counts=counts,
        cost_usd=report.ledger_totals["cost_usd"],
    )


# --- orchestration -------------------------------------------------------


@dataclass
class RowResult:
    record: QuestionRecord
    response: str
    correct: bool | None = None
    predicted: str | None = None
    unparseable: bool = False
    fraction_true: float | None = None
    claim_counts: dict[str, int] | None = None
    skipped_reason: str | None = None
    cost_usd: float = 0.0
    time_seconds: float = 0.0

    @property
    def evaluated(self) -> bool:
        return self.skipped_reason is None

    def score(self) -> float | None:
        """Per-row factuality score used by the error-type grouping."""
        if not self.evaluated:
            return None
        if self.correct is not None:
            return 1.0 if self.correct else 0.0
        return self.fraction_true


@dataclass
class LLMReport:
    model_name: str
    subsets: dict[str, dict[str, Any]]
    error_types: dict[str, dict[str, Any]]
    totals: dict[str, Any]
    coverage: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {
            "model_name": self.model_name,
            "subsets": self.subsets,
            "error_types": self.error_types,
            "totals": self.totals,
            "coverage": self.coverage,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            self.to_dict(), sort_keys=True, indent=indent, ensure_ascii=False
        )


class LLMEvaluator:
    """Scores one model's uploaded responses against a question manifest.

    ``judge`` handles fresh questions and ``checker_config`` the free-form
    subsets; rows whose evaluator is not configured are skipped and counted.
    ``timer=None`` disables wall-clock measurement so report bytes are
    reproducible.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        checker_config: PipelineConfig | None = None,
        judge: TextGenerationBackend | None = None,
        registry: SolverRegistry | None = None,
        lexicon: Sequence[str] | None = None,
        max_workers: int = 1,
        timer: Callable[[], float] | None = time.perf_counter,
    ):
        self.manifest = manifest
        self.checker_config = checker_config
        self.judge = judge
        self.registry = registry
        self.lexicon = tuple(lexicon) if lexicon else load_uncertainty_lexicon()
        self.max_workers = max(1, int(max_workers))
        self.timer = timer

    def evaluate(self, model_name: str, input_path) -> LLMReport:
        ingest = ingest_responses(input_path, self.manifest)
        rows = self._evaluate_rows(ingest.pairs)
        return aggregate_report(model_name, rows, missing_ids=ingest.missing_ids)

    def _evaluate_rows(
        self, pairs: list[tuple[QuestionRecord, str]]
    ) -> list[RowResult]:
        if self.max_workers == 1 or len(pairs) <= 1:
            rows = [self._evaluate_row(record, response) for record, response in pairs]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                rows = list(
                    pool.map(lambda pair: self._evaluate_row(*pair), pairs)
                )
        # Aggregation must not depend on completion order.
        return sorted(rows, key=lambda row: row.record.id)

    def _evaluate_row(self, record: QuestionRecord, response: str) -> RowResult:
        row = RowResult(record=record, response=response)
        started = self.timer() if self.timer else 0.0
        try:
            if record.subset in YES_NO_SUBSETS:
                outcome = eval_exact_match(record, response, self.lexicon)
                row.correct = outcome.correct
                row.predicted = outcome.predicted
                row.unparseable = outcome.unparseable
            elif record.subset == "freshqa":
                if self.judge is None:
                    row.skipped_reason = "no judge configured"
                else:
                    usage: list[Generation] = []
                    try:
                        row.correct = eval_judge(record, response, self.judge, usage)
                    finally:
                        row.cost_usd += sum(g.cost_usd for g in usage)
            else:
                if self.checker_config is None:
                    row.skipped_reason = "no checker configured"
                else:
                    outcome = eval_freeform(
                        response, self.checker_config, self.registry
                    )
                    row.fraction_true = outcome.fraction_true
                    row.claim_counts = outcome.claim_counts
                    row.cost_usd += outcome.cost_usd
        except JudgeParseError as exc:
            row.skipped_reason = str(exc)
        except FactLabError as exc:
            row.skipped_reason = str(exc)
        if self.timer:
            row.time_seconds = self.timer() - started
        return row


def _round6(value: float) -> float:
    return round(value, 6)


def _confusion(
    rows: list[RowResult],
    row_labels: tuple[str, str],
    col_labels: tuple[str, str],
    gold_fn: Callable[[RowResult], str],
) -> dict[str, Any]:
    matrix = [[0, 0], [0, 0]]
    for row in rows:
        if row.predicted is None:
            continue
        matrix[row_labels.index(gold_fn(row))][col_labels.index(row.predicted)] += 1
    return {
        "row_labels": list(row_labels),
        "col_labels": list(col_labels),
        "matrix": matrix,
    }


def aggregate_report(
    model_name: str,
    rows: list[RowResult],
    missing_ids: Sequence[str] = (),
) -> LLMReport:
    """Fold per-row outcomes into the multi-aspect report."""
    evaluated = [row for row in rows if row.evaluated]
    if not evaluated:
        raise EmptyEvaluationError("no rows could be evaluated")

    subsets: dict[str, dict[str, Any]] = {}
    for subset in SUBSETS:
        subset_rows = [row for row in evaluated if row.record.subset == subset]
        block: dict[str, Any] = {"n_evaluated": len(subset_rows)}
        if not subset_rows:
            subsets[subset] = block
            continue
        if subset == "snowballing":
            correct = sum(1 for row in subset_rows if row.correct)
            block["accuracy"] = _round6(correct / len(subset_rows))
            block["n_unparseable"] = sum(1 for row in subset_rows if row.unparseable)
            block["confusion"] = _confusion(
                subset_rows,
                ("yes", "no"),
                ("yes", "no"),
                lambda row: row.record.gold_answer or "",
            )
        elif subset == "selfaware":
            correct = sum(1 for row in subset_rows if row.correct)
            block["accuracy"] = _round6(correct / len(subset_rows))
            block["confusion"] = _confusion(
                subset_rows,
                ("answerable", "unanswerable"),
                ("answered", "refused"),
                lambda row: "answerable" if row.record.answerable else "unanswerable",
            )
        elif subset == "freshqa":
            correct = sum(1 for row in subset_rows if row.correct)
            block["accuracy"] = _round6(correct / len(subset_rows))
            block["pie"] = [
                {"label": "correct", "value": correct},
                {"label": "incorrect", "value": len(subset_rows) - correct},
            ]
        else:
            defined = [
                row.fraction_true
                for row in subset_rows
                if row.fraction_true is not None
            ]
            if defined:
                block["accuracy"] = _round6(sum(defined) / len(defined))
            block["n_undefined"] = len(subset_rows) - len(defined)
            claim_totals = {"true": 0, "false": 0, "unknown": 0}
            for row in subset_rows:
                for label, count in (row.claim_counts or {}).items():
                    claim_totals[label] += count
            block["claims"] = claim_totals
            total_claims = sum(claim_totals.values())
            block["bars"] = [
                {
                    "label": label,
                    "value": _round6(
                        100.0 * claim_totals[label] / total_claims
                    )
                    if total_claims
                    else 0.0,
                }
                for label in ("true", "false", "unknown")
            ]
        subsets[subset] = block

    error_types: dict[str, dict[str, Any]] = {}
    for error_type in ERROR_TYPES:
        typed = [
            row
            for row in evaluated
            if error_type in row.record.error_types and row.score() is not None
        ]
        block = {"n": len(typed)}
        if typed:
            block["accuracy"] = _round6(
                sum(row.score() for row in typed) / len(typed)  # type: ignore[misc]
            )
            block["correct_count"] = sum(
                1 for row in typed if row.correct is True
            )
        error_types[error_type] = block

    skipped = [
        {"id": row.record.id, "reason": row.skipped_reason}
        for row in rows
        if not row.evaluated
    ]
    totals = {
        "n_evaluated": len(evaluated),
        "cost_usd": _round6(sum(row.cost_usd for row in rows)),
        "time_seconds": _round6(sum(row.time_seconds for row in rows)),
    }
    coverage = {
        "missing_ids": sorted(missing_ids),
        "skipped": sorted(skipped, key=lambda item: item["id"]),
    }
    return LLMReport(
        model_name=model_name,
        subsets=subsets,
        error_types=error_types,
        totals=totals,
        coverage=coverage,
    )


def domain_distribution(manifest: DatasetManifest) -> dict[str, int]:
    """Record count per domain, in descending count order (ties by name)."""
    counts = Counter(record.domain for record in manifest.records)
    return dict(sorted(counts.items(), key=lambda item: (-item[1], item[0])))
