"""Scoring fact-checkers against gold labels, and the leaderboard ranking.

Binary precision/recall/F1 and accuracy are computed strictly over rows
whose gold label is True or False; gold-Unknown rows still appear in the
3x3 confusion matrix and in a separate tally, but never distort the binary
rates. A predicted Unknown against a binary gold row counts as a non-match.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .errors import (
    CsvFormatError,
    DuplicateRowError,
    ManifestCountError,
    ManifestSchemaError,
    NoBinaryGoldError,
    UnknownClaimError,
    VerdictFormatError,
)
from .state import Label

GOLD_DATASETS = ("factool-qa", "felm-wk", "factcheck-bench", "halueval")
GRANULARITIES = ("claim", "segment", "document")
CONFUSION_LABELS = (Label.TRUE, Label.FALSE, Label.UNKNOWN)


@dataclass(frozen=True)
class GoldRecord:
    """One human-labeled claim/segment/document from the checker benchmark."""

    id: str
    dataset: str
    granularity: str
    text: str
    label: Label

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GoldRecord":
        record_id = data.get("id")
        if not isinstance(record_id, str) or not record_id:
            raise ManifestSchemaError("gold record is missing an id")
        dataset = data.get("dataset")
        if dataset not in GOLD_DATASETS:
            raise ManifestSchemaError(f"unknown gold dataset {dataset!r}")
        granularity = data.get("granularity")
        if granularity not in GRANULARITIES:
            raise ManifestSchemaError(f"unknown granularity {granularity!r}")
        if dataset == "halueval" and granularity != "document":
            raise ManifestSchemaError(
                "halueval records are labeled at document granularity only"
            )
        text = data.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ManifestSchemaError(f"gold record {record_id!r} has empty text")
        try:
            label = Label(str(data.get("label", "")).lower())
        except ValueError:
            raise ManifestSchemaError(
                f"gold record {record_id!r} has invalid label {data.get('label')!r}"
            ) from None
        return cls(
            id=record_id,
            dataset=str(dataset),
            granularity=str(granularity),
            text=text,
            label=label,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "dataset": self.dataset,
            "granularity": self.granularity,
            "text": self.text,
            "label": self.label.value,
        }


def load_factbench(path) -> list[GoldRecord]:
    """Load the gold manifest and validate its declared per-class counts.

    The header declares, per dataset, how many true/false/unknown records
    follow; any discrepancy is rejected naming the offending dataset.
    """
    header: Mapping[str, Any] | None = None
    records: list[GoldRecord] = []
    seen: set[str] = set()
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
                record = GoldRecord.from_dict(data)
            except ManifestSchemaError as exc:
                raise ManifestSchemaError(f"{path}:{lineno}: {exc}") from None
            if record.id in seen:
                raise ManifestSchemaError(
                    f"{path}:{lineno}: duplicate gold id {record.id!r}"
                )
            seen.add(record.id)
            records.append(record)
    if header is None:
        raise ManifestSchemaError(f"{path}: gold manifest has no header line")

    declared = header["declared_counts"]
    if not isinstance(declared, Mapping):
        raise ManifestSchemaError("declared_counts must be a mapping")
    actual: dict[str, Counter] = {name: Counter() for name in GOLD_DATASETS}
    for record in records:
        actual[record.dataset][record.label.value] += 1
    for dataset in GOLD_DATASETS:
        declared_classes = declared.get(dataset)
        if declared_classes is None:
            if sum(actual[dataset].values()):
                raise ManifestCountError(
                    dataset, f"dataset {dataset!r} has records but no declaration"
                )
            continue
        for class_name in ("true", "false", "unknown"):
            expected = int(declared_classes.get(class_name, 0))
            got = actual[dataset].get(class_name, 0)
            if got != expected:
                raise ManifestCountError(
                    dataset,
                    f"dataset {dataset!r} declares {expected} {class_name} "
                    f"records but has {got}",
                )
    unknown_datasets = set(declared) - set(GOLD_DATASETS)
    if unknown_datasets:
        raise ManifestSchemaError(
            f"declared_counts has unknown datasets: {sorted(unknown_datasets)}"
        )
    return records


@dataclass
class PredictionRow:
    record: GoldRecord
    predicted: Label
    time_seconds: float = 0.0
    cost_usd: float = 0.0


@dataclass
class VerdictIngest:
    rows: list[PredictionRow]
    missing_ids: list[str]


def ingest_verdicts(path, gold: Sequence[GoldRecord]) -> VerdictIngest:
    """Join a submission CSV to the gold records.

    Header is ``claim_id,verdict`` with optional ``time_s`` and ``cost_usd``
    columns (defaulting to 0). Row numbers in errors are 1-based over data
    rows. Unknown ids are collected and reported together.
    """
    by_id = {record.id: record for record in gold}
    rows: list[PredictionRow] = []
    seen: set[str] = set()
    unknown_ids: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("CSV is empty") from None
        if header[:2] != ["claim_id", "verdict"] or header not in (
            ["claim_id", "verdict"],
            ["claim_id", "verdict", "time_s"],
            ["claim_id", "verdict", "time_s", "cost_usd"],
        ):
            raise CsvFormatError(
                "expected header claim_id,verdict[,time_s[,cost_usd]], got "
                + ",".join(header)
            )
        width = len(header)
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != width:
                raise CsvFormatError(
                    f"expected {width} columns", row=row_number
                )
            claim_id = row[0]
            token = row[1].strip().lower()
            try:
                predicted = Label(token)
            except ValueError:
                raise VerdictFormatError(row_number, row[1]) from None
            if claim_id in seen:
                raise DuplicateRowError(
                    f"row {row_number}: duplicate claim id {claim_id!r}"
                )
            seen.add(claim_id)
            if claim_id not in by_id:
                unknown_ids.append(claim_id)
                continue
            try:
                time_seconds = float(row[2]) if width >= 3 and row[2] else 0.0
                cost_usd = float(row[3]) if width >= 4 and row[3] else 0.0
            except ValueError:
                raise CsvFormatError(
                    "time_s and cost_usd must be numbers", row=row_number
                ) from None
            rows.append(
                PredictionRow(
                    record=by_id[claim_id],
                    predicted=predicted,
                    time_seconds=time_seconds,
                    cost_usd=cost_usd,
                )
            )
    if unknown_ids:
        raise UnknownClaimError(unknown_ids)
    missing = sorted(set(by_id) - seen)
    return VerdictIngest(rows=rows, missing_ids=missing)


@dataclass
class ClassMetrics:
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0

    def to_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass
class CheckerMetrics:
    n: int
    accuracy: float
    true_class: ClassMetrics
    false_class: ClassMetrics
    confusion: list[list[int]]
    n_gold_unknown: int
    total_time_seconds: float
    total_cost_usd: float

    @property
    def macro_f1(self) -> float:
        return (self.true_class.f1 + self.false_class.f1) / 2.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "true": self.true_class.to_dict(),
            "false": self.false_class.to_dict(),
            "confusion": {
                "labels": [label.value for label in CONFUSION_LABELS],
                "matrix": [list(row) for row in self.confusion],
            },
            "n_gold_unknown": self.n_gold_unknown,
            "total_time_seconds": self.total_time_seconds,
            "total_cost_usd": self.total_cost_usd,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            self.to_dict(), sort_keys=True, indent=indent, ensure_ascii=False
        )


def _prf(tp: int, fp: int, fn: int) -> ClassMetrics:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return ClassMetrics(precision=precision, recall=recall, f1=f1)


def compute_metrics(rows: Sequence[PredictionRow]) -> CheckerMetrics:
    """Binary P/R/F1 plus accuracy over gold-True/False rows.

    The 3x3 confusion matrix covers every row including gold-Unknown ones;
    accuracy is the share of gold-binary rows whose prediction matches the
    gold label exactly (a predicted Unknown is a non-match).
    """
    if not rows:
        raise NoBinaryGoldError("no rows to score")
    index = {label: i for i, label in enumerate(CONFUSION_LABELS)}
    confusion = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
    for row in rows:
        confusion[index[row.record.label]][index[row.predicted]] += 1

    binary = [row for row in rows if row.record.label is not Label.UNKNOWN]
    if not binary:
        raise NoBinaryGoldError("every gold label is unknown")
    matches = sum(1 for row in binary if row.predicted is row.record.label)

    def class_metrics(positive: Label, negative: Label) -> ClassMetrics:
        tp = sum(
            1
            for row in binary
            if row.record.label is positive and row.predicted is positive
        )
        fp = sum(
            1
            for row in binary
            if row.record.label is negative and row.predicted is positive
        )
        fn = sum(
            1
            for row in binary
            if row.record.label is positive and row.predicted is not positive
        )
        return _prf(tp, fp, fn)

    return CheckerMetrics(
        n=len(rows),
        accuracy=matches / len(binary),
        true_class=class_metrics(Label.TRUE, Label.FALSE),
        false_class=class_metrics(Label.FALSE, Label.TRUE),
        confusion=confusion,
        n_gold_unknown=len(rows) - len(binary),
        total_time_seconds=sum(row.time_seconds for row in rows),
        total_cost_usd=sum(row.cost_usd for row in rows),
    )


@dataclass
class Submitter:
    name: str
    email: str
    opt_in: bool

    def to_dict(self, public: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "opt_in": self.opt_in}
        if not public:
            out["email"] = self.email
        return out


@dataclass
class LeaderboardEntry:
    entry_id: str
    checker_name: str
    submitter: Submitter
    metrics: CheckerMetrics
    submitted_at: str  # ISO-8601 UTC

    def to_dict(self, public: bool = False) -> dict[str, Any]:
        return {
            "entry_id": self.entry_id,
            "checker_name": self.checker_name,
            "submitter": self.submitter.to_dict(public=public),
            "metrics": self.metrics.to_dict(),
            "macro_f1": self.metrics.macro_f1,
            "submitted_at": self.submitted_at,
        }


def rank_leaderboard(
    entries: Iterable[LeaderboardEntry],
    best_per_checker: bool = False,
) -> list[LeaderboardEntry]:
    """Public ranking: macro-F1 desc, then cheaper, faster, earlier.

    Entries whose submitter opted out are excluded (they stay persisted and
    owner-retrievable). With ``best_per_checker`` only each checker's
    best-ranked submission is listed.
    """
    visible = [entry for entry in entries if entry.submitter.opt_in]
    ranked = sorted(
        visible,
        key=lambda entry: (
            -entry.metrics.macro_f1,
            entry.metrics.total_cost_usd,
            entry.metrics.total_time_seconds,
            entry.submitted_at,
        ),
    )
    if not best_per_checker:
        return ranked
    seen: set[str] = set()
    best = []
    for entry in ranked:
        if entry.checker_name not in seen:
            seen.add(entry.checker_name)
            best.append(entry)
    return best


class CheckerEvaluator:
    """Scores a verdict CSV against a loaded gold set."""

    def __init__(self, gold: Sequence[GoldRecord]):
        self.gold = list(gold)

    @classmethod
    def from_manifest(cls, path) -> "CheckerEvaluator":
        return cls(load_factbench(path))

    def evaluate(self, input_path) -> CheckerMetrics:
        ingest = ingest_verdicts(input_path, self.gold)
        return compute_metrics(ingest.rows)
