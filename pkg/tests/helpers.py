"""Builders for synthetic manifests, CSVs, and oracle computations."""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from typing import Any, Iterable, Mapping


def question_record(record_id: str, subset: str, **overrides: Any) -> dict[str, Any]:
    base: dict[str, Any] = {
        "id": record_id,
        "question": f"Question {record_id}?",
        "domain": "History",
        "topic": "general",
        "ability": "world knowledge",
        "task": "qa",
        "source": "fixture",
        "subset": subset,
        "error_types": ["Type1"],
    }
    if subset == "snowballing":
        base["gold_answer"] = "yes"
        base["error_types"] = ["Type2"]
    if subset == "selfaware":
        base["answerable"] = True
        base["error_types"] = ["Type1", "Type3"]
    if subset == "freshqa":
        base["error_types"] = ["Type3"]
    base.update(overrides)
    return base


def write_factqa_manifest(
    path,
    records: Iterable[Mapping[str, Any]],
    declared_counts: Mapping[str, int] | None = None,
    name: str = "factqa-fixture",
):
    records = list(records)
    if declared_counts is None:
        declared_counts = dict(Counter(record["subset"] for record in records))
    header = {"name": name, "declared_counts": dict(declared_counts)}
    lines = [json.dumps(header)] + [json.dumps(record) for record in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def gold_record(
    record_id: str,
    dataset: str = "factool-qa",
    label: str = "true",
    granularity: str | None = None,
    **overrides: Any,
) -> dict[str, Any]:
    record = {
        "id": record_id,
        "dataset": dataset,
        "granularity": granularity
        or ("document" if dataset == "halueval" else "claim"),
        "text": f"Gold claim {record_id}.",
        "label": label,
    }
    record.update(overrides)
    return record


def write_factbench_manifest(
    path,
    records: Iterable[Mapping[str, Any]],
    declared_counts: Mapping[str, Mapping[str, int]] | None = None,
    name: str = "factbench-fixture",
):
    records = list(records)
    if declared_counts is None:
        tally: dict[str, Counter] = {}
        for record in records:
            tally.setdefault(record["dataset"], Counter())[record["label"]] += 1
        declared_counts = {
            dataset: {
                "true": counts.get("true", 0),
                "false": counts.get("false", 0),
                "unknown": counts.get("unknown", 0),
            }
            for dataset, counts in tally.items()
        }
    header = {"name": name, "declared_counts": dict(declared_counts)}
    lines = [json.dumps(header)] + [json.dumps(record) for record in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_csv(path, header: list[str], rows: Iterable[Iterable[Any]]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(row))
    return path


# --- independent oracles --------------------------------------------------


def bm25_scores_brute(
    docs_tokens: list[list[str]],
    query_tokens: list[str],
    k1: float = 1.5,
    b: float = 0.75,
) -> list[float]:
    """Reference BM25: per-document loop, no index, same idf convention."""
    n = len(docs_tokens)
    if n == 0:
        return []
    avgdl = sum(len(tokens) for tokens in docs_tokens) / n
    df: Counter = Counter()
    for tokens in docs_tokens:
        for term in set(tokens):
            df[term] += 1
    scores = []
    for tokens in docs_tokens:
        tf = Counter(tokens)
        dl = len(tokens)
        score = 0.0
        for term in query_tokens:
            if term not in tf:
                continue
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            norm = k1 * (1.0 - b + b * dl / avgdl) if avgdl else k1
            score += idf * tf[term] * (k1 + 1.0) / (tf[term] + norm)
        scores.append(score)
    return scores


def prf_brute(gold: list[str], predicted: list[str], positive: str) -> tuple[float, float, float]:
    """Reference P/R/F1 by direct TP/FP/FN recount over binary-gold rows."""
    binary = [(g, p) for g, p in zip(gold, predicted) if g in ("true", "false")]
    tp = sum(1 for g, p in binary if g == positive and p == positive)
    fp = sum(1 for g, p in binary if g != positive and p == positive)
    fn = sum(1 for g, p in binary if g == positive and p != positive)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def accuracy_brute(gold: list[str], predicted: list[str]) -> float | None:
    binary = [(g, p) for g, p in zip(gold, predicted) if g in ("true", "false")]
    if not binary:
        return None
    return sum(1 for g, p in binary if g == p) / len(binary)
