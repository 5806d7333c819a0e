"""Atomic fact-check units and the shared state carried through a pipeline run.

A pipeline run owns exactly one :class:`FactState`. Solvers read the entry
named by their configured input name, write the entry named by their output
name, and may append cost to their own ledger slot. The engine records wall
time per solver and re-validates the state invariants after every stage.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, Mapping

from .errors import StateInvariantError


class Stance(str, Enum):
    """Pairwise evidence/claim relation produced by a stance classifier."""

    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"


class Label(str, Enum):
    """Factuality verdict for a claim (or a whole response)."""

    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


class UnknownReason(str, Enum):
    INSUFFICIENT_EVIDENCE = "insufficient_evidence"
    OPINION = "opinion"


@dataclass(frozen=True)
class Claim:
    """A sentence-level assertion extracted from a document.

    ``source_span`` gives [start, end) character offsets into the original
    document; it is absent for claims rewritten by an LLM decomposer.
    """

    id: str
    text: str
    source_span: tuple[int, int] | None = None
    context: str | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"claim {self.id!r} has empty text")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id, "text": self.text}
        if self.source_span is not None:
            out["source_span"] = list(self.source_span)
        if self.context is not None:
            out["context"] = self.context
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Claim":
        span = data.get("source_span")
        return cls(
            id=str(data["id"]),
            text=str(data["text"]),
            source_span=(int(span[0]), int(span[1])) if span is not None else None,
            context=data.get("context"),
        )


@dataclass(frozen=True)
class EvidenceItem:
    """A retrieved passage with its provenance and relevance score."""

    text: str
    source_id: str
    score: float

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "source_id": self.source_id, "score": self.score}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvidenceItem":
        return cls(
            text=str(data["text"]),
            source_id=str(data["source_id"]),
            score=float(data["score"]),
        )


@dataclass(frozen=True)
class Verdict:
    """Per-claim factuality verdict.

    ``unknown_reason`` is present exactly when the label is Unknown;
    ``supporting_evidence`` holds the source ids the verdict rests on.
    """

    label: Label
    unknown_reason: UnknownReason | None = None
    supporting_evidence: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.label is Label.UNKNOWN) != (self.unknown_reason is not None):
            raise ValueError(
                "unknown_reason must be present iff the label is unknown"
            )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "label": self.label.value,
            "supporting_evidence": list(self.supporting_evidence),
        }
        if self.unknown_reason is not None:
            out["unknown_reason"] = self.unknown_reason.value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Verdict":
        reason = data.get("unknown_reason")
        return cls(
            label=Label(data["label"]),
            unknown_reason=UnknownReason(reason) if reason is not None else None,
            supporting_evidence=tuple(data.get("supporting_evidence", ())),
        )


@dataclass
class LedgerEntry:
    """Wall time and cost booked against one solver execution."""

    wall_time_seconds: float = 0.0
    cost_usd: float = 0.0

    def to_dict(self) -> dict[str, float]:
        return {
            "wall_time_seconds": self.wall_time_seconds,
            "cost_usd": self.cost_usd,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LedgerEntry":
        return cls(
            wall_time_seconds=float(data.get("wall_time_seconds", 0.0)),
            cost_usd=float(data.get("cost_usd", 0.0)),
        )


class FactState:
    """Named store of everything produced during one verification run.

    Well-known entries: ``document`` (str), ``claims`` (list[Claim]),
    ``evidence`` (claim id -> list[EvidenceItem]), ``verdicts``
    (claim id -> Verdict) and ``ledger`` (solver name -> LedgerEntry).
    Arbitrary additional entries are allowed; solvers address entries by the
    names given in the pipeline config.
    """

    def __init__(self, entries: Mapping[str, Any] | None = None):
        self._entries: dict[str, Any] = dict(entries or {})
        self._entries.setdefault("ledger", {})

    # -- generic access ---------------------------------------------------

    def get(self, name: str) -> Any:
        return self._entries[name]

    def set(self, name: str, value: Any) -> None:
        self._entries[name] = value

    def has(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> Iterator[str]:
        return iter(self._entries)

    # -- well-known entries -----------------------------------------------

    @property
    def document(self) -> str:
        return self._entries.get("document", "")

    @property
    def claims(self) -> list[Claim]:
        return self._entries.get("claims", [])

    @property
    def evidence(self) -> dict[str, list[EvidenceItem]]:
        return self._entries.get("evidence", {})

    @property
    def verdicts(self) -> dict[str, Verdict]:
        return self._entries.get("verdicts", {})

    @property
    def ledger(self) -> dict[str, LedgerEntry]:
        return self._entries["ledger"]

    def add_cost(self, solver_name: str, cost_usd: float) -> None:
        entry = self.ledger.setdefault(solver_name, LedgerEntry())
        entry.cost_usd += cost_usd

    def total_time_seconds(self) -> float:
        return sum(e.wall_time_seconds for e in self.ledger.values())

    def total_cost_usd(self) -> float:
        return sum(e.cost_usd for e in self.ledger.values())

    # -- invariants ---------------------------------------------------------

    def validate(self) -> None:
        """Raise StateInvariantError when a cross-entry invariant is broken."""
        claim_ids = [c.id for c in self.claims]
        known = set(claim_ids)
        if len(known) != len(claim_ids):
            raise StateInvariantError("duplicate claim ids in state")
        for entry_name in ("evidence", "verdicts"):
            mapping = self._entries.get(entry_name)
            if not isinstance(mapping, dict):
                continue
            for claim_id in mapping:
                if claim_id not in known:
                    raise StateInvariantError(
                        f"{entry_name} references unknown claim id {claim_id!r}"
                    )
        for name, entry in self.ledger.items():
            if entry.wall_time_seconds < 0 or entry.cost_usd < 0:
                raise StateInvariantError(
                    f"ledger entry {name!r} has negative time or cost"
                )

    def clone(self) -> "FactState":
        return FactState(copy.deepcopy(self._entries))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name, value in self._entries.items():
            out[name] = _entry_to_jsonable(name, value)
        return out

    def to_json(self, indent: int | None = 2) -> str:
        """Canonical JSON form: sorted keys, stable across runs."""
        return json.dumps(
            self.to_dict(), sort_keys=True, indent=indent, ensure_ascii=False
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FactState":
        entries: dict[str, Any] = {}
        for name, value in data.items():
            entries[name] = revive_entry(name, value)
        return cls(entries)

    @classmethod
    def from_json(cls, text: str) -> "FactState":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"FactState(entries={sorted(self._entries)})"


def _entry_to_jsonable(name: str, value: Any) -> Any:
    if name == "claims" and isinstance(value, list):
        return [c.to_dict() if isinstance(c, Claim) else c for c in value]
    if name == "evidence" and isinstance(value, dict):
        return {
            cid: [e.to_dict() if isinstance(e, EvidenceItem) else e for e in items]
            for cid, items in value.items()
        }
    if name == "verdicts" and isinstance(value, dict):
        return {
            cid: v.to_dict() if isinstance(v, Verdict) else v
            for cid, v in value.items()
        }
    if name == "ledger" and isinstance(value, dict):
        return {
            solver: e.to_dict() if isinstance(e, LedgerEntry) else e
            for solver, e in value.items()
        }
    return value


def revive_entry(name: str, value: Any) -> Any:
    """Rebuild typed values for the well-known entry names.

    Unknown entry names are kept as parsed JSON. Lists of claim-shaped
    objects under custom names are also revived so pipelines with renamed
    outputs can round-trip.
    """
    if name == "ledger" and isinstance(value, dict):
        return {k: LedgerEntry.from_dict(v) for k, v in value.items()}
    if isinstance(value, list) and value and _all_claim_shaped(value):
        return [Claim.from_dict(item) for item in value]
    if name == "evidence" and isinstance(value, dict):
        return {
            cid: [EvidenceItem.from_dict(e) for e in items]
            for cid, items in value.items()
        }
    if name == "verdicts" and isinstance(value, dict):
        return {cid: Verdict.from_dict(v) for cid, v in value.items()}
    return value


def _all_claim_shaped(items: list[Any]) -> bool:
    return all(
        isinstance(item, Mapping) and "id" in item and "text" in item
        for item in items
    )
