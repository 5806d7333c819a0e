"""Response-level fact-checking: run a pipeline and aggregate the verdicts.

Credibility is the fraction of checkable (non-Unknown) claims judged true.
When every verdict is Unknown the fraction is undefined and omitted from
the report. The document-level verdict is strict: a single false claim
makes the whole response false.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .pipeline import (
    PipelineConfig,
    SolverRegistry,
    Stage,
    load_pipeline_config_file,
    run_pipeline,
)
from .state import Claim, FactState, Label, Verdict


@dataclass(frozen=True)
class ClaimReport:
    claim: Claim
    verdict: Verdict
    evidence_count: int

    def to_dict(self) -> dict:
        return {
            "claim": self.claim.to_dict(),
            "verdict": self.verdict.to_dict(),
            "evidence_count": self.evidence_count,
        }


@dataclass
class ResponseReport:
    document: str
    claims: list[ClaimReport]
    credibility: float | None
    overall: Label
    ledger_totals: dict[str, float]

    def to_dict(self) -> dict:
        out = {
            "document": self.document,
            "claims": [claim.to_dict() for claim in self.claims],
            "overall": self.overall.value,
            "ledger_totals": self.ledger_totals,
        }
        if self.credibility is not None:
            out["credibility"] = self.credibility
        return out

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(
            self.to_dict(), sort_keys=True, indent=indent, ensure_ascii=False
        )


def aggregate_verdicts(labels: Iterable[Label]) -> tuple[float | None, Label]:
    """(credibility, overall) as a pure function of the verdict multiset."""
    labels = list(labels)
    n_true = sum(1 for label in labels if label is Label.TRUE)
    n_false = sum(1 for label in labels if label is Label.FALSE)
    checkable = n_true + n_false
    credibility = (n_true / checkable) if checkable else None
    if n_false:
        overall = Label.FALSE
    elif n_true:
        overall = Label.TRUE
    else:
        overall = Label.UNKNOWN
    return credibility, overall


def build_report(
    document: str, final: FactState, config: PipelineConfig
) -> ResponseReport:
    """Assemble the response report from a finished pipeline state."""
    claims_entry = "claims"
    for spec in config.solvers:
        if spec.stage is Stage.CLAIM_PROCESSOR:
            claims_entry = spec.output_name
            break
    claims: list[Claim] = (
        final.get(claims_entry) if final.has(claims_entry) else final.claims
    )
    verdict_map: dict[str, Verdict] = final.get(config.solvers[-1].output_name)
    evidence_map = final.evidence

    claim_reports = [
        ClaimReport(
            claim=claim,
            verdict=verdict_map[claim.id],
            evidence_count=len(evidence_map.get(claim.id, ())),
        )
        for claim in claims
        if claim.id in verdict_map
    ]
    credibility, overall = aggregate_verdicts(
        claim_report.verdict.label for claim_report in claim_reports
    )
    return ResponseReport(
        document=document,
        claims=claim_reports,
        credibility=credibility,
        overall=overall,
        ledger_totals={
            "time_seconds": final.total_time_seconds(),
            "cost_usd": final.total_cost_usd(),
        },
    )


def evaluate_response(
    document: str,
    config: PipelineConfig,
    registry: SolverRegistry | None = None,
) -> ResponseReport:
    """Fact-check one document with the configured pipeline."""
    state = FactState({"document": document})
    final = run_pipeline(state, config, registry)
    return build_report(document, final, config)


class ResponseEvaluator:
    """Reusable wrapper binding a pipeline config to repeated evaluations."""

    def __init__(
        self,
        config: PipelineConfig | str,
        registry: SolverRegistry | None = None,
    ):
        if isinstance(config, PipelineConfig):
            self.config = config
        else:
            self.config = load_pipeline_config_file(config, registry)
        self.registry = registry

    def evaluate(self, response: str) -> ResponseReport:
        return evaluate_response(response, self.config, self.registry)
