"""Verifier stage: stance aggregation and LLM verdict parsing.

The offline stance classifier is a deterministic lexical-overlap rule:
entailment when at least 80% of the claim's content words appear in the
evidence passage, contradiction when the same overlap holds but exactly one
side carries a negation token, neutral otherwise. It exists to make the
whole pipeline runnable and testable without models; it makes no claim of
linguistic adequacy.
"""

from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Mapping, Sequence

from ..errors import EmptyVoteError, VerdictParseError
from ..pipeline import SolverResult, SolverSpec
from ..state import Claim, EvidenceItem, FactState, Label, Stance, UnknownReason, Verdict
from .backends import Generation, TextGenerationBackend, backend_from_params
from .bm25 import tokenize

STOPWORDS = frozenset(
    """a an and are as at be but by for from had has have he her his i in into
    is it its of on or she that the their there these they this to was were
    what which who will with you your""".split()
)

NEGATION_TOKENS = frozenset(
    """not no never none nothing nobody nowhere neither nor cannot cant wont
    isn aren wasn weren don doesn didn hasn haven hadn couldn shouldn
    wouldn""".split()
)

STANCE_TO_LABEL = {
    Stance.ENTAILMENT: Label.TRUE,
    Stance.CONTRADICTION: Label.FALSE,
    Stance.NEUTRAL: Label.UNKNOWN,
}

VERIFY_PROMPT = (
    "Claim:\n{claim}\n\nEvidence:\n{evidence}\n\n"
    "Based on the evidence and your own knowledge, is the claim true, false, "
    "or unknown? Answer with exactly one of: true, false, unknown.\n"
)

_FIRST_TOKEN = re.compile(r"[A-Za-z]+")


def majority_vote(stances: Sequence[Stance]) -> Stance:
    """Most frequent stance; any tie for the maximum resolves to neutral."""
    if not stances:
        raise EmptyVoteError("majority_vote needs at least one stance")
    counts = Counter(stances)
    top = max(counts.values())
    winners = [stance for stance, count in counts.items() if count == top]
    return winners[0] if len(winners) == 1 else Stance.NEUTRAL


def _content_words(text: str) -> set[str]:
    return {
        token
        for token in tokenize(text)
        if token not in STOPWORDS and token not in NEGATION_TOKENS
    }


def _has_negation(text: str) -> bool:
    return any(token in NEGATION_TOKENS for token in tokenize(text))


def lexical_stance(
    evidence_text: str, claim_text: str, overlap_threshold: float = 0.8
) -> Stance:
    claim_words = _content_words(claim_text)
    if not claim_words:
        return Stance.NEUTRAL
    evidence_tokens = set(tokenize(evidence_text))
    overlap = len(claim_words & evidence_tokens) / len(claim_words)
    if overlap < overlap_threshold:
        return Stance.NEUTRAL
    if _has_negation(claim_text) != _has_negation(evidence_text):
        return Stance.CONTRADICTION
    return Stance.ENTAILMENT


StanceFn = Callable[[str, str], Stance]


def verify_nli(
    claim: Claim,
    evidence: Sequence[EvidenceItem],
    stance_fn: StanceFn = lexical_stance,
) -> Verdict:
    """Majority stance over all evidence, mapped to a factuality label.

    No evidence at all yields Unknown(insufficient_evidence). The verdict's
    supporting evidence lists the sources whose stance won the vote.
    """
    if not evidence:
        return Verdict(Label.UNKNOWN, UnknownReason.INSUFFICIENT_EVIDENCE)
    stances = [stance_fn(item.text, claim.text) for item in evidence]
    winner = majority_vote(stances)
    label = STANCE_TO_LABEL[winner]
    supporting = []
    for item, stance in zip(evidence, stances):
        if stance is winner and item.source_id not in supporting:
            supporting.append(item.source_id)
    return Verdict(
        label=label,
        unknown_reason=(
            UnknownReason.INSUFFICIENT_EVIDENCE if label is Label.UNKNOWN else None
        ),
        supporting_evidence=tuple(supporting),
    )


def parse_verdict_token(output: str) -> Label:
    """Strict grammar: the first alphabetic token must be true/false/unknown."""
    match = _FIRST_TOKEN.search(output)
    token = match.group(0).lower() if match else ""
    try:
        return Label(token)
    except ValueError:
        raise VerdictParseError(
            f"verifier output {output[:60]!r} does not start with "
            "true/false/unknown"
        ) from None


def verify_llm(
    claim: Claim,
    evidence: Sequence[EvidenceItem],
    backend: TextGenerationBackend,
    usage_sink: list[Generation] | None = None,
) -> Verdict:
    """One backend call over claim plus evidence, parsed by the strict grammar."""
    evidence_block = "\n".join(
        f"[{index}] {item.text}" for index, item in enumerate(evidence, start=1)
    ) or "(no evidence found)"
    generation = backend.generate(
        VERIFY_PROMPT.format(claim=claim.text, evidence=evidence_block)
    )
    if usage_sink is not None:
        usage_sink.append(generation)
    label = parse_verdict_token(generation.text)
    sources = []
    for item in evidence:
        if item.source_id not in sources:
            sources.append(item.source_id)
    return Verdict(
        label=label,
        unknown_reason=(
            UnknownReason.INSUFFICIENT_EVIDENCE if label is Label.UNKNOWN else None
        ),
        supporting_evidence=tuple(sources),
    )


def _map_verdicts(
    claims: list[Claim],
    fn: Callable[[Claim], Verdict],
    max_workers: int,
) -> dict[str, Verdict]:
    if max_workers <= 1 or len(claims) <= 1:
        return {claim.id: fn(claim) for claim in claims}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(fn, claims))
    return {claim.id: verdict for claim, verdict in zip(claims, results)}


def build_nli_verifier(params: Mapping[str, Any]):
    threshold = float(params.get("overlap_threshold", 0.8))
    max_workers = int(params.get("max_workers", 1))

    def stance(evidence_text: str, claim_text: str) -> Stance:
        return lexical_stance(evidence_text, claim_text, threshold)

    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        if not state.has("claims"):
            return SolverResult.failed(state, "missing 'claims' entry")
        evidence_map = state.get(spec.input_name)
        claims = state.get("claims")
        verdicts = _map_verdicts(
            claims,
            lambda claim: verify_nli(claim, evidence_map.get(claim.id, ()), stance),
            max_workers,
        )
        state.set(spec.output_name, verdicts)
        return SolverResult.ok(state)

    return execute


def build_llm_verifier(params: Mapping[str, Any]):
    backend = backend_from_params(params)
    max_workers = int(params.get("max_workers", 1))

    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        if not state.has("claims"):
            return SolverResult.failed(state, "missing 'claims' entry")
        evidence_map = state.get(spec.input_name)
        claims = state.get("claims")
        usage: list[Generation] = []
        verdicts = _map_verdicts(
            claims,
            lambda claim: verify_llm(
                claim, evidence_map.get(claim.id, ()), backend, usage
            ),
            max_workers,
        )
        for generation in usage:
            state.add_cost(spec.name, generation.cost_usd)
        state.set(spec.output_name, verdicts)
        return SolverResult.ok(state)

    return execute
