"""Claim-processor stage: rule-based splitting and LLM decomposition."""

from __future__ import annotations

import re
from typing import Any, Mapping

from ..errors import DecompositionParseError
from ..pipeline import SolverResult, SolverSpec
from ..state import Claim, FactState
from .backends import TextGenerationBackend, backend_from_params
from .segmenter import sentence_spans

DECOMPOSE_DOCUMENT_PROMPT = (
    "List every independent factual claim made by the document below, one "
    "claim per line, with no numbering or commentary.\n\nDocument:\n{document}\n"
)

DECOMPOSE_SENTENCE_PROMPT = (
    "List every independent factual claim made by the sentence below, one "
    "claim per line, with no numbering or commentary.\n\nSentence:\n{sentence}\n"
)

_BULLET = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+")


def split_claims_rule(document: str) -> list[Claim]:
    """Split a document into one claim per sentence with exact spans."""
    claims = []
    for index, (start, end) in enumerate(sentence_spans(document)):
        claims.append(
            Claim(
                id=f"c{index}",
                text=document[start:end],
                source_span=(start, end),
            )
        )
    return claims


def _parse_claim_lines(output: str) -> list[str]:
    lines = []
    for line in output.splitlines():
        line = _BULLET.sub("", line).strip()
        if line:
            lines.append(line)
    return lines


def decompose_claims_llm(
    document: str,
    backend: TextGenerationBackend,
    mode: str = "document",
    usage_sink: list | None = None,
) -> list[Claim]:
    """Decompose a document into atomic claims via a generation backend.

    ``mode="document"`` sends one prompt for the whole document;
    ``mode="sentence"`` prompts once per rule-segmented sentence and keeps
    the sentence as each claim's context. Claims carry no source span since
    the backend may rephrase.
    """
    if mode not in ("document", "sentence"):
        raise DecompositionParseError(f"unknown decomposition mode {mode!r}")

    texts: list[tuple[str, str | None]] = []
    if mode == "document":
        generation = backend.generate(
            DECOMPOSE_DOCUMENT_PROMPT.format(document=document)
        )
        if usage_sink is not None:
            usage_sink.append(generation)
        texts = [(line, None) for line in _parse_claim_lines(generation.text)]
    else:
        for start, end in sentence_spans(document):
            sentence = document[start:end]
            generation = backend.generate(
                DECOMPOSE_SENTENCE_PROMPT.format(sentence=sentence)
            )
            if usage_sink is not None:
                usage_sink.append(generation)
            texts.extend(
                (line, sentence) for line in _parse_claim_lines(generation.text)
            )

    if not texts:
        raise DecompositionParseError("backend returned no claim lines")
    return [
        Claim(id=f"c{index}", text=text, context=context)
        for index, (text, context) in enumerate(texts)
    ]


def build_rule_splitter(params: Mapping[str, Any]):
    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        document = state.get(spec.input_name)
        state.set(spec.output_name, split_claims_rule(document))
        return SolverResult.ok(state)

    return execute


def build_llm_decomposer(params: Mapping[str, Any]):
    backend = backend_from_params(params)
    mode = str(params.get("mode", "document"))

    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        usage: list = []
        claims = decompose_claims_llm(
            state.get(spec.input_name), backend, mode=mode, usage_sink=usage
        )
        for generation in usage:
            state.add_cost(spec.name, generation.cost_usd)
        state.set(spec.output_name, claims)
        return SolverResult.ok(state)

    return execute
