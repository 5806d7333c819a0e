"""Retriever stage: evidence gathering per claim, offline or via web search.

Claims within one run may be retrieved concurrently; results are written
back keyed by claim id so the output is independent of completion order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Mapping

from ..errors import ConfigParseError
from ..pipeline import SolverResult, SolverSpec
from ..state import Claim, EvidenceItem, FactState
from .bm25 import index_for_corpus
from .websearch import EvidenceCache, SerperClient, retrieve_web


def _map_claims(
    claims: list[Claim],
    fn: Callable[[Claim], list[EvidenceItem]],
    max_workers: int,
) -> dict[str, list[EvidenceItem]]:
    if max_workers <= 1 or len(claims) <= 1:
        return {claim.id: fn(claim) for claim in claims}
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(fn, claims))
    return {claim.id: items for claim, items in zip(claims, results)}


def build_bm25_retriever(params: Mapping[str, Any]):
    corpus_path = params.get("corpus_path")
    if not corpus_path:
        raise ConfigParseError("bm25_retriever requires a corpus_path param")
    top_k = int(params.get("top_k", 5))
    max_workers = int(params.get("max_workers", 1))
    index = index_for_corpus(
        corpus_path,
        k1=float(params.get("k1", 1.5)),
        b=float(params.get("b", 0.75)),
    )

    def retrieve(claim: Claim) -> list[EvidenceItem]:
        return [
            EvidenceItem(text=doc.text, source_id=doc.id, score=score)
            for doc, score in index.search(claim.text, top_k)
        ]

    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        claims = state.get(spec.input_name)
        state.set(spec.output_name, _map_claims(claims, retrieve, max_workers))
        return SolverResult.ok(state)

    return execute


def build_web_retriever(params: Mapping[str, Any]):
    cache_dir = params.get("cache_dir")
    if not cache_dir:
        raise ConfigParseError("web_retriever requires a cache_dir param")
    provider_name = str(params.get("provider", "serper"))
    if provider_name != "serper":
        raise ConfigParseError(f"unknown search provider {provider_name!r}")
    top_k = int(params.get("top_k", 5))
    max_workers = int(params.get("max_workers", 1))
    cache = EvidenceCache(cache_dir)
    provider = SerperClient()

    def retrieve(claim: Claim) -> list[EvidenceItem]:
        return retrieve_web(claim, provider, cache, top_k)

    def execute(state: FactState, spec: SolverSpec) -> SolverResult:
        if not state.has(spec.input_name):
            return SolverResult.failed(
                state, f"missing input entry {spec.input_name!r}"
            )
        claims = state.get(spec.input_name)
        state.set(spec.output_name, _map_claims(claims, retrieve, max_workers))
        return SolverResult.ok(state)

    return execute
