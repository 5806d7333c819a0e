"""Reference solvers for the three pipeline stages.

Importing this package registers the built-in solvers on the default
registry; :func:`register_builtin_solvers` does the same for a private
registry instance.
"""

from __future__ import annotations

from ..pipeline import DEFAULT_REGISTRY, SolverDescriptor, SolverRegistry, Stage
from .backends import (
    Generation,
    MockBackend,
    OpenAIChatBackend,
    TextGenerationBackend,
    backend_from_params,
)
from .bm25 import Bm25Index, CorpusDoc, index_for_corpus, load_corpus, tokenize
from .claims import build_llm_decomposer, build_rule_splitter, decompose_claims_llm, split_claims_rule
from .retrieval import build_bm25_retriever, build_web_retriever
from .segmenter import sentence_spans
from .verification import (
    build_llm_verifier,
    build_nli_verifier,
    lexical_stance,
    majority_vote,
    parse_verdict_token,
    verify_llm,
    verify_nli,
)
from .websearch import EvidenceCache, SerperClient, normalize_query, retrieve_web

BUILTIN_DESCRIPTORS = (
    SolverDescriptor(
        name="rule_splitter",
        stage=Stage.CLAIM_PROCESSOR,
        input_name="document",
        output_name="claims",
        factory=build_rule_splitter,
    ),
    SolverDescriptor(
        name="llm_decomposer",
        stage=Stage.CLAIM_PROCESSOR,
        input_name="document",
        output_name="claims",
        factory=build_llm_decomposer,
    ),
    SolverDescriptor(
        name="bm25_retriever",
        stage=Stage.RETRIEVER,
        input_name="claims",
        output_name="evidence",
        factory=build_bm25_retriever,
    ),
    SolverDescriptor(
        name="web_retriever",
        stage=Stage.RETRIEVER,
        input_name="claims",
        output_name="evidence",
        factory=build_web_retriever,
    ),
    SolverDescriptor(
        name="nli_verifier",
        stage=Stage.VERIFIER,
        input_name="evidence",
        output_name="verdicts",
        factory=build_nli_verifier,
    ),
    SolverDescriptor(
        name="llm_verifier",
        stage=Stage.VERIFIER,
        input_name="evidence",
        output_name="verdicts",
        factory=build_llm_verifier,
    ),
)


def register_builtin_solvers(registry: SolverRegistry | None = None) -> SolverRegistry:
    registry = registry if registry is not None else DEFAULT_REGISTRY
    for descriptor in BUILTIN_DESCRIPTORS:
        if descriptor.name not in registry:
            registry.register(descriptor)
    return registry


register_builtin_solvers()

__all__ = [
    "BUILTIN_DESCRIPTORS",
    "Bm25Index",
    "CorpusDoc",
    "EvidenceCache",
    "Generation",
    "MockBackend",
    "OpenAIChatBackend",
    "SerperClient",
    "TextGenerationBackend",
    "backend_from_params",
    "build_bm25_retriever",
    "build_llm_decomposer",
    "build_llm_verifier",
    "build_nli_verifier",
    "build_rule_splitter",
    "build_web_retriever",
    "decompose_claims_llm",
    "index_for_corpus",
    "lexical_stance",
    "load_corpus",
    "majority_vote",
    "normalize_query",
    "parse_verdict_token",
    "register_builtin_solvers",
    "retrieve_web",
    "sentence_spans",
    "split_claims_rule",
    "tokenize",
    "verify_llm",
    "verify_nli",
]
