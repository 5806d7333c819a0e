from __future__ import annotations

import json
import socket

import pytest

from factlab.solvers.websearch import EvidenceCache
from factlab.state import EvidenceItem

FIXTURE_DOCUMENT = (
    "The Eiffel Tower is located in Paris. "
    "The Louvre is the largest museum in Spain."
)

FIXTURE_CLAIM_SUPPORTED = "The Eiffel Tower is located in Paris."
FIXTURE_CLAIM_REFUTED = "The Louvre is the largest museum in Spain."

CORPUS_DOCS = [
    {
        "id": "eiffel",
        "title": "Eiffel Tower",
        "text": "The Eiffel Tower is located in Paris, France. It was completed in 1889.",
    },
    {
        "id": "louvre",
        "title": "Louvre",
        "text": "The Louvre is not the largest museum in Spain; it is the largest museum in France.",
    },
    {
        "id": "danube",
        "title": "Danube",
        "text": "The Danube flows through ten countries on its way to the Black Sea.",
    },
    {
        "id": "honey",
        "title": "Honey",
        "text": "Honey never spoils when it is stored sealed in a dry place.",
    },
]


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Fail loudly if anything in the suite opens an outbound connection."""
    real_connect = socket.socket.connect

    def guarded(self, address, *args, **kwargs):
        if isinstance(address, tuple):
            host = address[0]
            if host not in ("127.0.0.1", "::1", "localhost"):
                raise RuntimeError(f"network access blocked in tests: {address!r}")
        return real_connect(self, address, *args, **kwargs)

    monkeypatch.setattr(socket.socket, "connect", guarded)


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("fixtures")


@pytest.fixture(scope="session")
def corpus_path(fixture_dir):
    path = fixture_dir / "corpus.jsonl"
    path.write_text(
        "\n".join(json.dumps(doc) for doc in CORPUS_DOCS) + "\n", encoding="utf-8"
    )
    return path


@pytest.fixture(scope="session")
def decomposer_responses_path(fixture_dir):
    path = fixture_dir / "decomposer_responses.json"
    canned = {
        "responses": {
            "The Eiffel Tower is located in Paris. The Louvre": (
                FIXTURE_CLAIM_SUPPORTED + "\n" + FIXTURE_CLAIM_REFUTED
            ),
        }
    }
    path.write_text(json.dumps(canned, indent=2), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def verifier_responses_path(fixture_dir):
    path = fixture_dir / "verifier_responses.json"
    canned = {
        "responses": {
            "Eiffel Tower is located in Paris": "true",
            "Louvre is the largest museum in Spain": "false",
        }
    }
    path.write_text(json.dumps(canned, indent=2), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def web_cache_dir(fixture_dir):
    """Pre-recorded search payloads for the fixture claims."""
    cache_dir = fixture_dir / "webcache"
    cache = EvidenceCache(cache_dir)
    cache.put(
        "serper",
        "the eiffel tower is located in paris",
        [
            EvidenceItem(
                text=CORPUS_DOCS[0]["text"],
                source_id="https://example.org/eiffel",
                score=1.0,
            )
        ],
    )
    cache.put(
        "serper",
        "the louvre is the largest museum in spain",
        [
            EvidenceItem(
                text=CORPUS_DOCS[1]["text"],
                source_id="https://example.org/louvre",
                score=1.0,
            )
        ],
    )
    return cache_dir


def make_combo_config(
    claim_processor: str,
    retriever: str,
    verifier: str,
    corpus_path,
    web_cache_dir,
    decomposer_responses_path,
    verifier_responses_path,
    top_k: int = 1,
) -> str:
    """YAML for one 2x2x2 combination of the built-in solvers."""
    params = {
        "rule_splitter": {},
        "llm_decomposer": {
            "backend": "mock",
            "responses_path": str(decomposer_responses_path),
            "mode": "document",
        },
        "bm25_retriever": {"corpus_path": str(corpus_path), "top_k": top_k},
        "web_retriever": {"cache_dir": str(web_cache_dir), "top_k": top_k},
        "nli_verifier": {},
        "llm_verifier": {
            "backend": "mock",
            "responses_path": str(verifier_responses_path),
        },
    }
    lines = ["solvers:"]
    for name, stage, input_name, output_name in (
        (claim_processor, "claim_processor", "document", "claims"),
        (retriever, "retriever", "claims", "evidence"),
        (verifier, "verifier", "evidence", "verdicts"),
    ):
        lines.append(f"  - name: {name}")
        lines.append(f"    stage: {stage}")
        lines.append(f"    input_name: {input_name}")
        lines.append(f"    output_name: {output_name}")
        solver_params = params[name]
        if solver_params:
            rendered = ", ".join(
                f"{key}: {json.dumps(value)}" for key, value in solver_params.items()
            )
            lines.append(f"    params: {{ {rendered} }}")
    lines.append("start_index: 0")
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def offline_config_yaml(
    corpus_path, web_cache_dir, decomposer_responses_path, verifier_responses_path
):
    return make_combo_config(
        "rule_splitter",
        "bm25_retriever",
        "nli_verifier",
        corpus_path,
        web_cache_dir,
        decomposer_responses_path,
        verifier_responses_path,
    )


@pytest.fixture(scope="session")
def offline_config_path(fixture_dir, offline_config_yaml):
    path = fixture_dir / "offline.yaml"
    path.write_text(offline_config_yaml, encoding="utf-8")
    return path
