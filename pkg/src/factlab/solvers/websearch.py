"""Web-search evidence retrieval with an on-disk record/replay cache.

Every remote lookup is cached under one file per (provider, normalized
query), so repeated runs are deterministic and cost-free, and the whole
test suite replays recorded payloads without network access. Credentials
are only required on a cache miss.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import time
from pathlib import Path
from typing import Callable

import httpx

from .. import envvars
from ..errors import CredentialError, RetrievalError
from ..state import Claim, EvidenceItem

_WHITESPACE = re.compile(r"\s+")
_TRAILING_PUNCT = ".,;:!?…"


def normalize_query(query: str) -> str:
    """Lowercase, collapse whitespace, strip trailing punctuation."""
    collapsed = _WHITESPACE.sub(" ", query.lower()).strip()
    return collapsed.rstrip(_TRAILING_PUNCT).rstrip()


class EvidenceCache:
    """One JSON file of EvidenceItem dicts per normalized query."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, provider: str, normalized_query: str) -> Path:
        digest = hashlib.sha256(normalized_query.encode("utf-8")).hexdigest()[:24]
        return self.directory / f"{provider}__{digest}.json"

    def get(self, provider: str, normalized_query: str) -> list[EvidenceItem] | None:
        path = self.path_for(provider, normalized_query)
        if not path.exists():
            return None
        with path.open("r", encoding="utf-8") as fh:
            items = json.load(fh)
        return [EvidenceItem.from_dict(item) for item in items]

    def put(
        self, provider: str, normalized_query: str, items: list[EvidenceItem]
    ) -> Path:
        path = self.path_for(provider, normalized_query)
        payload = json.dumps(
            [item.to_dict() for item in items],
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
        )
        path.write_text(payload, encoding="utf-8")
        return path


class SerperClient:
    """google.serper.dev search client; key from OFC_SEARCH_API_KEY."""

    name = "serper"
    endpoint = "https://google.serper.dev/search"

    def __init__(
        self,
        api_key: str | None = None,
        timeout: float = 10.0,
        client: httpx.Client | None = None,
    ):
        self._api_key = api_key
        self._client = client or httpx.Client(timeout=timeout)

    def search(self, query: str, top_k: int) -> list[EvidenceItem]:
        key = self._api_key or os.environ.get(envvars.SEARCH_API_KEY)
        if not key:
            raise CredentialError(
                f"no search credential: set {envvars.SEARCH_API_KEY}"
            )
        response = self._client.post(
            self.endpoint,
            headers={"X-API-KEY": key, "Content-Type": "application/json"},
            json={"q": query, "num": top_k},
        )
        response.raise_for_status()
        organic = response.json().get("organic", [])
        items = []
        for rank, hit in enumerate(organic[:top_k], start=1):
            snippet = hit.get("snippet") or hit.get("title") or ""
            if not snippet:
                continue
            items.append(
                EvidenceItem(
                    text=snippet,
                    source_id=str(hit.get("link", f"result-{rank}")),
                    score=1.0 / rank,
                )
            )
        return items


def retrieve_web(
    claim: Claim,
    provider,
    cache: EvidenceCache,
    top_k: int,
    retries: int = 3,
    backoff_seconds: float = 0.5,
    sleep: Callable[[float], None] = time.sleep,
) -> list[EvidenceItem]:
    """Evidence for one claim, replaying the cache before any remote call.

    A miss issues one provider search with up to ``retries`` attempts and
    exponential backoff; the result is recorded so the next identical query
    is free. Provider errors after the final attempt raise
    :class:`RetrievalError` carrying the per-attempt log.
    """
    normalized = normalize_query(claim.text)
    cached = cache.get(provider.name, normalized)
    if cached is not None:
        return cached[:top_k]

    attempts: list[str] = []
    for attempt in range(1, retries + 1):
        try:
            items = provider.search(normalized, top_k)
            cache.put(provider.name, normalized, items)
            return items
        except CredentialError:
            raise
        except (httpx.HTTPError, json.JSONDecodeError, KeyError) as exc:
            attempts.append(f"attempt {attempt}: {exc}")
            if attempt < retries:
                sleep(backoff_seconds * (2 ** (attempt - 1)))
    raise RetrievalError(
        f"search for {normalized!r} failed after {retries} attempts", attempts
    )
