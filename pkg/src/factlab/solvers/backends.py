"""Text-generation backends used by LLM-flavoured solvers and judges.

The deterministic :class:`MockBackend` keys canned outputs by prompt
substring, which keeps every test offline. The OpenAI-compatible adapter is
the production path and reads its credential from the fixed environment
variable.
"""

from __future__ import annotations

import abc
import json
import os
import threading
from dataclasses import dataclass
from typing import Any, Mapping

import httpx

from .. import envvars
from ..errors import BackendError, CredentialError


@dataclass(frozen=True)
class Generation:
    """One backend call: the text plus per-call token/cost accounting."""

    text: str
    tokens_in: int
    tokens_out: int
    cost_usd: float


class TextGenerationBackend(abc.ABC):
    """Prompt-in, text-out interface; implementations must be thread-safe."""

    @abc.abstractmethod
    def generate(self, prompt: str, **params: Any) -> Generation:
        raise NotImplementedError


class MockBackend(TextGenerationBackend):
    """Deterministic backend mapping prompt substrings to canned outputs.

    The first registered needle found in the prompt wins; ``default`` is
    returned when nothing matches, and a missing default raises
    :class:`BackendError` (which a solver surfaces as success=False).
    """

    def __init__(
        self,
        responses: Mapping[str, str] | None = None,
        default: str | None = None,
        cost_per_call: float = 0.0,
    ):
        self.responses = dict(responses or {})
        self.default = default
        self.cost_per_call = cost_per_call
        self._lock = threading.Lock()
        self.calls: list[str] = []

    @classmethod
    def from_json_file(cls, path, cost_per_call: float = 0.0) -> "MockBackend":
        """Load ``{"responses": {...}, "default": ...}`` from a JSON file."""
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(
            responses=data.get("responses", {}),
            default=data.get("default"),
            cost_per_call=float(data.get("cost_per_call", cost_per_call)),
        )

    def generate(self, prompt: str, **params: Any) -> Generation:
        with self._lock:
            self.calls.append(prompt)
        text = None
        for needle, output in self.responses.items():
            if needle in prompt:
                text = output
                break
        if text is None:
            if self.default is None:
                raise BackendError(
                    f"mock backend has no response for prompt {prompt[:80]!r}"
                )
            text = self.default
        return Generation(
            text=text,
            tokens_in=len(prompt.split()),
            tokens_out=len(text.split()),
            cost_usd=self.cost_per_call,
        )


class OpenAIChatBackend(TextGenerationBackend):
    """Minimal chat-completions client for OpenAI-compatible endpoints."""

    def __init__(
        self,
        model: str = "gpt-4o-mini",
        api_key: str | None = None,
        base_url: str = "https://api.openai.com/v1",
        timeout: float = 30.0,
        usd_per_1k_tokens_in: float = 0.00015,
        usd_per_1k_tokens_out: float = 0.0006,
        client: httpx.Client | None = None,
    ):
        self.model = model
        self._api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.price_in = usd_per_1k_tokens_in
        self.price_out = usd_per_1k_tokens_out
        self._client = client or httpx.Client(timeout=timeout)

    def _key(self) -> str:
        key = self._api_key or os.environ.get(envvars.LLM_API_KEY)
        if not key:
            raise CredentialError(
                f"no LLM credential: set {envvars.LLM_API_KEY}"
            )
        return key

    def generate(self, prompt: str, **params: Any) -> Generation:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.get("temperature", 0.0),
        }
        try:
            response = self._client.post(
                f"{self.base_url}/chat/completions",
                headers={"Authorization": f"Bearer {self._key()}"},
                json=payload,
            )
            response.raise_for_status()
            body = response.json()
        except CredentialError:
            raise
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            raise BackendError(f"chat completion failed: {exc}") from exc
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion payload: {exc}") from exc
        usage = body.get("usage", {})
        tokens_in = int(usage.get("prompt_tokens", 0))
        tokens_out = int(usage.get("completion_tokens", 0))
        cost = (
            tokens_in / 1000.0 * self.price_in
            + tokens_out / 1000.0 * self.price_out
        )
        return Generation(text, tokens_in, tokens_out, cost)


def backend_from_params(params: Mapping[str, Any]) -> TextGenerationBackend:
    """Build a backend from the flat scalar params of a solver config.

    ``backend: mock`` with an optional ``responses_path`` (JSON file) and
    ``default_response``; ``backend: openai`` with an optional ``model``.
    """
    kind = str(params.get("backend", "mock"))
    if kind == "mock":
        path = params.get("responses_path")
        cost = float(params.get("cost_per_call", 0.0))
        if path:
            backend = MockBackend.from_json_file(path, cost_per_call=cost)
            if "default_response" in params and backend.default is None:
                backend.default = str(params["default_response"])
            return backend
        return MockBackend(
            default=params.get("default_response"), cost_per_call=cost
        )
    if kind == "openai":
        kwargs: dict[str, Any] = {}
        if "model" in params:
            kwargs["model"] = str(params["model"])
        if "base_url" in params:
            kwargs["base_url"] = str(params["base_url"])
        return OpenAIChatBackend(**kwargs)
    raise BackendError(f"unknown backend kind {kind!r}")
