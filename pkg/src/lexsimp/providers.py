"""Uniform chat-completion access: real HTTP endpoints and scripted doubles.

A provider is described by a ProviderConfig (usually loaded from JSON).
``scripted`` providers replay canned texts keyed by prompt fingerprint, so
pipeline tests are fully deterministic; ``http_chat`` providers speak the
common chat-completion JSON shape with configurable field paths, bearer auth
from an environment variable, and retry with exponential backoff on
transport/5xx failures.

A scripted text equal to ``FAIL_SENTINEL`` raises TransportError instead of
being returned, which lets tests inject per-voter faults.
"""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import httpx

from .errors import ConfigError, ScriptMissError, TransportError
from .promptkit import RenderedPrompt

WILDCARD_KEY = "*"
FAIL_SENTINEL = "##TRANSPORT_ERROR##"


@dataclass(frozen=True)
class Decoding:
    temperature: float = 0.7
    max_tokens: int = 512
    seed: int | None = None


@dataclass(frozen=True)
class ChatRequest:
    prompt: RenderedPrompt
    decoding: Decoding = Decoding()


@dataclass(frozen=True)
class ChatResponse:
    text: str
    provider_id: str
    latency: float


@dataclass
class ProviderConfig:
    """Connection/config state for one provider; mutable runtime fields live here too."""

    kind: str = "scripted"
    model: str = ""
    endpoint: str = ""
    auth_env: str = ""
    timeout: float = 30.0
    retries: int = 2
    backoff_base: float = 0.5
    rate_limit_per_minute: float | None = None
    parallelism: int = 4
    request_fields: Mapping[str, str] = field(
        default_factory=lambda: {"model": "model", "messages": "messages"}
    )
    response_text_path: str = "choices.0.message.content"
    script: dict[str, list[str]] | None = None
    calls: int = field(default=0, init=True)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _next_allowed: float = field(default=0.0, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "scripted":
            if self.script is None:
                raise ConfigError("scripted provider requires a script")
        elif self.kind == "http_chat":
            if not self.endpoint or not self.model:
                raise ConfigError("http_chat provider requires endpoint and model")
        else:
            raise ConfigError(f"unknown provider kind {self.kind!r}")

    @property
    def provider_id(self) -> str:
        return self.model or self.kind


def load_provider(path: str) -> ProviderConfig:
    """Load a ProviderConfig from a JSON file."""
    with open(path, encoding="utf-8") as fp:
        data = json.load(fp)
    known = {
        "kind", "model", "endpoint", "auth_env", "timeout", "retries",
        "backoff_base", "rate_limit_per_minute", "parallelism",
        "request_fields", "response_text_path", "script",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown provider config keys: {sorted(unknown)}")
    if "script" in data and data["script"] is not None:
        data["script"] = {key: list(queue) for key, queue in data["script"].items()}
    return ProviderConfig(**data)


def _extract_path(payload: Any, path: str) -> Any:
    current = payload
    for part in path.split("."):
        if isinstance(current, list):
            current = current[int(part)]
        elif isinstance(current, dict):
            current = current[part]
        else:
            raise KeyError(part)
    return current


def _throttle(config: ProviderConfig) -> None:
    if config.rate_limit_per_minute is None:
        return
    interval = 60.0 / config.rate_limit_per_minute
    with config._lock:
        now = time.monotonic()
        wait = config._next_allowed - now
        config._next_allowed = max(now, config._next_allowed) + interval
    if wait > 0:
        time.sleep(wait)


def _complete_scripted(config: ProviderConfig, request: ChatRequest) -> ChatResponse:
    fingerprint = request.prompt.fingerprint
    with config._lock:
        assert config.script is not None
        queue = config.script.get(fingerprint)
        if not queue:
            queue = config.script.get(WILDCARD_KEY)
        if not queue:
            raise ScriptMissError(f"no scripted response for fingerprint {fingerprint!r}")
        text = queue.pop(0)
    if text == FAIL_SENTINEL:
        raise TransportError(f"scripted transport failure for {fingerprint!r}")
    return ChatResponse(text=text, provider_id=config.provider_id, latency=0.0)


def _build_messages(prompt: RenderedPrompt) -> list[dict[str, str]]:
    messages = []
    if prompt.system_text:
        messages.append({"role": "system", "content": prompt.system_text})
    messages.append({"role": "user", "content": prompt.user_text})
    return messages


def _complete_http(config: ProviderConfig, request: ChatRequest) -> ChatResponse:
    headers = {"Content-Type": "application/json"}
    if config.auth_env:
        token = os.environ.get(config.auth_env)
        if not token:
            raise ConfigError(f"auth env var {config.auth_env!r} is not set")
        headers["Authorization"] = f"Bearer {token}"

    payload: dict[str, Any] = {
        config.request_fields.get("model", "model"): config.model,
        config.request_fields.get("messages", "messages"): _build_messages(request.prompt),
        "temperature": request.decoding.temperature,
        "max_tokens": request.decoding.max_tokens,
    }
    if request.decoding.seed is not None:
        payload["seed"] = request.decoding.seed

    started = time.monotonic()
    last_error: Exception | None = None
    for attempt in range(config.retries + 1):
        if attempt:
            time.sleep(config.backoff_base * (2 ** (attempt - 1)))
        _throttle(config)
        try:
            response = httpx.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout
            )
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = TransportError(f"server error {response.status_code}")
            continue
        if response.status_code >= 400:
            raise TransportError(f"request rejected with status {response.status_code}")
        try:
            text = str(_extract_path(response.json(), config.response_text_path))
        except (KeyError, IndexError, ValueError, json.JSONDecodeError) as exc:
            raise TransportError(
                f"response missing text at {config.response_text_path!r}: {exc!r}"
            ) from exc
        return ChatResponse(
            text=text, provider_id=config.provider_id, latency=time.monotonic() - started
        )
    raise TransportError(f"retries exhausted calling {config.endpoint}: {last_error!r}")


def complete(config: ProviderConfig, request: ChatRequest) -> ChatResponse:
    """One chat completion. Thread-safe; scripted pops are serialized."""
    with config._lock:
        config.calls += 1
    if config.kind == "scripted":
        return _complete_scripted(config, request)
    return _complete_http(config, request)


def complete_many(
    config: ProviderConfig, requests: Sequence[ChatRequest]
) -> list[ChatResponse | Exception]:
    """Run requests (possibly concurrently); slot i holds response i or its error."""
    if not requests:
        return []

    def one(request: ChatRequest) -> ChatResponse | Exception:
        try:
            return complete(config, request)
        except Exception as exc:  # noqa: BLE001  (per-slot error surface)
            return exc

    workers = max(1, min(config.parallelism, len(requests)))
    if workers == 1:
        return [one(request) for request in requests]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, requests))
