"""Uniform access to clone-detection backends.

Three modes: ``live`` (network only), ``live_with_cache`` (network, with a
persistent prompt->response cache), and ``replay`` (cache only, zero
network). Cache keys are SHA-256 digests over model name, temperature, and
prompt bytes, so fixtures recorded for one model can never answer for
another. Retries apply to transport failures only; a parsed response is
never re-requested, since at temperature 0 a retried "bad answer" would be
a protocol violation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Union

from .promptkit import RenderedPrompt

log = logging.getLogger(__name__)


class Mode(str, Enum):
    LIVE = "live"
    REPLAY = "replay"
    LIVE_WITH_CACHE = "live_with_cache"


class GatewayError(Exception):
    pass


class RateLimitedError(GatewayError):
    pass


class GatewayTimeoutError(GatewayError):
    pass


class AuthFailureError(GatewayError):
    pass


class ReplayMissError(GatewayError):
    def __init__(self, digest: str) -> None:
        super().__init__(f"replay cache has no response for digest {digest}")
        self.digest = digest


@dataclass(frozen=True)
class BackendConfig:
    provider_id: str
    model_name: str
    temperature: float = 0.0
    max_retries: int = 3
    requests_per_minute: int | None = None
    cache_path: str | None = None
    mode: Mode = Mode.REPLAY

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.mode is Mode.REPLAY and not self.cache_path:
            raise ValueError("replay mode requires cache_path")
        if self.mode is Mode.LIVE_WITH_CACHE and not self.cache_path:
            raise ValueError("live_with_cache mode requires cache_path")

    @property
    def api_key_env(self) -> str:
        normalized = re.sub(r"[^A-Za-z0-9]", "_", self.provider_id).upper()
        return f"CPL_API_KEY_{normalized}"


@dataclass(frozen=True)
class Exchange:
    prompt_digest: str
    prompt_text: str
    response_text: str
    latency_ms: float = 0.0
    timestamp: float = 0.0


def prompt_digest(model_name: str, temperature: float, prompt_text: str) -> str:
    """Stable cache key: SHA-256 over ``model \\n temperature \\n prompt`` bytes."""
    payload = f"{model_name}\n{temperature:g}\n{prompt_text}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def make_exchange(
    model_name: str, temperature: float, prompt_text: str, response_text: str,
    latency_ms: float = 0.0, timestamp: float = 0.0,
) -> Exchange:
    """Build a cache record for a prompt/response pair (fixtures use this too)."""
    return Exchange(
        prompt_digest=prompt_digest(model_name, temperature, prompt_text),
        prompt_text=prompt_text,
        response_text=response_text,
        latency_ms=latency_ms,
        timestamp=timestamp,
    )


class ResponseCache:
    """Line-delimited exchange store; concurrent reads, serialized writes."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._by_digest: dict[str, Exchange] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                exchange = Exchange(
                    prompt_digest=obj["prompt_digest"],
                    prompt_text=obj.get("prompt_text", ""),
                    response_text=obj["response_text"],
                    latency_ms=float(obj.get("latency_ms", 0.0)),
                    timestamp=float(obj.get("timestamp", 0.0)),
                )
                self._by_digest[exchange.prompt_digest] = exchange

    def get(self, digest: str) -> Exchange | None:
        return self._by_digest.get(digest)

    def put(self, exchange: Exchange) -> None:
        with self._lock:
            if exchange.prompt_digest in self._by_digest:
                return
            self._by_digest[exchange.prompt_digest] = exchange
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(exchange.__dict__, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._by_digest)

    def sha256(self) -> str:
        """Content hash of the backing file (empty-file hash when absent)."""
        data = self.path.read_bytes() if self.path.exists() else b""
        return hashlib.sha256(data).hexdigest()


def write_exchanges(exchanges: list[Exchange], path: str | Path) -> None:
    """Write a fixture cache file in one go."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for exchange in exchanges:
            fh.write(json.dumps(exchange.__dict__, ensure_ascii=False) + "\n")


class RateLimiter:
    """Spaces dispatches at least 60/rpm seconds apart; thread-safe.

    The clock and sleep are injectable so schedule arithmetic is testable
    without wall-clock waits.
    """

    def __init__(
        self,
        requests_per_minute: int | None,
        time_fn: Callable[[], float] = time.monotonic,
        sleep_fn: Callable[[float], None] = time.sleep,
    ) -> None:
        self.interval = 60.0 / requests_per_minute if requests_per_minute else 0.0
        self._time = time_fn
        self._sleep = sleep_fn
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def acquire(self) -> None:
        if self.interval <= 0:
            return
        with self._lock:
            now = self._time()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self.interval
            wait = slot - now
        if wait > 0:
            self._sleep(wait)


# A provider adapter sends one prompt string and returns one response string.
ProviderAdapter = Callable[[BackendConfig, str], str]

_PROVIDERS: dict[str, ProviderAdapter] = {}


def register_provider(provider_id: str, adapter: ProviderAdapter) -> None:
    _PROVIDERS[provider_id] = adapter


def get_provider(provider_id: str) -> ProviderAdapter:
    try:
        return _PROVIDERS[provider_id]
    except KeyError:
        raise GatewayError(
            f"no adapter registered for provider {provider_id!r}; "
            f"known providers: {sorted(_PROVIDERS)}"
        ) from None


def register_openai_compatible(provider_id: str, base_url: str, timeout_s: float = 60.0) -> None:
    """Register a provider speaking the de-facto completions HTTP protocol."""
    import httpx

    def adapter(cfg: BackendConfig, prompt_text: str) -> str:
        key = os.environ.get(cfg.api_key_env, "")
        try:
            response = httpx.post(
                base_url.rstrip("/") + "/completions",
                headers={"Authorization": f"Bearer {key}"},
                json={
                    "model": cfg.model_name,
                    "prompt": prompt_text,
                    "temperature": cfg.temperature,
                },
                timeout=timeout_s,
            )
        except httpx.TimeoutException as exc:
            raise GatewayTimeoutError(str(exc)) from exc
        if response.status_code == 429:
            raise RateLimitedError("provider returned 429")
        if response.status_code in (401, 403):
            raise AuthFailureError(f"provider returned {response.status_code}")
        response.raise_for_status()
        return response.json()["choices"][0]["text"]

    register_provider(provider_id, adapter)


BatchOutcome = Union[str, GatewayError]


class Gateway:
    """One backend's completion channel: cache, rate limiter, retry loop."""

    def __init__(
        self,
        cfg: BackendConfig,
        time_fn: Callable[[], float] = time.monotonic,
        sleep_fn: Callable[[float], None] = time.sleep,
    ) -> None:
        self.cfg = cfg
        self.cache = ResponseCache(cfg.cache_path) if cfg.cache_path else None
        self.limiter = RateLimiter(cfg.requests_per_minute, time_fn, sleep_fn)
        self._sleep = sleep_fn
        self._time = time_fn

    def complete(self, prompt: RenderedPrompt) -> str:
        text = prompt.text
        digest = prompt_digest(self.cfg.model_name, self.cfg.temperature, text)

        if self.cfg.mode is Mode.REPLAY:
            cached = self.cache.get(digest)
            if cached is None:
                raise ReplayMissError(digest)
            return cached.response_text

        if self.cfg.mode is Mode.LIVE_WITH_CACHE:
            cached = self.cache.get(digest)
            if cached is not None:
                return cached.response_text

        if not os.environ.get(self.cfg.api_key_env):
            raise AuthFailureError(
                f"live mode requires credentials in ${self.cfg.api_key_env}"
            )

        response = self._call_with_retries(text)
        if self.cfg.mode is Mode.LIVE_WITH_CACHE:
            self.cache.put(
                Exchange(
                    prompt_digest=digest,
                    prompt_text=text,
                    response_text=response,
                    latency_ms=0.0,
                    timestamp=time.time(),
                )
            )
        return response

    def _call_with_retries(self, prompt_text: str) -> str:
        adapter = get_provider(self.cfg.provider_id)
        delay = 1.0
        for attempt in range(self.cfg.max_retries + 1):
            self.limiter.acquire()
            try:
                return adapter(self.cfg, prompt_text)
            except (RateLimitedError, GatewayTimeoutError):
                if attempt == self.cfg.max_retries:
                    raise
                log.warning(
                    "transport failure from %s (attempt %d/%d); backing off %.1fs",
                    self.cfg.provider_id, attempt + 1, self.cfg.max_retries, delay,
                )
                self._sleep(delay)
                delay *= 2
        raise AssertionError("unreachable")  # loop always returns or raises

    def complete_batch(self, prompts: list[RenderedPrompt]) -> list[BatchOutcome]:
        """Complete many prompts; result slots stay in input order.

        A failing item carries its error in its slot instead of aborting
        the batch.
        """
        if not prompts:
            raise ValueError("complete_batch requires at least one prompt")

        if self.cfg.mode is Mode.REPLAY:
            return [self._catching(p) for p in prompts]

        results: list[BatchOutcome] = [GatewayError("not dispatched")] * len(prompts)
        max_workers = min(8, len(prompts))
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {pool.submit(self._catching, p): i for i, p in enumerate(prompts)}
            for future, index in futures.items():
                results[index] = future.result()
        return results

    def _catching(self, prompt: RenderedPrompt) -> BatchOutcome:
        try:
            return self.complete(prompt)
        except GatewayError as exc:
            return exc


def complete(prompt: RenderedPrompt, cfg: BackendConfig) -> str:
    return Gateway(cfg).complete(prompt)


def complete_batch(prompts: list[RenderedPrompt], cfg: BackendConfig) -> list[BatchOutcome]:
    return Gateway(cfg).complete_batch(prompts)
