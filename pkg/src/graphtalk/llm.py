"""Provider-agnostic chat-model access with record/replay transcripts.

Prompt templates are shipped as data files and rendered by verbatim
placeholder substitution. A transcript freezes prompt->response exchanges
so every model-dependent code path can run deterministically offline.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Protocol, Union

import httpx

from .errors import (
    EmptyAfterCleaning,
    MissingSlot,
    ProviderError,
    ReplayMiss,
    TranscriptError,
)

TEMPLATE_KINDS = ("generation", "explanation", "amendment", "hyena_generation")

_PLACEHOLDERS = {
    "generation": {"schema", "question"},
    "explanation": {"query"},
    "amendment": {"question", "current_query", "schema", "amendment"},
    "hyena_generation": {"schema", "question"},
}


@dataclass(frozen=True)
class PromptTemplate:
    kind: str
    template_text: str

    def placeholders(self) -> set:
        return set(re.findall(r"\{(\w+)\}", self.template_text))


def load_template(kind: str) -> PromptTemplate:
    if kind not in TEMPLATE_KINDS:
        raise ValueError(f"unknown template kind {kind!r}")
    text = resources.files("graphtalk.data.templates").joinpath(f"{kind}.txt").read_text("utf-8")
    template = PromptTemplate(kind, text)
    assert template.placeholders() == _PLACEHOLDERS[kind]
    return template


def render_prompt(template: PromptTemplate, slots: Dict[str, str]) -> str:
    """Verbatim substitution of every placeholder; nothing else changes."""
    text = template.template_text
    required = template.placeholders()
    missing = required - set(slots)
    if missing:
        raise MissingSlot(f"missing slots for {template.kind}: {', '.join(sorted(missing))}")
    for name in required:
        text = text.replace("{" + name + "}", str(slots[name]))
    return text


# --- output post-processing -----------------------------------------------------

_THINK_RE = re.compile(r"<think(?:ing)?>.*?</think(?:ing)?>", re.S | re.I)
_FENCE_RE = re.compile(r"```[a-zA-Z]*\n?(.*?)```", re.S)
_QUERY_START_RE = re.compile(r"\b(?:OPTIONAL\s+MATCH|MATCH|RETURN|WITH)\b")


def clean_query_output(raw: str) -> str:
    """Strip markdown fences, reasoning tags, chatter, and semicolons.

    Idempotent; raises EmptyAfterCleaning when nothing query-like remains.
    """
    text = _THINK_RE.sub("", raw)
    fenced = _FENCE_RE.search(text)
    if fenced:
        text = fenced.group(1)
    started = _QUERY_START_RE.search(text)
    if not started:
        raise EmptyAfterCleaning(f"no query found in model output: {raw[:80]!r}")
    text = text[started.start() :]
    text = text.strip().rstrip(";").strip()
    if not text:
        raise EmptyAfterCleaning("model output empty after cleaning")
    return text


# --- transcripts -----------------------------------------------------------------


def fingerprint(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Exchange:
    request_fingerprint: str
    prompt_text: str
    raw_response: str
    timestamp: str
    model_name: str

    def to_json(self) -> dict:
        return {
            "fingerprint": self.request_fingerprint,
            "prompt": self.prompt_text,
            "response": self.raw_response,
            "timestamp": self.timestamp,
            "model": self.model_name,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Exchange":
        return cls(
            request_fingerprint=data["fingerprint"],
            prompt_text=data["prompt"],
            raw_response=data["response"],
            timestamp=data["timestamp"],
            model_name=data["model"],
        )


@dataclass
class Transcript:
    exchanges: List[Exchange] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for exchange in self.exchanges:
            if exchange.request_fingerprint in seen:
                raise TranscriptError(
                    f"duplicate fingerprint {exchange.request_fingerprint} in transcript"
                )
            seen.add(exchange.request_fingerprint)

    def lookup(self, prompt: str) -> Optional[Exchange]:
        wanted = fingerprint(prompt)
        for exchange in self.exchanges:
            if exchange.request_fingerprint == wanted:
                return exchange
        return None


def load_transcript(path: Union[str, Path]) -> Transcript:
    exchanges = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            exchanges.append(Exchange.from_json(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise TranscriptError(f"{path}:{lineno}: malformed exchange: {exc}") from exc
    return Transcript(exchanges)


def load_bundled_transcript(name: str) -> Transcript:
    text = resources.files("graphtalk.data.transcripts").joinpath(f"{name}.jsonl").read_text("utf-8")
    exchanges = [Exchange.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]
    return Transcript(exchanges)


def append_exchange(path: Union[str, Path], exchange: Exchange) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(exchange.to_json(), ensure_ascii=False) + "\n")


# --- model access ------------------------------------------------------------------


@dataclass(frozen=True)
class ModelRef:
    provider: str  # "remote" | "local" | "replay"
    model_name: str = "replay"
    temperature: Optional[float] = None
    max_tokens: Optional[int] = None
    transcript_path: Optional[str] = None

    def __post_init__(self):
        if self.provider not in ("remote", "local", "replay"):
            raise ValueError(f"unknown provider {self.provider!r}")
        if self.provider == "replay" and not self.transcript_path:
            raise ValueError("replay provider requires a transcript path")


class ChatClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class ReplayClient:
    """Serves recorded responses; unseen prompts fail loudly."""

    def __init__(self, transcript: Transcript):
        self.transcript = transcript

    def complete(self, prompt: str) -> str:
        exchange = self.transcript.lookup(prompt)
        if exchange is None:
            raise ReplayMiss(fingerprint(prompt))
        return exchange.raw_response


class HttpChatClient:
    """OpenAI-style chat-completion endpoint over HTTP.

    No automatic retries: evaluation counts attempts, and a silent retry
    would corrupt that count.
    """

    def __init__(
        self,
        base_url: str,
        model_name: str,
        api_key: Optional[str] = None,
        temperature: Optional[float] = None,
        max_tokens: Optional[int] = None,
        timeout: float = 120.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_name = model_name
        self.api_key = api_key
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout
        self._transport = transport

    def complete(self, prompt: str) -> str:
        payload: dict = {
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        if self.max_tokens is not None:
            payload["max_tokens"] = self.max_tokens
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            with httpx.Client(transport=self._transport, timeout=self.timeout) as client:
                response = client.post(
                    f"{self.base_url}/chat/completions", json=payload, headers=headers
                )
        except httpx.HTTPError as exc:
            raise ProviderError(f"transport failure talking to {self.base_url}: {exc}") from exc
        if response.status_code != 200:
            raise ProviderError(
                f"provider returned HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc


class RecordingClient:
    """Wraps a live client and appends every exchange to a transcript file."""

    def __init__(self, inner: ChatClient, path: Union[str, Path], model_name: str):
        self.inner = inner
        self.path = Path(path)
        self.model_name = model_name
        self._seen = set()
        if self.path.exists():
            for exchange in load_transcript(self.path).exchanges:
                self._seen.add(exchange.request_fingerprint)

    def complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        key = fingerprint(prompt)
        if key not in self._seen:
            self._seen.add(key)
            timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
            append_exchange(self.path, Exchange(key, prompt, response, timestamp, self.model_name))
        return response


def build_client(ref: ModelRef) -> ChatClient:
    """Instantiate the client a ModelRef describes.

    Remote reads GRAPHTALK_API_BASE / GRAPHTALK_API_KEY; local reads
    GRAPHTALK_LOCAL_BASE (default http://localhost:11434/v1).
    """
    if ref.provider == "replay":
        assert ref.transcript_path is not None
        return ReplayClient(load_transcript(ref.transcript_path))
    if ref.provider == "remote":
        base = os.environ.get("GRAPHTALK_API_BASE")
        if not base:
            raise ProviderError("GRAPHTALK_API_BASE is not set")
        return HttpChatClient(
            base,
            ref.model_name,
            api_key=os.environ.get("GRAPHTALK_API_KEY"),
            temperature=ref.temperature,
            max_tokens=ref.max_tokens,
        )
    base = os.environ.get("GRAPHTALK_LOCAL_BASE", "http://localhost:11434/v1")
    return HttpChatClient(
        base, ref.model_name, temperature=ref.temperature, max_tokens=ref.max_tokens
    )


def complete(model: ModelRef, prompt: str) -> str:
    """One-shot completion for a ModelRef; see build_client for wiring."""
    return build_client(model).complete(prompt)
