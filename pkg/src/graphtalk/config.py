"""Service configuration: file, environment, and flag layers.

Config files are line-oriented ``key: value`` with ``#`` comments.
Precedence is flags > environment (GRAPHTALK_<KEY>) > file > defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Union

from .engine import PropertyGraph, load_fixture, load_graph
from .errors import ConfigError
from .llm import (
    ChatClient,
    HttpChatClient,
    RecordingClient,
    ReplayClient,
    load_transcript,
)
from .schema import PRESET_NAMES, GraphSchema, load_preset, load_schema

_KEYS = (
    "listen",
    "schema",
    "graph",
    "provider",
    "model",
    "temperature",
    "budget",
    "transcript",
    "data_dir",
)


@dataclass(frozen=True)
class ServiceConfig:
    listen: str = "127.0.0.1:8189"
    schema: str = "movie"
    graph: str = "movie"
    provider: str = "replay"
    model: str = "replay"
    temperature: Optional[float] = None
    budget: int = 2
    transcript: str = "off"  # off | record:<path> | replay:<path | bundled:<name>>
    data_dir: str = "./sessions"

    def __post_init__(self):
        if self.provider not in ("remote", "local", "replay"):
            raise ConfigError(f"unknown provider {self.provider!r}")
        mode = self.transcript.split(":", 1)[0]
        if mode not in ("off", "record", "replay"):
            raise ConfigError(f"unknown transcript mode {self.transcript!r}")
        if mode in ("record", "replay") and ":" not in self.transcript:
            raise ConfigError(f"transcript mode {mode} needs a path: {mode}:<path>")
        if mode == "replay" and self.provider in ("remote", "local"):
            raise ConfigError("replay mode forbids remote and local providers")
        if self.budget < 0:
            raise ConfigError("amendment budget must be non-negative")


def parse_config_file(path: Union[str, Path]) -> Dict[str, str]:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key: value', got {raw!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, str]] = None
) -> ServiceConfig:
    values: Dict[str, str] = {}
    if path is not None:
        values.update(parse_config_file(path))
    for key in _KEYS:
        env = os.environ.get(f"GRAPHTALK_{key.upper()}")
        if env is not None:
            values[key] = env
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    kwargs: Dict[str, object] = {}
    for key, value in values.items():
        if key == "budget":
            kwargs[key] = int(value)
        elif key == "temperature":
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    return ServiceConfig(**kwargs)  # type: ignore[arg-type]


def resolve_schema(name_or_path: str) -> GraphSchema:
    if name_or_path in PRESET_NAMES:
        return load_preset(name_or_path)
    return load_schema(name_or_path)


def resolve_graph(name_or_path: str) -> PropertyGraph:
    if name_or_path in PRESET_NAMES:
        return load_fixture(name_or_path)
    return load_graph(name_or_path)


def resolve_transcript_path(spec: str) -> Path:
    if spec.startswith("bundled:"):
        name = spec.split(":", 1)[1]
        return Path(str(resources.files("graphtalk.data.transcripts").joinpath(f"{name}.jsonl")))
    return Path(spec)


def build_chat_client(config: ServiceConfig) -> ChatClient:
    mode, _, rest = config.transcript.partition(":")
    if mode == "replay":
        return ReplayClient(load_transcript(resolve_transcript_path(rest)))
    if config.provider == "replay":
        raise ConfigError("provider 'replay' requires transcript mode replay:<path>")
    if config.provider == "remote":
        base = os.environ.get("GRAPHTALK_API_BASE")
        if not base:
            raise ConfigError("remote provider requires GRAPHTALK_API_BASE")
        client: ChatClient = HttpChatClient(
            base,
            config.model,
            api_key=os.environ.get("GRAPHTALK_API_KEY"),
            temperature=config.temperature,
        )
    else:
        base = os.environ.get("GRAPHTALK_LOCAL_BASE", "http://localhost:11434/v1")
        client = HttpChatClient(base, config.model, temperature=config.temperature)
    if mode == "record":
        return RecordingClient(client, rest, config.model)
    return client
