"""HTTP service exposing sessions, asking, amending, and schema blocks.

Turn responses are byte-identical to the records persisted in the session
log: each turn is serialized once and both written to disk and returned.
Per-session operations are serialized with a lock; schema and graph
snapshots are shared read-only.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import dialogue
from .config import ServiceConfig, build_chat_client, resolve_graph, resolve_schema
from .dialogue import Session, SessionTurn
from .errors import BudgetExhausted, ProviderError, ReplayMiss
from .schema import PRESET_NAMES, load_preset, schema_prompt_block

ROWS_CAP = 200


class AskRequest(BaseModel):
    question: str


class AmendRequest(BaseModel):
    instruction: str


class SessionCreated(BaseModel):
    id: str


class SchemaBlock(BaseModel):
    name: str
    block: str


class HealthStatus(BaseModel):
    status: str


@dataclass
class _SessionState:
    session: Session
    payloads: List[str] = field(default_factory=list)  # serialized turn records
    lock: threading.Lock = field(default_factory=threading.Lock)


def _serialize_turn(turn: SessionTurn, session: Session) -> str:
    record = dialogue.turn_to_record(turn, session.graph, rows_cap=ROWS_CAP)
    return json.dumps(record, ensure_ascii=False)


class SessionStore:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.schema = resolve_schema(config.schema)
        self.graph = resolve_graph(config.graph)
        self.data_dir = Path(config.data_dir)
        self._states: Dict[str, _SessionState] = {}
        self._lock = threading.Lock()

    def _session_file(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def create(self) -> _SessionState:
        session = Session(
            schema=self.schema,
            graph=self.graph,
            client=build_chat_client(self.config),
            model_name=self.config.model,
            amendment_budget=self.config.budget,
        )
        state = _SessionState(session)
        with self._lock:
            self._states[session.id] = state
        self.data_dir.mkdir(parents=True, exist_ok=True)
        header = {
            "type": "session",
            "id": session.id,
            "schema": self.schema.name,
            "model": self.config.model,
            "amendment_budget": self.config.budget,
        }
        self._session_file(session.id).write_text(
            json.dumps(header, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        return state

    def get(self, session_id: str) -> Optional[_SessionState]:
        with self._lock:
            state = self._states.get(session_id)
        if state is not None:
            return state
        return self._revive(session_id)

    def _revive(self, session_id: str) -> Optional[_SessionState]:
        path = self._session_file(session_id)
        if not path.exists():
            return None
        lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
        header = json.loads(lines[0])
        session = Session(
            schema=self.schema,
            graph=self.graph,
            client=build_chat_client(self.config),
            model_name=header.get("model", self.config.model),
            amendment_budget=header.get("amendment_budget", self.config.budget),
            id=session_id,
        )
        payloads = []
        for line in lines[1:]:
            record = json.loads(line)
            payloads.append(line)
            session.turns.append(
                SessionTurn(
                    kind=record["kind"],
                    text=record["text"],
                    attempt=record["attempt"],
                    prompt_sent=record["prompt_sent"],
                    raw_output=record["raw_output"],
                    cleaned_query=record.get("cleaned_query"),
                    parse_error=record.get("parse_error"),
                )
            )
        state = _SessionState(session, payloads)
        with self._lock:
            self._states[session_id] = state
        return state

    def persist_turn(self, state: _SessionState, payload: str) -> None:
        state.payloads.append(payload)
        with open(self._session_file(state.session.id), "a", encoding="utf-8") as handle:
            handle.write(payload + "\n")


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="graphtalk", version="0.1.0")
    # The browser client may be served from a different origin; there is no
    # authentication to protect (see the service's stated non-goals).
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(config)
    app.state.store = store

    def _state_or_404(session_id: str) -> _SessionState:
        state = store.get(session_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return state

    def _run_turn(state: _SessionState, action) -> Response:
        try:
            with state.lock:
                turn = action(state.session)
                payload = _serialize_turn(turn, state.session)
                store.persist_turn(state, payload)
        except BudgetExhausted as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (ProviderError, ReplayMiss) as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return Response(content=payload, media_type="application/json")

    @app.post("/sessions", response_model=SessionCreated)
    def create_session() -> SessionCreated:
        state = store.create()
        return SessionCreated(id=state.session.id)

    @app.post("/sessions/{session_id}/ask")
    def ask_session(session_id: str, body: AskRequest) -> Response:
        state = _state_or_404(session_id)
        return _run_turn(state, lambda s: dialogue.ask(s, body.question))

    @app.post("/sessions/{session_id}/amend")
    def amend_session(session_id: str, body: AmendRequest) -> Response:
        state = _state_or_404(session_id)
        return _run_turn(state, lambda s: dialogue.amend(s, body.instruction))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> Response:
        state = _state_or_404(session_id)
        with state.lock:
            record = {
                "id": state.session.id,
                "schema": store.schema.name,
                "model": state.session.model_name,
                "amendment_budget": state.session.amendment_budget,
                "turns": [json.loads(p) for p in state.payloads],
            }
        return Response(content=json.dumps(record, ensure_ascii=False), media_type="application/json")

    @app.get("/schemas/{name}", response_model=SchemaBlock)
    def get_schema(name: str) -> SchemaBlock:
        if name not in PRESET_NAMES:
            raise HTTPException(status_code=404, detail=f"unknown schema preset {name}")
        return SchemaBlock(name=name, block=schema_prompt_block(load_preset(name)))

    @app.get("/health", response_model=HealthStatus)
    def health() -> HealthStatus:
        return HealthStatus(status="ok")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    host, _, port = config.listen.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8189))
