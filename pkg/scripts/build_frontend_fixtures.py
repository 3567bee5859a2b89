#!/usr/bin/env python3
"""Freeze replay-mode service responses for the frontend test suite.

Runs the session service with the bundled graphclust transcript and dumps
every HTTP response body the browser client would see, including the 409
after the amendment budget is spent.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from graphtalk.config import ServiceConfig
from graphtalk.service import create_app

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

ASK = "Which authors does graphclust have?"
AMENDMENTS = [
    "Actually, I meant the software package, not the publication.",
    "Only return distinct author names.",
    "one change too many",
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        config = ServiceConfig(
            schema="mardi",
            graph="mardi",
            transcript="replay:bundled:graphclust",
            data_dir=tmp,
        )
        with TestClient(create_app(config)) as client:
            session_id = client.post("/sessions").json()["id"]
            responses = []
            response = client.post(f"/sessions/{session_id}/ask", json={"question": ASK})
            responses.append({"status": response.status_code, "body": response.json()})
            for instruction in AMENDMENTS:
                response = client.post(
                    f"/sessions/{session_id}/amend", json={"instruction": instruction}
                )
                responses.append({"status": response.status_code, "body": response.json()})
            session = client.get(f"/sessions/{session_id}").json()
    (OUT / "graphclust_responses.json").write_text(
        json.dumps(responses, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (OUT / "graphclust_session.json").write_text(
        json.dumps(session, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote fixtures for session {session_id} ({len(responses)} responses)")


if __name__ == "__main__":
    main()
