"""Adapter for submitting queries to an external graph database over HTTP.

Speaks the transactional HTTP query API (statement in, columns/rows out).
The binary wire protocol is out of scope; this one adapter suffices for
parity checks against a real engine.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import httpx

from .engine import ResultTable
from .errors import RemoteQueryError


@dataclass
class ExternalEndpoint:
    base_url: str
    database: str = "neo4j"
    username: Optional[str] = field(default_factory=lambda: os.environ.get("GRAPHTALK_DB_USER"))
    password: Optional[str] = field(default_factory=lambda: os.environ.get("GRAPHTALK_DB_PASSWORD"))
    timeout: float = 30.0


def execute_remote(
    query_text: str,
    endpoint: ExternalEndpoint,
    transport: Optional[httpx.BaseTransport] = None,
) -> ResultTable:
    """Run ``query_text`` remotely; row order is the server's.

    Raises ConnectionError when the endpoint is unreachable within the
    timeout and RemoteQueryError when the server rejects the query.
    """
    url = f"{endpoint.base_url.rstrip('/')}/db/{endpoint.database}/tx/commit"
    auth = None
    if endpoint.username is not None:
        auth = (endpoint.username, endpoint.password or "")
    try:
        with httpx.Client(transport=transport, timeout=endpoint.timeout, auth=auth) as client:
            response = client.post(url, json={"statements": [{"statement": query_text}]})
    except httpx.HTTPError as exc:
        raise ConnectionError(f"cannot reach {endpoint.base_url}: {exc}") from exc
    if response.status_code != 200:
        raise RemoteQueryError(f"HTTP {response.status_code}: {response.text[:200]}")
    try:
        body = response.json()
    except ValueError as exc:
        raise RemoteQueryError(f"non-JSON response: {exc}") from exc
    errors = body.get("errors") or []
    if errors:
        first = errors[0]
        raise RemoteQueryError(f"{first.get('code', 'error')}: {first.get('message', '')}")
    results = body.get("results") or []
    if not results:
        return ResultTable([], [])
    result = results[0]
    columns = list(result.get("columns") or [])
    rows = [tuple(entry.get("row", [])) for entry in result.get("data") or []]
    return ResultTable(columns, rows)
