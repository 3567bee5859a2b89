"""Command-line entry points.

Deterministic tools (bench, validate, run, explain, eval) run in-process.
The model-backed session commands (ask, amend) are thin HTTP clients:
they talk to a running service via --server, or spin the service app up
in-process and speak to it through the same HTTP interface.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import cypher
from .benchmark import export_benchmark, generate_benchmark
from .config import load_config, resolve_graph, resolve_schema
from .dialogue import explain_deterministic
from .engine import execute, render_value
from .errors import GraphTalkError
from .evallab import stats_report
from .validator import validate


def _read_query_arg(value: str) -> str:
    if value == "-":
        return sys.stdin.read()
    path = Path(value)
    try:
        if path.is_file():
            return path.read_text(encoding="utf-8")
    except OSError:
        pass
    return value


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


@click.group()
def main() -> None:
    """Conversational question answering over property graphs."""


@main.group()
def bench() -> None:
    """Benchmark generation."""


@bench.command("generate")
@click.option("--seed", type=int, required=True, help="Generation seed.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--schema", "schema_name", default="movie", show_default=True)
def bench_generate(seed: int, out_path: str, schema_name: str) -> None:
    """Emit the 90-case benchmark as line-delimited JSON."""
    try:
        cases = generate_benchmark(resolve_schema(schema_name), seed)
        export_benchmark(cases, out_path)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    click.echo(f"wrote {len(cases)} cases to {out_path}")


@main.command("validate")
@click.option("--schema", "schema_name", required=True)
@click.argument("query")
def validate_command(schema_name: str, query: str) -> None:
    """Check a query (text, file, or '-') against a schema."""
    try:
        schema = resolve_schema(schema_name)
        ast = cypher.parse_query(_read_query_arg(query))
        diagnostics = validate(ast, schema)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    if not diagnostics:
        click.echo("no issues found")
        return
    for diagnostic in diagnostics:
        click.echo(f"{diagnostic.kind.value} at {diagnostic.location}: {diagnostic.message}")
    raise click.exceptions.Exit(1)


@main.command("run")
@click.option("--schema", "schema_name", required=True)
@click.option("--graph", "graph_name", required=True)
@click.argument("query")
def run_command(schema_name: str, graph_name: str, query: str) -> None:
    """Execute a query on a graph fixture and print the result table."""
    try:
        resolve_schema(schema_name)
        graph = resolve_graph(graph_name)
        ast = cypher.parse_query(_read_query_arg(query))
        table = execute(ast, graph)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    click.echo("\t".join(table.columns))
    for row in table.rows:
        click.echo("\t".join(json.dumps(render_value(v, graph)) for v in row))
    click.echo(f"({len(table.rows)} rows)")


@main.command("explain")
@click.option("--schema", "schema_name", required=True)
@click.argument("query")
def explain_command(schema_name: str, query: str) -> None:
    """Print the deterministic explanation of a query."""
    try:
        schema = resolve_schema(schema_name)
        ast = cypher.parse_query(_read_query_arg(query))
        explanation = explain_deterministic(ast, schema)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    for index, step in enumerate(explanation.steps, 1):
        click.echo(f"{index}. {step}")
    click.echo(f"Summary: {explanation.summary}")
    for flag in explanation.flags:
        click.echo(f"Flag [{flag['kind']}]: {flag['message']}")


class _ServiceClient:
    """HTTP client for the session API, in-process or remote."""

    def __init__(self, server: Optional[str], config_path: Optional[str]):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=300.0)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app

            config = load_config(config_path)
            self._client = TestClient(create_app(config))

    def post(self, path: str, payload: dict):
        return self._client.post(path, json=payload)


def _print_turn(record: dict) -> None:
    click.echo(f"query: {record.get('cleaned_query')}")
    if record.get("parse_error"):
        click.echo(f"parse error: {record['parse_error']}")
    for diagnostic in record.get("diagnostics") or []:
        click.echo(f"flag: {diagnostic['kind']}: {diagnostic['message']}")
    execution = record.get("execution")
    if execution is None:
        pass
    elif "error" in execution:
        click.echo(f"execution error: {execution['error']}")
    else:
        click.echo("\t".join(execution["columns"]))
        for row in execution["rows"]:
            click.echo("\t".join(json.dumps(v) for v in row))
        click.echo(f"({execution['total_rows']} rows)")
    explanation = record.get("explanation")
    if explanation:
        click.echo(f"summary: {explanation['summary']}")


def _turn_or_fail(response) -> dict:
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise _fail(f"HTTP {response.status_code}: {detail}")
    return response.json()


@main.command("ask")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", help="Base URL of a running service (thin-client mode).")
@click.option("--session", "session_id", help="Existing session id; created when absent.")
@click.argument("question")
def ask_command(config_path, server, session_id, question: str) -> None:
    """Ask a natural-language question through the session API."""
    try:
        client = _ServiceClient(server, config_path)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    if session_id is None:
        created = _turn_or_fail(client.post("/sessions", {}))
        session_id = created["id"]
        click.echo(f"session: {session_id}")
    record = _turn_or_fail(client.post(f"/sessions/{session_id}/ask", {"question": question}))
    _print_turn(record)


@main.command("amend")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", help="Base URL of a running service (thin-client mode).")
@click.option("--session", "session_id", required=True)
@click.argument("instruction")
def amend_command(config_path, server, session_id: str, instruction: str) -> None:
    """Amend the current query of an existing session."""
    try:
        client = _ServiceClient(server, config_path)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    record = _turn_or_fail(
        client.post(f"/sessions/{session_id}/amend", {"instruction": instruction})
    )
    _print_turn(record)


@main.group("eval")
def eval_group() -> None:
    """Evaluation statistics."""


@eval_group.command("stats")
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--report", "report_dir", type=click.Path(file_okay=False), required=True)
def eval_stats(matrix_path: str, report_dir: str) -> None:
    """Compute accuracy/CI and McNemar-Holm reports from a table file."""
    try:
        written = stats_report(matrix_path, report_dir)
    except GraphTalkError as exc:
        raise _fail(str(exc))
    for path in written:
        click.echo(f"wrote {path}")


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
def serve_command(config_path: str) -> None:
    """Run the HTTP service."""
    from .service import serve

    try:
        serve(load_config(config_path))
    except GraphTalkError as exc:
        raise _fail(str(exc))


if __name__ == "__main__":
    main()
