"""Session state machine: generate, execute, explain, amend.

A session owns a schema, a graph snapshot, and a chat client. Each ask or
amend turn renders the matching prompt, cleans and parses the model
output, validates it against the schema, executes it, and attaches a
deterministic explanation. Failures in any of those stages are captured
on the turn rather than raised, so a user can repair them by amending;
only transport-level provider failures propagate.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import cypher
from .benchmark import FactSet, gold_facts
from .cypher import ast
from .engine import PropertyGraph, ResultTable, execute, render_value
from .errors import (
    BudgetExhausted,
    CypherSyntaxError,
    EmptyAfterCleaning,
    ExecutionError,
    UnknownVariable,
)
from .llm import ChatClient, clean_query_output, load_template, render_prompt
from .schema import GraphSchema, schema_prompt_block
from .validator import Diagnostic, validate


@dataclass
class Explanation:
    steps: List[str]
    summary: str
    flags: List[Dict[str, str]]  # {"kind": ..., "message": ...}
    source: str  # "deterministic" | "model"
    raw: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "summary": self.summary,
            "flags": self.flags,
            "source": self.source,
        }


@dataclass
class SessionTurn:
    kind: str  # "ask" | "amend"
    text: str
    attempt: int
    prompt_sent: str
    raw_output: str
    cleaned_query: Optional[str] = None
    parse_error: Optional[str] = None
    parsed: Optional[ast.QueryAst] = None
    diagnostics: List[Diagnostic] = field(default_factory=list)
    result: Optional[ResultTable] = None
    execution_error: Optional[str] = None
    explanation: Optional[Explanation] = None


@dataclass
class Session:
    schema: GraphSchema
    graph: PropertyGraph
    client: ChatClient
    model_name: str = "replay"
    amendment_budget: int = 2
    id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    turns: List[SessionTurn] = field(default_factory=list)

    def current_question(self) -> Optional[str]:
        for turn in reversed(self.turns):
            if turn.kind == "ask":
                return turn.text
        return None

    def current_query(self) -> Optional[str]:
        for turn in reversed(self.turns):
            if turn.cleaned_query is not None:
                return turn.cleaned_query
        return None

    def amendments_since_ask(self) -> int:
        count = 0
        for turn in reversed(self.turns):
            if turn.kind == "ask":
                break
            count += 1
        return count


def ask(session: Session, question: str) -> SessionTurn:
    """Translate a question into a query, run it, and record the turn."""
    kind = "hyena_generation" if session.schema.name == "hyena" else "generation"
    prompt = render_prompt(
        load_template(kind),
        {"schema": schema_prompt_block(session.schema), "question": question},
    )
    raw = session.client.complete(prompt)
    turn = _process_output(session, "ask", question, prompt, raw, attempt=1)
    session.turns.append(turn)
    return turn


def amend(session: Session, instruction: str) -> SessionTurn:
    """Apply a natural-language edit to the current query."""
    current = session.current_query()
    question = session.current_question()
    if current is None or question is None:
        raise BudgetExhausted("nothing to amend: ask a question first")
    used = session.amendments_since_ask()
    if used >= session.amendment_budget:
        raise BudgetExhausted(
            f"amendment budget of {session.amendment_budget} per question is exhausted"
        )
    prompt = render_prompt(
        load_template("amendment"),
        {
            "question": question,
            "current_query": current,
            "schema": schema_prompt_block(session.schema),
            "amendment": instruction,
        },
    )
    raw = session.client.complete(prompt)
    turn = _process_output(session, "amend", instruction, prompt, raw, attempt=used + 2)
    session.turns.append(turn)
    return turn


def _process_output(
    session: Session, kind: str, text: str, prompt: str, raw: str, attempt: int
) -> SessionTurn:
    turn = SessionTurn(kind=kind, text=text, attempt=attempt, prompt_sent=prompt, raw_output=raw)
    try:
        turn.cleaned_query = clean_query_output(raw)
    except EmptyAfterCleaning as exc:
        turn.parse_error = str(exc)
        return turn
    try:
        turn.parsed = cypher.parse_query(turn.cleaned_query)
    except CypherSyntaxError as exc:
        turn.parse_error = str(exc)
        return turn
    try:
        turn.diagnostics = validate(turn.parsed, session.schema)
        turn.explanation = explain_deterministic(turn.parsed, session.schema)
    except UnknownVariable as exc:
        turn.execution_error = str(exc)
        return turn
    try:
        turn.result = execute(turn.parsed, session.graph)
    except ExecutionError as exc:
        turn.execution_error = str(exc)
    return turn


# --- deterministic explanation ---------------------------------------------------


def _describe_node(node: ast.NodePattern) -> str:
    name = node.variable or "an unnamed node"
    label = f"{node.label} node" if node.label else "node"
    text = f"{label} {name}" if node.variable else f"an unlabeled {label}"
    if node.label and not node.variable:
        text = f"a {node.label} node"
    conditions = [
        f"{key} = {cypher.print_literal(lit.value)}" for key, lit in node.properties
    ]
    if conditions:
        text += f" with {' and '.join(conditions)}"
    return text


def _pattern_steps(pattern: ast.Pattern, optional: bool) -> List[str]:
    steps = []
    first = pattern.nodes()[0]
    prefix = "Optionally locate" if optional else "Locate"
    steps.append(f"{prefix} every {_describe_node(first)}.")
    for left, rel, right in pattern.hops():
        rel_name = rel.rel_type or "any"
        if rel.direction is ast.Direction.LEFT_TO_RIGHT:
            direction = "outgoing"
        elif rel.direction is ast.Direction.RIGHT_TO_LEFT:
            direction = "incoming"
        else:
            direction = "either-direction"
        source = left.variable or "the previous node"
        step = (
            f"Follow {direction} {rel_name} relationships from {source} "
            f"to every {_describe_node(right)}."
        )
        if optional:
            step += " Rows without such a match are kept with empty values."
        steps.append(step)
    return steps


def _render_relation(
    rel_type: str, from_var: str, to_var: str, labels: Dict[str, str]
) -> str:
    def endpoint(var: str) -> str:
        label = labels.get(var)
        return f"({var}:{label})" if label else f"({var})"

    return f"{endpoint(from_var)}-[:{rel_type}]->{endpoint(to_var)}"


def explain_deterministic(query: ast.QueryAst, schema: GraphSchema) -> Explanation:
    """Clause-by-clause walkthrough, a complete one-sentence summary, and
    flags that mirror the validator's diagnostics exactly."""
    steps: List[str] = []
    for clause in query.clauses:
        if isinstance(clause, ast.MatchClause):
            for pattern in clause.patterns:
                steps.extend(_pattern_steps(pattern, clause.optional))
        elif isinstance(clause, ast.WhereClause):
            steps.append(f"Keep only rows where {cypher.print_bool(clause.expr)}.")
        elif isinstance(clause, ast.WithClause):
            carried = ", ".join(cypher.print_projection(p) for p in clause.projections)
            step = f"Carry forward {carried}."
            if clause.where is not None:
                step += f" Keep only rows where {cypher.print_bool(clause.where)}."
            steps.append(step)
        elif isinstance(clause, ast.ReturnClause):
            projected = ", ".join(cypher.print_projection(p) for p in clause.projections)
            step = f"Return {projected}"
            if clause.distinct:
                step += ", dropping duplicate rows"
            if clause.order_by:
                keys = ", ".join(
                    cypher.print_value(o.expr) + (" descending" if o.descending else "")
                    for o in clause.order_by
                )
                step += f", ordered by {keys}"
            if clause.limit is not None:
                step += f", limited to {clause.limit} rows"
            steps.append(step + ".")
    facts = gold_facts(query)
    summary = _facts_summary(facts)
    diagnostics = validate(query, schema)
    flags = [{"kind": d.kind.value, "message": d.message} for d in diagnostics]
    return Explanation(steps=steps, summary=summary, flags=flags, source="deterministic")


def _facts_summary(facts: FactSet) -> str:
    labels = dict(facts.entities)
    parts: List[str] = []
    returns = ", ".join(facts.returns)
    parts.append(f"This query returns {returns}")
    if facts.relations:
        rendered = " and ".join(
            _render_relation(rel, f, t, labels) for rel, f, t in facts.relations
        )
        parts.append(f"from the pattern {rendered}")
    elif facts.entities:
        rendered = " and ".join(f"({v}:{l})" for v, l in facts.entities)
        parts.append(f"from {rendered} nodes")
    if facts.filters:
        parts.append(f"where {' and '.join(facts.filters)}")
    return " ".join(parts) + "."


def summary_covers(facts: FactSet, text: str, strict: bool = True) -> Tuple[bool, List[str]]:
    """Check a summary against the gold facts; returns (covered, missing).

    Strict mode demands the exact normalized fragments (used to grade the
    deterministic explainer). Relaxed mode grades model prose: entity
    labels, relationship types (underscores optional), filter literals,
    and the year literal must all be mentioned.
    """
    haystack = text.casefold()
    missing: List[str] = []

    def need(fragment: str) -> None:
        if fragment.casefold() not in haystack:
            missing.append(fragment)

    for _, label in facts.entities:
        need(label)
    for rel_type, _, _ in facts.relations:
        if rel_type.casefold() in haystack:
            continue
        if rel_type.replace("_", " ").casefold() in haystack:
            continue
        missing.append(rel_type)
    if strict:
        for item in facts.filters:
            need(item)
        for item in facts.returns:
            need(item)
        if facts.year_constraint:
            need(facts.year_constraint)
    else:
        for item in facts.filters:
            literal = _filter_literal(item)
            if literal:
                need(literal)
        if facts.year_constraint:
            year = re.search(r"\d+", facts.year_constraint)
            if year:
                need(year.group())
    return not missing, missing


def _filter_literal(filter_text: str) -> Optional[str]:
    quoted = re.search(r'"([^"]*)"', filter_text)
    if quoted:
        return quoted.group(1)
    number = re.search(r"-?\d+(?:\.\d+)?", filter_text)
    return number.group() if number else None


# --- model-backed explanation -----------------------------------------------------

_STEP_RE = re.compile(r"^\s*(\d+)[.)]\s*(.+)$")

_PROBLEM_HINTS = (
    "wrong",
    "incorrect",
    "reversed",
    "flipped",
    "does not exist",
    "doesn't exist",
    "implausible",
    "nonsense",
    "error",
    "issue",
    "invalid",
    "contradict",
    "mistake",
    "suspicious",
    "not make sense",
    "makes no sense",
    "doesn't make sense",
)

# All-clear phrasing ("nothing looks wrong", "no errors") must not count as
# a complaint; sentence-level matching is approximate by design.
_NEGATED_PROBLEM_RE = re.compile(
    r"\b(nothing|no|none|not)\b.{0,60}?"
    r"\b(wrong|error|errors|issue|issues|problem|problems|invalid|mistake|mistakes|suspicious)\b",
    re.IGNORECASE | re.DOTALL,
)


def _mentions_problem(sentence: str) -> bool:
    lowered = sentence.casefold()
    if not any(hint in lowered for hint in _PROBLEM_HINTS):
        return False
    return not _NEGATED_PROBLEM_RE.search(sentence)


def explain_with_model(client: ChatClient, query_text: str) -> Explanation:
    """Ask a model for an explanation and parse its free-form answer."""
    prompt = render_prompt(load_template("explanation"), {"query": query_text})
    raw = client.complete(prompt)
    steps: List[str] = []
    last_step_line = -1
    lines = raw.splitlines()
    for index, line in enumerate(lines):
        match = _STEP_RE.match(line)
        if match:
            steps.append(match.group(2).strip())
            last_step_line = index
    if steps:
        remainder = "\n".join(lines[last_step_line + 1 :]).strip()
        summary = remainder or raw.strip()
    else:
        summary = raw.strip()
    flags = [
        {"kind": "model", "message": sentence.strip()}
        for sentence in re.split(r"(?<=[.!?])\s+", " ".join(raw.split()))
        if sentence.strip() and _mentions_problem(sentence)
    ]
    return Explanation(steps=steps, summary=summary, flags=flags, source="model", raw=raw)


# --- serialization ------------------------------------------------------------------


def turn_to_record(turn: SessionTurn, graph: PropertyGraph, rows_cap: int = 200) -> dict:
    """The structured record the HTTP service returns and persists."""
    execution: Optional[dict]
    if turn.result is not None:
        rows = [
            [render_value(v, graph) for v in row] for row in turn.result.rows[:rows_cap]
        ]
        execution = {
            "columns": turn.result.columns,
            "rows": rows,
            "total_rows": len(turn.result.rows),
        }
    elif turn.execution_error is not None:
        execution = {"error": turn.execution_error}
    else:
        execution = None
    return {
        "kind": turn.kind,
        "text": turn.text,
        "attempt": turn.attempt,
        "prompt_sent": turn.prompt_sent,
        "raw_output": turn.raw_output,
        "cleaned_query": turn.cleaned_query,
        "parse_error": turn.parse_error,
        "diagnostics": [
            {"kind": d.kind.value, "location": d.location, "message": d.message}
            for d in turn.diagnostics
        ],
        "execution": execution,
        "explanation": turn.explanation.to_json() if turn.explanation else None,
    }


def session_to_record(session: Session, rows_cap: int = 200) -> dict:
    return {
        "id": session.id,
        "schema": session.schema.name,
        "model": session.model_name,
        "amendment_budget": session.amendment_budget,
        "turns": [turn_to_record(t, session.graph, rows_cap) for t in session.turns],
    }


def session_to_transcript(session: Session) -> "Transcript":
    """The session's prompt/response exchanges in replayable form.

    Replaying a transcript built this way reproduces the session's model
    outputs exactly. Repeated prompts keep their first response.
    """
    from .llm import Exchange, Transcript, fingerprint

    exchanges = []
    seen = set()
    for turn in session.turns:
        key = fingerprint(turn.prompt_sent)
        if key in seen:
            continue
        seen.add(key)
        exchanges.append(
            Exchange(key, turn.prompt_sent, turn.raw_output, "", session.model_name)
        )
    return Transcript(exchanges)
