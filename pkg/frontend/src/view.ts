// Pure HTML renderers: state in, markup out. No semantics beyond display.

import { queryDiff } from "./diff.js";
import { SessionState, canAmend, hasAsked, previousQuery } from "./state.js";
import { TurnRecord, isFailure } from "./types.js";
import { tokenize } from "./tokens.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function highlightQuery(query: string): string {
  return tokenize(query)
    .map((token) => `<span class="tok-${token.kind}">${escapeHtml(token.text)}</span>`)
    .join(" ");
}

export function renderDiff(prev: string, next: string): string {
  const parts = queryDiff(prev, next).map((entry) => {
    const safe = escapeHtml(entry.token);
    if (entry.op === "ins") return `<ins>${safe}</ins>`;
    if (entry.op === "del") return `<del>${safe}</del>`;
    return `<span class="keep">${safe}</span>`;
  });
  return `<div class="diff">${parts.join(" ")}</div>`;
}

function renderCell(value: unknown): string {
  if (value === null) return `<td class="null">null</td>`;
  if (Array.isArray(value)) return `<td>${escapeHtml(JSON.stringify(value))}</td>`;
  return `<td>${escapeHtml(String(value))}</td>`;
}

export function renderResultGrid(turn: TurnRecord): string {
  const execution = turn.execution;
  if (execution === null) return "";
  if (isFailure(execution)) {
    return `<div class="banner error">execution error: ${escapeHtml(execution.error)}</div>`;
  }
  const header = execution.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = execution.rows
    .map((row) => `<tr>${row.map(renderCell).join("")}</tr>`)
    .join("");
  const truncated =
    execution.total_rows > execution.rows.length
      ? `<p class="note">showing ${execution.rows.length} of ${execution.total_rows} rows</p>`
      : "";
  return (
    `<table class="results"><thead><tr>${header}</tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    `<p class="note">${execution.total_rows} rows</p>${truncated}`
  );
}

export function renderDiagnostics(turn: TurnRecord): string {
  if (turn.diagnostics.length === 0) return "";
  const badges = turn.diagnostics
    .map(
      (d) =>
        `<span class="badge badge-${escapeHtml(d.kind)}" title="${escapeHtml(d.message)}">` +
        `${escapeHtml(d.kind)}</span>`
    )
    .join(" ");
  return `<div class="diagnostics">${badges}</div>`;
}

export function renderExplanation(turn: TurnRecord): string {
  const explanation = turn.explanation;
  if (explanation === null) return "";
  const steps = explanation.steps.map((s) => `<li>${escapeHtml(s)}</li>`).join("");
  const flags = explanation.flags
    .map((f) => `<li class="flag">${escapeHtml(f.message)}</li>`)
    .join("");
  return (
    `<details class="explanation" open><summary>explanation</summary>` +
    `<ol>${steps}</ol><p class="summary">${escapeHtml(explanation.summary)}</p>` +
    (flags ? `<ul class="flags">${flags}</ul>` : "") +
    `</details>`
  );
}

export function renderTurn(turn: TurnRecord, prevQuery: string | null): string {
  const label = turn.kind === "ask" ? "Q" : "amend";
  const pieces: string[] = [
    `<div class="turn turn-${turn.kind}" data-attempt="${turn.attempt}">`,
    `<p class="utterance"><b>${label}:</b> ${escapeHtml(turn.text)}` +
      ` <span class="attempt">attempt ${turn.attempt}/3</span></p>`,
  ];
  if (turn.parse_error !== null) {
    pieces.push(`<div class="banner error">query error: ${escapeHtml(turn.parse_error)}</div>`);
    if (turn.cleaned_query !== null) {
      pieces.push(`<pre class="query">${highlightQuery(turn.cleaned_query)}</pre>`);
    }
  } else if (turn.cleaned_query !== null) {
    pieces.push(`<pre class="query">${highlightQuery(turn.cleaned_query)}</pre>`);
    if (prevQuery !== null && turn.kind === "amend") {
      pieces.push(renderDiff(prevQuery, turn.cleaned_query));
    }
    pieces.push(renderDiagnostics(turn));
    pieces.push(renderResultGrid(turn));
    pieces.push(renderExplanation(turn));
  }
  pieces.push("</div>");
  return pieces.filter((p) => p !== "").join("\n");
}

export function renderSession(state: SessionState): string {
  const turns = state.turns
    .map((turn, index) => renderTurn(turn, previousQuery(state.turns, index)))
    .join("\n");
  const error = state.error
    ? `<div class="banner error" id="inline-error">${escapeHtml(state.error)}</div>`
    : "";
  const amendAllowed = canAmend(state);
  const note = state.budgetExhausted
    ? `<p class="note">amendment budget exhausted; ask a new question</p>`
    : "";
  return (
    `<div class="session">` +
    `<div class="turns">${turns}</div>` +
    error +
    note +
    `<form id="composer">` +
    `<label><input type="radio" name="mode" value="ask" ${
      state.mode === "ask" ? "checked" : ""
    }/> ask</label>` +
    `<label><input type="radio" name="mode" value="amend" ${
      state.mode === "amend" ? "checked" : ""
    } ${amendAllowed ? "" : "disabled"}/> amend</label>` +
    `<input type="text" id="utterance" placeholder="${
      hasAsked(state) ? "ask or amend" : "ask a question"
    }"/>` +
    `<button type="submit">send</button>` +
    `</form></div>`
  );
}
