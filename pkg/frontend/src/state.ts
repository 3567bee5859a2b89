// Screen state is a pure function of the records fetched from the service;
// reloading a session reproduces the identical view.

import { SessionRecord, TurnRecord } from "./types.js";

export type InputMode = "ask" | "amend";

export interface SessionState {
  sessionId: string | null;
  budget: number;
  turns: TurnRecord[];
  mode: InputMode;
  error: string | null;
  budgetExhausted: boolean;
}

export function initialState(budget = 2): SessionState {
  return {
    sessionId: null,
    budget,
    turns: [],
    mode: "ask",
    error: null,
    budgetExhausted: false,
  };
}

export function amendmentsSinceAsk(turns: TurnRecord[]): number {
  let count = 0;
  for (let i = turns.length - 1; i >= 0; i--) {
    if (turns[i]!.kind === "ask") return count;
    count += 1;
  }
  return count;
}

export function hasAsked(state: SessionState): boolean {
  return state.turns.some((turn) => turn.kind === "ask");
}

// Amend mode is unreachable before the first ask, and disabled once the
// per-question budget is spent (derived from the records, confirmed by a
// 409 from the service).
export function canAmend(state: SessionState): boolean {
  if (!hasAsked(state) || state.budgetExhausted) return false;
  return amendmentsSinceAsk(state.turns) < state.budget;
}

export function stateFromSession(record: SessionRecord): SessionState {
  const state: SessionState = {
    sessionId: record.id,
    budget: record.amendment_budget,
    turns: [...record.turns],
    mode: "ask",
    error: null,
    budgetExhausted: false,
  };
  state.budgetExhausted = hasAsked(state) && amendmentsSinceAsk(state.turns) >= state.budget;
  return state;
}

export function applyTurn(state: SessionState, turn: TurnRecord): SessionState {
  const turns = [...state.turns, turn];
  const next: SessionState = {
    ...state,
    turns,
    error: null,
    budgetExhausted: false,
  };
  next.budgetExhausted = amendmentsSinceAsk(turns) >= state.budget;
  return next;
}

// Failures never destroy the rendered session; they surface inline and the
// user may retry. A 409 additionally pins the budget-exhausted flag.
export function applyHttpError(state: SessionState, status: number, detail: string): SessionState {
  return {
    ...state,
    error: `HTTP ${status}: ${detail}`,
    budgetExhausted: state.budgetExhausted || status === 409,
  };
}

export function applyNetworkError(state: SessionState, message: string): SessionState {
  return { ...state, error: `network error: ${message} (retry to resend)` };
}

export function setMode(state: SessionState, mode: InputMode): SessionState {
  if (mode === "amend" && !canAmend(state)) return { ...state, mode: "ask" };
  return { ...state, mode };
}

export function previousQuery(turns: TurnRecord[], upTo: number): string | null {
  for (let i = upTo - 1; i >= 0; i--) {
    const query = turns[i]!.cleaned_query;
    if (query !== null) return query;
  }
  return null;
}
