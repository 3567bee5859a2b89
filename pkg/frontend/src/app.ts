// DOM wiring: each user action awaits the server's turn record and re-renders
// the whole screen from state (no optimistic updates).

import { ApiError, ServiceClient } from "./api.js";
import {
  SessionState,
  applyHttpError,
  applyNetworkError,
  applyTurn,
  initialState,
  setMode,
  stateFromSession,
} from "./state.js";
import { renderSession } from "./view.js";

const client = new ServiceClient("");
let state: SessionState = initialState();

function render(): void {
  const root = document.getElementById("root");
  if (!root) return;
  root.innerHTML = renderSession(state);
  const form = document.getElementById("composer") as HTMLFormElement | null;
  form?.addEventListener("submit", onSubmit);
  for (const radio of Array.from(document.querySelectorAll('input[name="mode"]'))) {
    radio.addEventListener("change", (event) => {
      const value = (event.target as HTMLInputElement).value as "ask" | "amend";
      state = setMode(state, value);
    });
  }
}

async function onSubmit(event: Event): Promise<void> {
  event.preventDefault();
  const input = document.getElementById("utterance") as HTMLInputElement | null;
  const text = input?.value.trim();
  if (!text) return;
  try {
    if (state.sessionId === null) {
      const created = await client.createSession();
      state = { ...state, sessionId: created.id };
    }
    const turn =
      state.mode === "amend"
        ? await client.amend(state.sessionId!, text)
        : await client.ask(state.sessionId!, text);
    state = applyTurn(state, turn);
  } catch (error) {
    if (error instanceof ApiError) {
      state = applyHttpError(state, error.status, error.detail);
    } else {
      state = applyNetworkError(state, String(error));
    }
  }
  render();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const existing = params.get("session");
  if (existing) {
    try {
      state = stateFromSession(await client.getSession(existing));
    } catch (error) {
      state = applyNetworkError(state, String(error));
    }
  }
  render();
}

window.addEventListener("DOMContentLoaded", () => {
  void boot();
});
