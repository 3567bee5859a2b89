// Thin fetch wrapper around the session API.

import { SessionRecord, TurnRecord } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ServiceClient {
  constructor(private base: string = "") {}

  createSession(): Promise<{ id: string }> {
    return post(`${this.base}/sessions`, {});
  }

  ask(sessionId: string, question: string): Promise<TurnRecord> {
    return post(`${this.base}/sessions/${sessionId}/ask`, { question });
  }

  amend(sessionId: string, instruction: string): Promise<TurnRecord> {
    return post(`${this.base}/sessions/${sessionId}/amend`, { instruction });
  }

  getSession(sessionId: string): Promise<SessionRecord> {
    return request(`${this.base}/sessions/${sessionId}`);
  }
}
