// Shapes of the records the HTTP service returns. The client renders these
// verbatim: all query semantics stay on the server.

export interface DiagnosticRecord {
  kind: string;
  location: string;
  message: string;
}

export interface ExecutionSuccess {
  columns: string[];
  rows: unknown[][];
  total_rows: number;
}

export interface ExecutionFailure {
  error: string;
}

export type ExecutionRecord = ExecutionSuccess | ExecutionFailure;

export interface ExplanationRecord {
  steps: string[];
  summary: string;
  flags: { kind: string; message: string }[];
  source: string;
}

export interface TurnRecord {
  kind: "ask" | "amend";
  text: string;
  attempt: number;
  prompt_sent: string;
  raw_output: string;
  cleaned_query: string | null;
  parse_error: string | null;
  diagnostics: DiagnosticRecord[];
  execution: ExecutionRecord | null;
  explanation: ExplanationRecord | null;
}

export interface SessionRecord {
  id: string;
  schema: string;
  model: string;
  amendment_budget: number;
  turns: TurnRecord[];
}

export function isFailure(execution: ExecutionRecord): execution is ExecutionFailure {
  return "error" in execution;
}
