// Minimal token-level edit script between two queries, computed over the
// canonical token stream so quote style and keyword case differences
// collapse to "keep".

import { Token, tokenize } from "./tokens.js";

export type DiffOp = "keep" | "ins" | "del";

export interface DiffEntry {
  op: DiffOp;
  token: string;
}

export function diffTokens(prev: Token[], next: Token[]): DiffEntry[] {
  const n = prev.length;
  const m = next.length;
  // Longest-common-subsequence table over canonical token text.
  const lcs: number[][] = Array.from({ length: n + 1 }, () => new Array(m + 1).fill(0));
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      if (prev[i]!.canonical === next[j]!.canonical) {
        lcs[i]![j] = lcs[i + 1]![j + 1]! + 1;
      } else {
        lcs[i]![j] = Math.max(lcs[i + 1]![j]!, lcs[i]![j + 1]!);
      }
    }
  }
  const script: DiffEntry[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (prev[i]!.canonical === next[j]!.canonical) {
      script.push({ op: "keep", token: next[j]!.text });
      i += 1;
      j += 1;
    } else if (lcs[i + 1]![j]! >= lcs[i]![j + 1]!) {
      script.push({ op: "del", token: prev[i]!.text });
      i += 1;
    } else {
      script.push({ op: "ins", token: next[j]!.text });
      j += 1;
    }
  }
  for (; i < n; i++) script.push({ op: "del", token: prev[i]!.text });
  for (; j < m; j++) script.push({ op: "ins", token: next[j]!.text });
  return script;
}

export function queryDiff(prev: string, next: string): DiffEntry[] {
  return diffTokens(tokenize(prev), tokenize(next));
}
