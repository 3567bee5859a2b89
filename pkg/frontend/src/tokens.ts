// Client-side mirror of the server lexer's token stream, used only for
// syntax highlighting and token diffs; the server owns all semantics.

export type TokenKind =
  | "keyword"
  | "ident"
  | "string"
  | "number"
  | "punct";

export interface Token {
  kind: TokenKind;
  text: string; // as written
  canonical: string; // normalized for diffing (quote style, keyword case)
}

const KEYWORDS = new Set([
  "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "DISTINCT", "ORDER", "BY",
  "ASC", "ASCENDING", "DESC", "DESCENDING", "LIMIT", "AS", "AND", "OR", "NOT",
  "CONTAINS", "IS", "NULL", "TRUE", "FALSE", "CASE", "WHEN", "THEN", "ELSE",
  "END", "COUNT", "COLLECT", "SUM",
]);

const TWO_CHAR = ["<=", ">=", "<>", "<-", "->"];
const ONE_CHAR = "(){}[],.:;*/+-=<>";

const ESCAPES: Record<string, string> = {
  "\\": "\\",
  "'": "'",
  '"': '"',
  n: "\n",
  t: "\t",
  r: "\r",
};

function canonicalString(value: string): string {
  const escaped = value.replace(/\\/g, "\\\\").replace(/"/g, '\\"');
  return `"${escaped}"`;
}

export function tokenize(source: string): Token[] {
  const tokens: Token[] = [];
  let i = 0;
  while (i < source.length) {
    const ch = source[i]!;
    if (/\s/.test(ch)) {
      i += 1;
      continue;
    }
    const pair = source.slice(i, i + 2);
    if (TWO_CHAR.includes(pair)) {
      tokens.push({ kind: "punct", text: pair, canonical: pair });
      i += 2;
      continue;
    }
    if (ONE_CHAR.includes(ch)) {
      tokens.push({ kind: "punct", text: ch, canonical: ch });
      i += 1;
      continue;
    }
    if (ch === "'" || ch === '"') {
      const start = i;
      i += 1;
      let value = "";
      while (i < source.length && source[i] !== ch) {
        if (source[i] === "\\" && i + 1 < source.length) {
          const escape = source[i + 1]!;
          value += ESCAPES[escape] ?? escape;
          i += 2;
        } else {
          value += source[i];
          i += 1;
        }
      }
      i += 1; // closing quote (or end of input on unterminated strings)
      tokens.push({
        kind: "string",
        text: source.slice(start, i),
        canonical: canonicalString(value),
      });
      continue;
    }
    if (/[0-9]/.test(ch)) {
      const match = /^[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?/.exec(source.slice(i))!;
      tokens.push({ kind: "number", text: match[0], canonical: match[0] });
      i += match[0].length;
      continue;
    }
    if (/[A-Za-z_]/.test(ch)) {
      const match = /^[A-Za-z0-9_]+/.exec(source.slice(i))!;
      const upper = match[0].toUpperCase();
      const isKeyword = KEYWORDS.has(upper);
      tokens.push({
        kind: isKeyword ? "keyword" : "ident",
        text: match[0],
        canonical: isKeyword ? upper : match[0],
      });
      i += match[0].length;
      continue;
    }
    // Unknown character: keep it visible rather than dropping it.
    tokens.push({ kind: "punct", text: ch, canonical: ch });
    i += 1;
  }
  return tokens;
}
