import { describe, expect, it } from "vitest";

import { queryDiff } from "../src/diff.js";
import { tokenize } from "../src/tokens.js";

const T1 = 'MATCH (p:Publication {name:"graphclust"})-[:HAS_AUTHOR]->(a:Author) RETURN a.name';
const T2 = "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author) RETURN a.name";

describe("queryDiff", () => {
  it("identical queries produce only keep entries", () => {
    const script = queryDiff(T1, T1);
    expect(script.every((entry) => entry.op === "keep")).toBe(true);
    expect(script.length).toBe(tokenize(T1).length);
  });

  it("empty to query is all insertions", () => {
    const script = queryDiff("", "MATCH (n) RETURN n");
    expect(script.every((entry) => entry.op === "ins")).toBe(true);
    expect(script.length).toBe(tokenize("MATCH (n) RETURN n").length);
  });

  it("label change shows as del/ins while quote style collapses to keep", () => {
    const script = queryDiff(T1, T2);
    const deleted = script.filter((e) => e.op === "del").map((e) => e.token);
    const inserted = script.filter((e) => e.op === "ins").map((e) => e.token);
    expect(deleted).toContain("Publication");
    expect(inserted).toContain("SoftwarePackage");
    // The quote-style-only difference canonicalizes away.
    const graphclust = script.filter((e) => e.token.includes("graphclust"));
    expect(graphclust).toHaveLength(1);
    expect(graphclust[0]!.op).toBe("keep");
    // Everything after the node pattern is untouched.
    const tail = script.slice(-6);
    expect(tail.every((e) => e.op === "keep")).toBe(true);
  });

  it("produces a minimal edit script (cost check against plain LCS)", () => {
    // Independent LCS by naive recursion over small token streams.
    function lcsLength(a: string[], b: string[]): number {
      const memo = new Map<string, number>();
      function go(i: number, j: number): number {
        if (i === a.length || j === b.length) return 0;
        const key = `${i},${j}`;
        const hit = memo.get(key);
        if (hit !== undefined) return hit;
        const value =
          a[i] === b[j] ? go(i + 1, j + 1) + 1 : Math.max(go(i + 1, j), go(i, j + 1));
        memo.set(key, value);
        return value;
      }
      return go(0, 0);
    }
    const samples: Array<[string, string]> = [
      [T1, T2],
      ["MATCH (n) RETURN n", "MATCH (n:Person) RETURN n.name"],
      ["RETURN 1", "RETURN 2"],
      ["MATCH (a)-[:R]->(b) RETURN a", "MATCH (a)<-[:R]-(b) RETURN b"],
    ];
    for (const [prev, next] of samples) {
      const a = tokenize(prev).map((t) => t.canonical);
      const b = tokenize(next).map((t) => t.canonical);
      const keeps = queryDiff(prev, next).filter((e) => e.op === "keep").length;
      expect(keeps).toBe(lcsLength(a, b));
      const edits = queryDiff(prev, next).filter((e) => e.op !== "keep").length;
      expect(edits).toBe(a.length + b.length - 2 * lcsLength(a, b));
    }
  });
});
