#!/usr/bin/env python3
"""Regenerate the bundled replay transcripts.

The responses below were frozen once and are treated as recordings; the
prompts are rendered through the same code path live sessions use, so
replay lookups always hit. Rerunning the script is byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

from graphtalk.llm import Exchange, fingerprint, load_template, render_prompt
from graphtalk.schema import load_preset, schema_prompt_block

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "graphtalk" / "data" / "transcripts"

RECORDED_AT = "2025-06-02T00:00:00+00:00"

T1_RAW = (
    "```cypher\n"
    'MATCH (p:Publication {name:"graphclust"})-[:HAS_AUTHOR]->(a:Author)\n'
    "RETURN a.name;\n"
    "```"
)

T2_RAW = (
    "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author)\n"
    "RETURN a.name;"
)

T3_RAW = (
    "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author)\n"
    "RETURN DISTINCT a.name;"
)

TOP_AUTHORS_FLIPPED_RAW = (
    "<think>The schema links software packages to authors, so count per author "
    "and keep the ten largest.</think>\n"
    "MATCH (a:Author)-[:HAS_AUTHOR]->(s:SoftwarePackage)\n"
    "RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10"
)

TOP_AUTHORS_FIXED_RAW = (
    "MATCH (s:SoftwarePackage)-[:HAS_AUTHOR]->(a:Author)\n"
    "RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10"
)

HYENA_PROPORTION_RAW = (
    "MATCH (cub:Hyena)-[:HAS_FATHER]->(dad:Hyena)\n"
    "OPTIONAL MATCH (dad)-[:BIRTH_CLAN]->(bc:Clan)\n"
    "OPTIONAL MATCH (dad)-[:CURRENT_CLAN]->(cc:Clan)\n"
    "WITH COUNT(cub) AS totalCubs,\n"
    "SUM(CASE WHEN dad.sex = 'male' AND bc = cc THEN 1 ELSE 0 END) AS philopatCubs\n"
    "RETURN philopatCubs * 1.0 / totalCubs AS proportion"
)

ALICE_QUERY = 'MATCH (p:Person {name: "Alice"})-[:ACTED_IN]->(m:Movie) RETURN p, m'

ALICE_EXPLANATION_RAW = """1. Locate the Person node whose name property equals "Alice".
2. Follow outgoing ACTED_IN relationships from that node to connected Movie nodes.
3. Return both the Person node and each matching Movie node.

In short, this lists Alice together with every movie she acted in. The labels,
the ACTED_IN relationship, and its direction all fit the schema, so nothing
about the query looks wrong."""

EATS_QUERY = "MATCH (a:Actor)-[:EATS]->(m:Movie) RETURN a.name, m.title"

EATS_EXPLANATION_RAW = """1. Locate every node labeled Actor.
2. Follow outgoing EATS relationships to nodes labeled Movie.
3. Return the actor names and movie titles.

Overall the query tries to pair actors with movies through an EATS
relationship. That relationship name does not make sense here: an actor
cannot eat a movie, so the relationship label looks wrong."""


def exchange(prompt: str, response: str, model: str) -> Exchange:
    return Exchange(fingerprint(prompt), prompt, response, RECORDED_AT, model)


def write(path: Path, exchanges: list[Exchange]) -> None:
    lines = [json.dumps(e.to_json(), ensure_ascii=False) for e in exchanges]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path} ({len(exchanges)} exchanges)")


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    mardi_block = schema_prompt_block(load_preset("mardi"))
    generation = load_template("generation")
    amendment = load_template("amendment")
    explanation = load_template("explanation")

    # Two-turn graphclust dialogue plus one more amendment for budget tests.
    question = "Which authors does graphclust have?"
    ask_prompt = render_prompt(generation, {"schema": mardi_block, "question": question})
    amend1_prompt = render_prompt(
        amendment,
        {
            "question": question,
            "current_query": (
                'MATCH (p:Publication {name:"graphclust"})-[:HAS_AUTHOR]->(a:Author)\n'
                "RETURN a.name"
            ),
            "schema": mardi_block,
            "amendment": "Actually, I meant the software package, not the publication.",
        },
    )
    amend2_prompt = render_prompt(
        amendment,
        {
            "question": question,
            "current_query": (
                "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author)\n"
                "RETURN a.name"
            ),
            "schema": mardi_block,
            "amendment": "Only return distinct author names.",
        },
    )
    write(
        OUT_DIR / "graphclust.jsonl",
        [
            exchange(ask_prompt, T1_RAW, "recorded-chat-model"),
            exchange(amend1_prompt, T2_RAW, "recorded-chat-model"),
            exchange(amend2_prompt, T3_RAW, "recorded-chat-model"),
        ],
    )

    # Flipped-direction generation and its repair amendment.
    question = "Which are the ten authors that created the most software packages?"
    ask_prompt = render_prompt(generation, {"schema": mardi_block, "question": question})
    fix_prompt = render_prompt(
        amendment,
        {
            "question": question,
            "current_query": (
                "MATCH (a:Author)-[:HAS_AUTHOR]->(s:SoftwarePackage)\n"
                "RETURN a.name, COUNT(s) AS packageCount ORDER BY packageCount DESC LIMIT 10"
            ),
            "schema": mardi_block,
            "amendment": "The has_author relationship is the wrong way around.",
        },
    )
    write(
        OUT_DIR / "mardi_amend.jsonl",
        [
            exchange(ask_prompt, TOP_AUTHORS_FLIPPED_RAW, "recorded-chat-model"),
            exchange(fix_prompt, TOP_AUTHORS_FIXED_RAW, "recorded-chat-model"),
        ],
    )

    # Direct hit on the top-authors question (no amendment needed).
    ask_prompt = render_prompt(
        generation,
        {
            "schema": mardi_block,
            "question": "Which are the ten authors that created the most software packages?",
        },
    )
    write(
        OUT_DIR / "mardi_top_authors.jsonl",
        [exchange(ask_prompt, "```cypher\n" + TOP_AUTHORS_FIXED_RAW + "\n```", "recorded-chat-model")],
    )

    # Hyena-domain generation (exercises the sexes-aware prompt variant).
    hyena_block = schema_prompt_block(load_preset("hyena"))
    hyena_question = "What is the proportion of cubs that were sired by philopatric males?"
    hyena_prompt = render_prompt(
        load_template("hyena_generation"),
        {"schema": hyena_block, "question": hyena_question},
    )
    write(
        OUT_DIR / "hyena_philopatric.jsonl",
        [exchange(hyena_prompt, HYENA_PROPORTION_RAW, "recorded-chat-model")],
    )

    # Explanation responses for parser tests.
    write(
        OUT_DIR / "explanations.jsonl",
        [
            exchange(
                render_prompt(explanation, {"query": ALICE_QUERY}),
                ALICE_EXPLANATION_RAW,
                "recorded-chat-model",
            ),
            exchange(
                render_prompt(explanation, {"query": EATS_QUERY}),
                EATS_EXPLANATION_RAW,
                "recorded-chat-model",
            ),
        ],
    )


if __name__ == "__main__":
    main()
