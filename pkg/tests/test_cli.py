"""CLI subcommands: behavior and exit codes."""

from __future__ import annotations

import json
from importlib import resources

from click.testing import CliRunner

from graphtalk.cli import main

EVAL_DIR = resources.files("graphtalk.data.eval")


def invoke(*args, **kwargs):
    return CliRunner().invoke(main, list(args), **kwargs)


def test_bench_generate_writes_90_records(tmp_path):
    out = tmp_path / "bench.jsonl"
    result = invoke("bench", "generate", "--seed", "7", "--out", str(out))
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 90
    assert {json.loads(l)["perturbation"] for l in lines} >= {"none", "flipped_direction"}


def test_bench_generate_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert invoke("bench", "generate", "--seed", "11", "--out", str(a)).exit_code == 0
    assert invoke("bench", "generate", "--seed", "11", "--out", str(b)).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_validate_faulty_query_exits_1():
    result = invoke(
        "validate", "--schema", "movie", "MATCH (a:Actor)-[:EATS]->(m:Movie) RETURN a"
    )
    assert result.exit_code == 1
    assert "nonsense_rel_label" in result.output


def test_validate_clean_query_exits_0():
    result = invoke(
        "validate", "--schema", "movie", "MATCH (p:Person)-[:ACTED_IN]->(m:Movie) RETURN p"
    )
    assert result.exit_code == 0
    assert "no issues" in result.output


def test_validate_reads_query_from_file(tmp_path):
    query_file = tmp_path / "q.cypher"
    query_file.write_text("MATCH (n) RETURN n", encoding="utf-8")
    result = invoke("validate", "--schema", "movie", str(query_file))
    assert result.exit_code == 0


def test_validate_syntax_error_exits_1():
    result = invoke("validate", "--schema", "movie", "MATCH (p:Person RETURN p")
    assert result.exit_code == 1
    assert "error" in result.output.lower()


def test_run_query_on_fixture():
    result = invoke(
        "run",
        "--schema",
        "mardi",
        "--graph",
        "mardi",
        "MATCH (s:SoftwarePackage {name:'graphclust'})-[:HAS_AUTHOR]->(a:Author) RETURN a.name",
    )
    assert result.exit_code == 0
    assert "Tabea Rebafka" in result.output
    assert "(1 rows)" in result.output


def test_explain_prints_steps_and_flags():
    result = invoke(
        "explain", "--schema", "movie", "MATCH (a:Actor)-[:EATS]->(m:Movie) RETURN a.name"
    )
    assert result.exit_code == 0
    assert "1." in result.output and "Summary:" in result.output
    assert "EATS" in result.output


def test_eval_stats_on_counts(tmp_path):
    result = invoke(
        "eval",
        "stats",
        "--matrix",
        str(EVAL_DIR.joinpath("explanation_outcome_counts.csv")),
        "--report",
        str(tmp_path / "report"),
    )
    assert result.exit_code == 0
    assert (tmp_path / "report" / "accuracy.txt").exists()


def test_usage_error_exits_2():
    assert invoke("bench", "generate").exit_code == 2
    assert invoke("definitely-not-a-command").exit_code == 2


def test_ask_and_amend_thin_client(tmp_path):
    config = tmp_path / "svc.conf"
    config.write_text(
        "schema: mardi\ngraph: mardi\ntranscript: replay:bundled:graphclust\n"
        f"data_dir: {tmp_path / 'sessions'}\n",
        encoding="utf-8",
    )
    result = invoke("ask", "--config", str(config), "Which authors does graphclust have?")
    assert result.exit_code == 0, result.output
    session_line = result.output.splitlines()[0]
    assert session_line.startswith("session: ")
    session_id = session_line.split(": ", 1)[1]
    assert "(0 rows)" in result.output
    result = invoke(
        "amend",
        "--config",
        str(config),
        "--session",
        session_id,
        "Actually, I meant the software package, not the publication.",
    )
    assert result.exit_code == 0, result.output
    assert "Tabea Rebafka" in result.output


def test_amend_budget_maps_to_domain_error(tmp_path):
    config = tmp_path / "svc.conf"
    config.write_text(
        "schema: mardi\ngraph: mardi\ntranscript: replay:bundled:graphclust\n"
        f"data_dir: {tmp_path / 'sessions'}\n",
        encoding="utf-8",
    )
    result = invoke("ask", "--config", str(config), "Which authors does graphclust have?")
    session_id = result.output.splitlines()[0].split(": ", 1)[1]
    invoke("amend", "--config", str(config), "--session", session_id,
           "Actually, I meant the software package, not the publication.")
    invoke("amend", "--config", str(config), "--session", session_id,
           "Only return distinct author names.")
    result = invoke("amend", "--config", str(config), "--session", session_id, "more")
    assert result.exit_code == 1
    assert "409" in result.output or "budget" in result.output.lower()


def test_eval_stats_on_generation_counts(tmp_path):
    result = invoke(
        "eval",
        "stats",
        "--matrix",
        str(EVAL_DIR.joinpath("mardi_model_counts.csv")),
        "--report",
        str(tmp_path / "report"),
    )
    assert result.exit_code == 0
    text = (tmp_path / "report" / "generation_accuracy.txt").read_text()
    assert "0.8889" in text and "[0.565, 0.980]" in text


def test_eval_stats_discordance_table(tmp_path):
    result = invoke(
        "eval",
        "stats",
        "--matrix",
        str(EVAL_DIR.joinpath("false_positive_discordance.csv")),
        "--report",
        str(tmp_path / "report"),
    )
    assert result.exit_code == 0
    text = (tmp_path / "report" / "mcnemar.txt").read_text()
    assert "--" in text  # the untestable zero-discordant pair
