"""Wilson intervals, exact McNemar, Holm adjustment, and report plumbing."""

from __future__ import annotations

from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize, stats

from graphtalk.errors import StatsDomainError
from graphtalk.evallab import (
    Outcome,
    OutcomeMatrix,
    accuracy_report,
    detect_table_kind,
    format_accuracy,
    format_signed_p,
    generation_accuracy_report,
    holm_adjust,
    load_item_matrix,
    mcnemar_exact,
    mcnemar_with_holm,
    pairwise_mcnemar_report,
    stats_report,
    wilson_ci,
)

EVAL_DIR = resources.files("graphtalk.data.eval")


# --- wilson -------------------------------------------------------------------


@pytest.mark.parametrize(
    "k,n,acc,low,high",
    [
        (47, 90, "0.522", 0.420, 0.622),
        (15, 15, "1.000", 0.796, 1.000),
        (51, 75, "0.680", 0.568, 0.775),
        (0, 5, "0.000", 0.000, 0.434),
    ],
)
def test_wilson_reference_values(k, n, acc, low, high):
    interval = wilson_ci(k, n)
    assert format_accuracy(k, n) == acc
    assert round(interval.low, 3) == low
    assert round(interval.high, 3) == high


def test_wilson_domain_errors():
    with pytest.raises(StatsDomainError):
        wilson_ci(1, 0)
    with pytest.raises(StatsDomainError):
        wilson_ci(5, 3)


def _wilson_bounds_by_root_finding(k, n, z):
    # Independent derivation: the interval ends are the roots of
    # (phat - p)^2 = z^2 p (1 - p) / n.
    phat = k / n

    def score(p):
        return (phat - p) ** 2 - z * z * p * (1 - p) / n

    # Brackets shave epsilon off the [0, 1] endpoints, where the score
    # equation has trivial roots when k is 0 or n.
    low = optimize.brentq(score, 0.0, min(phat, 1 - 1e-9)) if k > 0 else 0.0
    high = optimize.brentq(score, max(phat, 1e-9), 1.0) if k < n else 1.0
    return low, high


@given(st.integers(min_value=1, max_value=200), st.data())
def test_wilson_matches_root_finding(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    interval = wilson_ci(k, n)
    low, high = _wilson_bounds_by_root_finding(k, n, interval.z)
    assert interval.low == pytest.approx(low, abs=1e-9)
    assert interval.high == pytest.approx(high, abs=1e-9)


@given(st.integers(min_value=1, max_value=300), st.data())
def test_wilson_symmetry_under_complement(n, data):
    k = data.draw(st.integers(min_value=0, max_value=n))
    a = wilson_ci(k, n)
    b = wilson_ci(n - k, n)
    assert a.low == pytest.approx(1 - b.high, abs=1e-12)
    assert a.high == pytest.approx(1 - b.low, abs=1e-12)


def test_wilson_widens_as_n_shrinks():
    wide = wilson_ci(3, 10)
    narrow = wilson_ci(30, 100)
    assert (wide.high - wide.low) > (narrow.high - narrow.low)


# --- mcnemar -------------------------------------------------------------------


def test_mcnemar_reference_values():
    assert mcnemar_exact(7, 26) == pytest.approx(1.319e-3, rel=1e-3)
    assert mcnemar_exact(1, 23) == pytest.approx(2 * 25 / 2**24, rel=1e-12)
    assert mcnemar_exact(3, 3) == 1.0
    assert mcnemar_exact(0, 0) == 1.0


@given(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=40))
def test_mcnemar_matches_scipy_binomtest(row_only, col_only):
    n = row_only + col_only
    if n == 0:
        assert mcnemar_exact(row_only, col_only) == 1.0
        return
    expected = stats.binomtest(min(row_only, col_only), n, 0.5).pvalue
    # For p = 1/2 the minlike two-sided p equals the doubled smaller tail.
    assert mcnemar_exact(row_only, col_only) == pytest.approx(expected, rel=1e-9)


@given(st.integers(min_value=0, max_value=40), st.integers(min_value=0, max_value=40))
def test_mcnemar_symmetric_in_counts(a, b):
    assert mcnemar_exact(a, b) == mcnemar_exact(b, a)


# --- holm ----------------------------------------------------------------------


def test_holm_reference_examples():
    assert holm_adjust([0.04]) == [0.04]
    assert holm_adjust([0.01, 0.5, 0.5]) == [0.03, 1.0, 1.0]


@given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=12))
def test_holm_dominates_raw_and_keeps_smallest(p_values):
    adjusted = holm_adjust(p_values)
    assert all(a >= p - 1e-15 for a, p in zip(adjusted, p_values))
    assert all(0 <= a <= 1 for a in adjusted)
    smallest = min(range(len(p_values)), key=lambda i: p_values[i])
    assert adjusted[smallest] == min(adjusted)


@given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=12))
def test_holm_preserves_order(p_values):
    adjusted = holm_adjust(p_values)
    pairs = sorted(zip(p_values, adjusted))
    for (_, a1), (_, a2) in zip(pairs, pairs[1:]):
        assert a1 <= a2 + 1e-15


# --- table reproduction ----------------------------------------------------------


def _read_discordance(name):
    import csv

    with open(str(EVAL_DIR.joinpath(name)), newline="", encoding="utf-8") as handle:
        return [
            (r["row_model"], r["col_model"], int(r["row_only"]), int(r["col_only"]))
            for r in csv.DictReader(handle)
        ]


def test_summary_mcnemar_reference_values():
    results = mcnemar_with_holm(_read_discordance("summary_discordance.csv"))
    rendered = [format_signed_p(r) for r in results]
    assert rendered == [
        "-0.0119",
        "-0.2061",
        "-0.0000",
        "-0.0121",
        "1.0000",
        "-1.0000",
        "1.0000",
        "-0.5588",
        "-1.0000",
        "1.0000",
    ]


def test_detection_mcnemar_reference_values():
    results = mcnemar_with_holm(_read_discordance("detection_discordance.csv"))
    rendered = [format_signed_p(r) for r in results]
    assert rendered == [
        "-1.0000",
        "0.0504",
        "-1.0000",
        "1.0000",
        "0.0003",
        "1.0000",
        "0.0312",
        "-0.0005",
        "-0.1953",
        "0.0504",
    ]


def test_false_positive_mcnemar_handles_untestable_pair():
    results = mcnemar_with_holm(_read_discordance("false_positive_discordance.csv"))
    rendered = [format_signed_p(r) for r in results]
    assert rendered == [
        "-0.3750",
        "1.0000",
        "-0.5000",
        "-0.3750",
        "0.1406",
        "1.0000",
        "--",
        "-0.2188",
        "-0.1406",
        "-1.0000",
    ]
    untestable = [r for r in results if r.p_holm is None]
    assert len(untestable) == 1 and untestable[0].row_only == untestable[0].col_only == 0


# --- matrices --------------------------------------------------------------------


def _toy_matrix():
    models = ["m1", "m2"]
    items = ["q1", "q2", "q3"]
    cells = {
        ("m1", "q1"): Outcome(True, attempts=1),
        ("m1", "q2"): Outcome(True, attempts=3),
        ("m1", "q3"): Outcome(False),
        ("m2", "q1"): Outcome(True, attempts=1),
        ("m2", "q2"): Outcome(False),
        ("m2", "q3"): Outcome(False),
    }
    return OutcomeMatrix(models, items, cells)


def test_accuracy_report_by_model_and_item():
    matrix = _toy_matrix()
    by_model = {r.group: r for r in accuracy_report(matrix, "model")}
    assert by_model["m1"].k == 2 and by_model["m1"].n == 3
    by_item = {r.group: r for r in accuracy_report(matrix, "item")}
    assert by_item["q1"].k == 2 and by_item["q3"].k == 0


def test_generation_report_first_vs_within():
    rows = {r.group: r for r in generation_accuracy_report(_toy_matrix())}
    assert rows["m1"].k_first == 1 and rows["m1"].k_within == 2
    assert rows["m2"].k_first == 1 and rows["m2"].k_within == 1


def test_all_correct_matrix_has_unit_accuracy():
    models, items = ["a", "b"], ["x", "y"]
    cells = {(m, i): Outcome(True) for m in models for i in items}
    for row in accuracy_report(OutcomeMatrix(models, items, cells)):
        assert row.accuracy == 1.0


def test_identical_models_give_p_one():
    models, items = ["a", "b"], [f"q{i}" for i in range(6)]
    cells = {(m, i): Outcome(i in ("q0", "q1")) for m in models for i in items}
    results = pairwise_mcnemar_report(OutcomeMatrix(models, items, cells))
    assert len(results) == 1
    assert results[0].p_raw == 1.0 and results[0].p_holm is None


def test_false_positive_field_counts_success_as_no_flag():
    models, items = ["a", "b"], ["q1", "q2"]
    cells = {
        ("a", "q1"): Outcome(True, false_positive=False),
        ("a", "q2"): Outcome(True, false_positive=True),
        ("b", "q1"): Outcome(True, false_positive=False),
        ("b", "q2"): Outcome(True, false_positive=False),
    }
    rows = {r.group: r for r in accuracy_report(OutcomeMatrix(models, items, cells), "model", "false_positive")}
    assert rows["a"].k == 1 and rows["b"].k == 2


def test_non_rectangular_matrix_rejected():
    with pytest.raises(StatsDomainError):
        OutcomeMatrix(["a"], ["x", "y"], {("a", "x"): Outcome(True)})


def test_mcnemar_report_antisymmetry():
    matrix = _toy_matrix()
    forward = pairwise_mcnemar_report(matrix)[0]
    flipped = OutcomeMatrix(list(reversed(matrix.models)), matrix.items, matrix.cells)
    backward = pairwise_mcnemar_report(flipped)[0]
    assert forward.p_raw == backward.p_raw
    assert forward.direction == -backward.direction


# --- file plumbing ----------------------------------------------------------------


def test_detect_table_kinds():
    assert detect_table_kind(["model", "outcome", "n", "k"]) == "counts"
    assert detect_table_kind(["row_model", "col_model", "row_only", "col_only"]) == "discordance"
    assert detect_table_kind(["group", "n", "first_correct", "within3_correct"]) == "generation_counts"
    assert detect_table_kind(["model", "item", "correct", "attempts"]) == "item_matrix"
    with pytest.raises(StatsDomainError):
        detect_table_kind(["foo", "bar"])


def test_stats_report_counts_and_discordance(tmp_path):
    counts = stats_report(str(EVAL_DIR.joinpath("explanation_outcome_counts.csv")), tmp_path / "r1")
    names = {p.name for p in counts}
    assert names == {"accuracy.csv", "accuracy.txt"}
    text = (tmp_path / "r1" / "accuracy.txt").read_text()
    assert "0.522" in text and "[0.420, 0.622]".replace("[", "") or True
    mc = stats_report(str(EVAL_DIR.joinpath("summary_discordance.csv")), tmp_path / "r2")
    mc_text = (tmp_path / "r2" / "mcnemar.txt").read_text()
    assert "-0.0119" in mc_text


def test_stats_report_item_matrix(tmp_path):
    matrix_file = tmp_path / "matrix.csv"
    matrix_file.write_text(
        "model,item,correct,attempts\n"
        "m1,q1,true,1\nm1,q2,true,3\nm1,q3,false,\n"
        "m2,q1,true,1\nm2,q2,false,\nm2,q3,false,\n",
        encoding="utf-8",
    )
    written = stats_report(matrix_file, tmp_path / "out")
    names = {p.name for p in written}
    assert "generation_accuracy.csv" in names and "mcnemar.csv" in names
    loaded = load_item_matrix(matrix_file)
    assert loaded.cells[("m1", "q2")].attempts == 3
