"""Scoring and paired statistics for model comparisons.

Wilson score intervals, exact two-sided McNemar tests on discordant
pairs, and Holm step-down adjustment, plus ingestion/report plumbing for
count tables, discordance tables, and item-level outcome matrices.

Conventions pinned here because the reported numbers depend on them:
``z = 1.959964`` everywhere; the two-sided exact p doubles the smaller
binomial tail and clamps at 1; a pair with zero discordant items gets no
test (reported as ``--``) and is excluded from the Holm family.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import StatsDomainError

Z_DEFAULT = 1.959964


@dataclass(frozen=True)
class WilsonInterval:
    point: float
    low: float
    high: float
    n: int
    k: int
    z: float = Z_DEFAULT


def wilson_ci(k: int, n: int, z: float = Z_DEFAULT) -> WilsonInterval:
    """Wilson score interval for k successes out of n, clamped to [0, 1]."""
    if n <= 0:
        raise StatsDomainError("wilson_ci requires n > 0")
    if not 0 <= k <= n:
        raise StatsDomainError(f"wilson_ci requires 0 <= k <= n, got k={k}, n={n}")
    phat = k / n
    z2 = z * z
    denominator = 1 + z2 / n
    center = (phat + z2 / (2 * n)) / denominator
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denominator
    return WilsonInterval(
        point=phat,
        low=max(0.0, center - half),
        high=min(1.0, center + half),
        n=n,
        k=k,
        z=z,
    )


def mcnemar_exact(row_only: int, col_only: int) -> float:
    """Exact two-sided binomial p over the discordant pairs.

    min(1, 2 * P(X <= min(row_only, col_only))) for X ~ Binomial(n, 1/2);
    1.0 when there are no discordant pairs.
    """
    if row_only < 0 or col_only < 0:
        raise StatsDomainError("discordant counts must be non-negative")
    n = row_only + col_only
    if n == 0:
        return 1.0
    smaller = min(row_only, col_only)
    tail = sum(math.comb(n, i) for i in range(smaller + 1))
    p = Fraction(2 * tail, 2**n)
    return float(min(p, Fraction(1)))


def holm_adjust(p_values: Sequence[float]) -> List[float]:
    """Holm step-down adjustment, returned in input order."""
    for p in p_values:
        if not 0 <= p <= 1:
            raise StatsDomainError(f"p-value out of range: {p}")
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, index in enumerate(order):
        running = max(running, (m - rank) * p_values[index])
        adjusted[index] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class McNemarResult:
    row_model: str
    col_model: str
    row_only: int
    col_only: int
    p_raw: float
    p_holm: Optional[float]  # None when the pair has no discordant items
    direction: int  # sign of (row_only - col_only)


def mcnemar_with_holm(
    discordances: Sequence[Tuple[str, str, int, int]]
) -> List[McNemarResult]:
    """Run every pairwise test and Holm-adjust across the testable pairs."""
    raw: List[Optional[float]] = []
    for _, _, row_only, col_only in discordances:
        raw.append(mcnemar_exact(row_only, col_only) if row_only + col_only > 0 else None)
    testable = [p for p in raw if p is not None]
    adjusted_iter = iter(holm_adjust(testable))
    results = []
    for (row_model, col_model, row_only, col_only), p_raw in zip(discordances, raw):
        if p_raw is None:
            results.append(
                McNemarResult(row_model, col_model, row_only, col_only, 1.0, None, 0)
            )
        else:
            direction = (row_only > col_only) - (row_only < col_only)
            results.append(
                McNemarResult(
                    row_model, col_model, row_only, col_only, p_raw, next(adjusted_iter), direction
                )
            )
    return results


# --- outcome matrices ---------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    correct: bool
    attempts: Optional[int] = None  # 1 | 2 | 3, generation experiments only
    flags_correct: Optional[bool] = None
    false_positive: Optional[bool] = None
    year_omitted: Optional[bool] = None


@dataclass
class OutcomeMatrix:
    models: List[str]
    items: List[str]
    cells: Dict[Tuple[str, str], Outcome]

    def __post_init__(self):
        missing = [
            (m, i) for m in self.models for i in self.items if (m, i) not in self.cells
        ]
        if missing:
            raise StatsDomainError(f"matrix is not rectangular; missing {missing[:3]}...")

    def success(self, model: str, item: str, field: str) -> Optional[bool]:
        cell = self.cells[(model, item)]
        if field == "correct":
            return cell.correct
        if field == "flags_correct":
            return cell.flags_correct
        if field == "false_positive":
            # Success means the model did NOT flag a clean query.
            return None if cell.false_positive is None else not cell.false_positive
        if field == "first_try":
            return cell.correct and cell.attempts == 1
        raise StatsDomainError(f"unknown outcome field {field!r}")


@dataclass(frozen=True)
class AccuracyRow:
    group: str
    n: int
    k: int
    accuracy: float
    interval: WilsonInterval


@dataclass(frozen=True)
class GenerationAccuracyRow:
    group: str
    n: int
    k_first: int
    first_interval: WilsonInterval
    k_within: int
    within_interval: WilsonInterval


def accuracy_report(
    matrix: OutcomeMatrix, group_by: str = "model", outcome_field: str = "correct"
) -> List[AccuracyRow]:
    """One accuracy row per model (or per item) with its Wilson interval."""
    if group_by not in ("model", "item"):
        raise StatsDomainError("group_by must be 'model' or 'item'")
    groups = matrix.models if group_by == "model" else matrix.items
    rows = []
    for group in groups:
        n = k = 0
        for other in matrix.items if group_by == "model" else matrix.models:
            pair = (group, other) if group_by == "model" else (other, group)
            success = matrix.success(pair[0], pair[1], outcome_field)
            if success is None:
                continue
            n += 1
            k += int(success)
        if n == 0:
            continue
        rows.append(AccuracyRow(group, n, k, k / n, wilson_ci(k, n)))
    return rows


def generation_accuracy_report(
    matrix: OutcomeMatrix, group_by: str = "model"
) -> List[GenerationAccuracyRow]:
    """First-attempt and within-three-attempts accuracies side by side."""
    first = {r.group: r for r in accuracy_report(matrix, group_by, "first_try")}
    within = {r.group: r for r in accuracy_report(matrix, group_by, "correct")}
    rows = []
    for group, first_row in first.items():
        within_row = within[group]
        rows.append(
            GenerationAccuracyRow(
                group,
                first_row.n,
                first_row.k,
                first_row.interval,
                within_row.k,
                within_row.interval,
            )
        )
    return rows


def pairwise_mcnemar_report(
    matrix: OutcomeMatrix, outcome_field: str = "correct"
) -> List[McNemarResult]:
    """Exact McNemar over every unordered model pair, Holm across the family."""
    if len(matrix.models) < 2:
        raise StatsDomainError("pairwise comparison needs at least two models")
    discordances = []
    for i, row_model in enumerate(matrix.models):
        for col_model in matrix.models[i + 1 :]:
            row_only = col_only = 0
            for item in matrix.items:
                a = matrix.success(row_model, item, outcome_field)
                b = matrix.success(col_model, item, outcome_field)
                if a is None or b is None:
                    continue
                if a and not b:
                    row_only += 1
                elif b and not a:
                    col_only += 1
            discordances.append((row_model, col_model, row_only, col_only))
    return mcnemar_with_holm(discordances)


# --- formatting ----------------------------------------------------------------


def format_accuracy(k: int, n: int, decimals: int = 3) -> str:
    """Truncated (not rounded) accuracy, matching the explanation tables."""
    scale = 10**decimals
    truncated = (scale * k) // n
    return f"{truncated / scale:.{decimals}f}"


def format_interval(interval: WilsonInterval, decimals: int = 3) -> str:
    return f"[{interval.low:.{decimals}f}, {interval.high:.{decimals}f}]"


def format_signed_p(result: McNemarResult, decimals: int = 4) -> str:
    if result.p_holm is None:
        return "--"
    sign = "-" if result.direction < 0 else ""
    return f"{sign}{result.p_holm:.{decimals}f}"


# --- file ingestion and report emission -----------------------------------------


def _read_csv(path: Union[str, Path]) -> Tuple[List[str], List[dict]]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        return list(reader.fieldnames or []), list(reader)


def detect_table_kind(header: Sequence[str]) -> str:
    columns = set(header)
    if {"model", "outcome", "n", "k"} <= columns:
        return "counts"
    if {"row_model", "col_model", "row_only", "col_only"} <= columns:
        return "discordance"
    if {"group", "n", "first_correct", "within3_correct"} <= columns:
        return "generation_counts"
    if {"model", "item", "correct"} <= columns:
        return "item_matrix"
    raise StatsDomainError(f"unrecognized table header: {header}")


def load_item_matrix(path: Union[str, Path]) -> OutcomeMatrix:
    _, rows = _read_csv(path)
    models: List[str] = []
    items: List[str] = []
    cells: Dict[Tuple[str, str], Outcome] = {}

    def flag(row: dict, name: str) -> Optional[bool]:
        raw = row.get(name, "")
        if raw is None or raw == "":
            return None
        return raw.strip().lower() in ("1", "true", "yes")

    for row in rows:
        model, item = row["model"], row["item"]
        if model not in models:
            models.append(model)
        if item not in items:
            items.append(item)
        attempts = row.get("attempts", "")
        cells[(model, item)] = Outcome(
            correct=bool(flag(row, "correct")),
            attempts=int(attempts) if attempts else None,
            flags_correct=flag(row, "flags_correct"),
            false_positive=flag(row, "false_positive"),
            year_omitted=flag(row, "year_omitted"),
        )
    return OutcomeMatrix(models, items, cells)


def stats_report(matrix_path: Union[str, Path], report_dir: Union[str, Path]) -> List[Path]:
    """Ingest one table file, write CSV and aligned-text reports, and
    return the written paths."""
    header, rows = _read_csv(matrix_path)
    kind = detect_table_kind(header)
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    if kind == "counts":
        out_rows = []
        for row in rows:
            n, k = int(row["n"]), int(row["k"])
            interval = wilson_ci(k, n)
            out_rows.append(
                {
                    "model": row["model"],
                    "outcome": row["outcome"],
                    "n": n,
                    "k": k,
                    "acc": format_accuracy(k, n),
                    "ci_low": f"{interval.low:.3f}",
                    "ci_high": f"{interval.high:.3f}",
                }
            )
        written.append(_write_csv(report_dir / "accuracy.csv", out_rows))
        written.append(_write_text(report_dir / "accuracy.txt", out_rows))
    elif kind == "discordance":
        discordances = [
            (row["row_model"], row["col_model"], int(row["row_only"]), int(row["col_only"]))
            for row in rows
        ]
        results = mcnemar_with_holm(discordances)
        out_rows = [
            {
                "row_model": r.row_model,
                "col_model": r.col_model,
                "row_only": r.row_only,
                "col_only": r.col_only,
                "p_raw": f"{r.p_raw:.6g}",
                "p_holm": "" if r.p_holm is None else f"{r.p_holm:.4f}",
                "adjusted": format_signed_p(r),
            }
            for r in results
        ]
        written.append(_write_csv(report_dir / "mcnemar.csv", out_rows))
        written.append(_write_text(report_dir / "mcnemar.txt", out_rows))
    elif kind == "generation_counts":
        out_rows = []
        for row in rows:
            n = int(row["n"])
            k_first, k_within = int(row["first_correct"]), int(row["within3_correct"])
            first, within = wilson_ci(k_first, n), wilson_ci(k_within, n)
            out_rows.append(
                {
                    "group": row["group"],
                    "n": n,
                    "first_correct": k_first,
                    "first_acc": f"{k_first / n:.4f}",
                    "first_ci": format_interval(first),
                    "within3_correct": k_within,
                    "within3_acc": f"{k_within / n:.4f}",
                    "within3_ci": format_interval(within),
                }
            )
        written.append(_write_csv(report_dir / "generation_accuracy.csv", out_rows))
        written.append(_write_text(report_dir / "generation_accuracy.txt", out_rows))
    else:
        matrix = load_item_matrix(matrix_path)
        has_attempts = any(c.attempts is not None for c in matrix.cells.values())
        if has_attempts:
            out_rows = [
                {
                    "group": r.group,
                    "n": r.n,
                    "first_correct": r.k_first,
                    "first_acc": f"{r.k_first / r.n:.4f}",
                    "first_ci": format_interval(r.first_interval),
                    "within3_correct": r.k_within,
                    "within3_acc": f"{r.k_within / r.n:.4f}",
                    "within3_ci": format_interval(r.within_interval),
                }
                for r in generation_accuracy_report(matrix)
            ]
            written.append(_write_csv(report_dir / "generation_accuracy.csv", out_rows))
            written.append(_write_text(report_dir / "generation_accuracy.txt", out_rows))
        else:
            out_rows = [
                {
                    "model": r.group,
                    "outcome": "correct",
                    "n": r.n,
                    "k": r.k,
                    "acc": format_accuracy(r.k, r.n),
                    "ci_low": f"{r.interval.low:.3f}",
                    "ci_high": f"{r.interval.high:.3f}",
                }
                for r in accuracy_report(matrix)
            ]
            written.append(_write_csv(report_dir / "accuracy.csv", out_rows))
            written.append(_write_text(report_dir / "accuracy.txt", out_rows))
        mc_rows = [
            {
                "row_model": r.row_model,
                "col_model": r.col_model,
                "row_only": r.row_only,
                "col_only": r.col_only,
                "p_raw": f"{r.p_raw:.6g}",
                "p_holm": "" if r.p_holm is None else f"{r.p_holm:.4f}",
                "adjusted": format_signed_p(r),
            }
            for r in pairwise_mcnemar_report(matrix)
        ]
        written.append(_write_csv(report_dir / "mcnemar.csv", mc_rows))
        written.append(_write_text(report_dir / "mcnemar.txt", mc_rows))
    return written


def _write_csv(path: Path, rows: List[dict]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    return path


def _write_text(path: Path, rows: List[dict]) -> Path:
    columns = list(rows[0].keys())
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in columns}
    lines = ["  ".join(c.ljust(widths[c]) for c in columns)]
    lines.append("  ".join("-" * widths[c] for c in columns))
    for row in rows:
        lines.append("  ".join(str(row[c]).ljust(widths[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
