# src/minctx/core/evaluation.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

from scipy.stats import binom

from minctx.core.value_object import AnimacyLabel, ConfigError, DimensionError

MARKS = ("*", "†", "‡", "§", "¶")


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    n: int
    correct: Dict[AnimacyLabel, int]
    total: Dict[AnimacyLabel, int]

    def recall(self, label: AnimacyLabel) -> float:
        return self.correct[label] / self.total[label] if self.total[label] else 0.0


def accuracy(preds: Sequence[AnimacyLabel], golds: Sequence[AnimacyLabel]) -> EvalReport:
    if len(preds) != len(golds):
        raise DimensionError(f"{len(preds)} predictions for {len(golds)} gold labels")
    if not golds:
        raise DimensionError("cannot score an empty test set")
    correct = {label: 0 for label in AnimacyLabel}
    total = {label: 0 for label in AnimacyLabel}
    for p, g in zip(preds, golds):
        total[g] += 1
        if p is g:
            correct[g] += 1
    return EvalReport(sum(correct.values()) / len(golds), len(golds), correct, total)


def discordant(preds_a: Sequence[AnimacyLabel], preds_b: Sequence[AnimacyLabel], golds: Sequence[AnimacyLabel]):
    """(n01, n10): items only A gets right, items only B gets right."""
    if not (len(preds_a) == len(preds_b) == len(golds)):
        raise DimensionError("prediction vectors and gold labels differ in length")
    n01 = n10 = 0
    for a, b, g in zip(preds_a, preds_b, golds):
        if a is g and b is not g:
            n01 += 1
        elif b is g and a is not g:
            n10 += 1
    return n01, n10


def mcnemar_from_counts(n01: int, n10: int) -> float:
    """Exact two-sided binomial McNemar p-value on the discordant pairs."""
    n = n01 + n10
    if n == 0:
        return 1.0
    return float(min(1.0, 2.0 * binom.cdf(min(n01, n10), n, 0.5)))


def mcnemar(preds_a: Sequence[AnimacyLabel], preds_b: Sequence[AnimacyLabel], golds: Sequence[AnimacyLabel]) -> float:
    return mcnemar_from_counts(*discordant(preds_a, preds_b, golds))


@dataclass
class SystemResult:
    name: str
    report: EvalReport
    preds: List[AnimacyLabel]
    marks: str = ""
    p_values: Dict[str, float] = field(default_factory=dict)


def compare_systems(
    results: Sequence[SystemResult],
    golds: Sequence[AnimacyLabel],
    references: Sequence[str],
    alpha: float = 0.05,
) -> List[SystemResult]:
    """
    Assign one mark per reference system to every system whose accuracy
    is lower than the reference and significantly so (p < alpha).
    """
    if len(references) > len(MARKS):
        raise ConfigError(f"at most {len(MARKS)} reference systems are supported")
    by_name: Mapping[str, SystemResult] = {r.name: r for r in results}
    for ref in references:
        if ref not in by_name:
            raise ConfigError(f"unknown reference system {ref!r}")
    for res in results:
        marks = []
        for mark, ref in zip(MARKS, references):
            if ref == res.name:
                continue
            other = by_name[ref]
            p = mcnemar(res.preds, other.preds, golds)
            res.p_values[ref] = p
            if p < alpha and res.report.accuracy < other.report.accuracy:
                marks.append(mark)
        res.marks = "".join(marks)
    return list(results)


def format_table(results: Sequence[SystemResult], references: Sequence[str], alpha: float) -> str:
    width = max([len("representation")] + [len(r.name) for r in results])
    lines = [f"{'representation':<{width}}  accuracy", "-" * (width + 10)]
    for res in results:
        lines.append(f"{res.name:<{width}}  {res.report.accuracy:.3f}{res.marks}")
    for mark, ref in zip(MARKS, references):
        lines.append(f"{mark} significantly lower than {ref} (exact McNemar, p < {alpha:g})")
    return "\n".join(lines) + "\n"


def format_tsv(results: Sequence[SystemResult]) -> str:
    header = "system\taccuracy\tn\tanimate_correct\tanimate_total\tinanimate_correct\tinanimate_total\tmarks"
    rows = [header]
    a, i = AnimacyLabel.ANIMATE, AnimacyLabel.INANIMATE
    for res in results:
        r = res.report
        rows.append(
            f"{res.name}\t{r.accuracy:.6f}\t{r.n}\t{r.correct[a]}\t{r.total[a]}\t{r.correct[i]}\t{r.total[i]}\t{res.marks}"
        )
    return "\n".join(rows) + "\n"


__all__ = [
    "MARKS",
    "EvalReport",
    "SystemResult",
    "accuracy",
    "discordant",
    "mcnemar",
    "mcnemar_from_counts",
    "compare_systems",
    "format_table",
    "format_tsv",
]
