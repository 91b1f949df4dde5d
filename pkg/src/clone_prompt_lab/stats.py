"""Confusion metrics, F1 deltas, significance tests, and agreement stats.

Clone is the positive class throughout. Ratios with zero denominators are
reported as ``None`` (undefined), never silently coerced to 0: a fake zero
would flow into F1 deltas and corrupt every comparison built on them.
Fractions are kept at full precision internally; report rendering rounds
to two decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus.types import Label
from .verdicts import VerdictRecord

SIGNIFICANCE_THRESHOLD = 0.05


class UndefinedF1Error(ValueError):
    pass


class LengthMismatchError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


class PairIdMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    precision: float | None
    recall: float | None
    accuracy: float | None
    f1: float | None
    delta_f1_points: float | None = None
    p_value: float | None = None


@dataclass(frozen=True)
class ShiftCounts:
    wrong_to_right: int
    right_to_wrong: int


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p_value: float


@dataclass(frozen=True)
class McNemarResult:
    only_b_correct: int
    only_a_correct: int
    p_value: float


def confusion(verdicts: Sequence[VerdictRecord]) -> ConfusionCounts:
    """Tally confusion counts; unparsed verdicts must be excluded upstream."""
    tp = fp = tn = fn = 0
    for verdict in verdicts:
        if verdict.predicted is None:
            raise ValueError(
                f"pair {verdict.pair_id}: unparsed verdict reached confusion counting"
            )
        if verdict.predicted is Label.CLONE:
            if verdict.gold is Label.CLONE:
                tp += 1
            else:
                fp += 1
        else:
            if verdict.gold is Label.NOT_CLONE:
                tn += 1
            else:
                fn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics(c: ConfusionCounts) -> MetricSet:
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else None
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    accuracy = (c.tp + c.tn) / c.total if c.total else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricSet(precision=precision, recall=recall, accuracy=accuracy, f1=f1)


def f1_from_percentages(precision_pct: float, recall_pct: float) -> float:
    """Harmonic mean of rounded percentage inputs, as a percentage."""
    if precision_pct + recall_pct == 0:
        raise UndefinedF1Error("precision and recall are both zero")
    return 2 * precision_pct * recall_pct / (precision_pct + recall_pct)


def delta_f1(run: MetricSet, baseline: MetricSet) -> float:
    """F1 change in percentage points (positive means the run improved)."""
    if run.f1 is None or baseline.f1 is None:
        raise UndefinedF1Error("delta requires both F1 scores to be defined")
    return (run.f1 - baseline.f1) * 100.0


def _check_paired(a: Sequence[int], b: Sequence[int], minimum: int) -> None:
    if len(a) != len(b):
        raise LengthMismatchError(f"vectors differ in length: {len(a)} vs {len(b)}")
    if len(a) < minimum:
        raise DegenerateInputError(f"need at least {minimum} paired observations, got {len(a)}")


def paired_t_test(correct_a: Sequence[int], correct_b: Sequence[int]) -> TTestResult:
    """Two-sided paired t-test over per-instance correctness differences.

    d_i = b_i - a_i; t = mean(d) / (sd(d) / sqrt(n)) with sample sd; df = n-1.
    All-zero differences report t=0, p=1; zero variance with nonzero mean is
    a categorical improvement/regression and reports p=0.
    """
    _check_paired(correct_a, correct_b, minimum=2)
    n = len(correct_a)
    diffs = [float(b) - float(a) for a, b in zip(correct_a, correct_b)]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(t=0.0, df=df, p_value=1.0)
        return TTestResult(t=math.copysign(math.inf, mean), df=df, p_value=0.0)
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t=t, df=df, p_value=t_sf_two_sided(t, df))


def mcnemar_test(correct_a: Sequence[int], correct_b: Sequence[int]) -> McNemarResult:
    """Exact two-sided McNemar test on the discordant pairs."""
    _check_paired(correct_a, correct_b, minimum=1)
    only_b = sum(1 for x, y in zip(correct_a, correct_b) if not x and y)
    only_a = sum(1 for x, y in zip(correct_a, correct_b) if x and not y)
    n = only_a + only_b
    if n == 0:
        return McNemarResult(only_b_correct=0, only_a_correct=0, p_value=1.0)
    k = min(only_a, only_b)
    cumulative = sum(math.comb(n, i) for i in range(k + 1)) * 0.5**n
    return McNemarResult(
        only_b_correct=only_b, only_a_correct=only_a, p_value=min(1.0, 2.0 * cumulative)
    )


def paired_significance(
    correct_a: Sequence[int], correct_b: Sequence[int], method: str = "t_test"
) -> float:
    """p-value for "run B differs from run A", per-instance pairing."""
    if method == "t_test":
        return paired_t_test(correct_a, correct_b).p_value
    if method == "mcnemar":
        return mcnemar_test(correct_a, correct_b).p_value
    raise ValueError(f"unknown significance method {method!r}")


def is_significant(p_value: float | None) -> bool:
    return p_value is not None and p_value < SIGNIFICANCE_THRESHOLD


def prediction_shift(
    verdicts_a: Sequence[VerdictRecord], verdicts_b: Sequence[VerdictRecord]
) -> ShiftCounts:
    """Per-instance correct/incorrect transitions between two runs.

    An unparsed verdict counts as incorrect: it is not a correct prediction.
    """
    by_a = {v.pair_id: v for v in verdicts_a}
    by_b = {v.pair_id: v for v in verdicts_b}
    if set(by_a) != set(by_b):
        missing = set(by_a) ^ set(by_b)
        raise PairIdMismatchError(
            f"runs cover different pair ids ({len(missing)} unmatched, "
            f"e.g. {sorted(missing)[:3]})"
        )
    wrong_to_right = right_to_wrong = 0
    for pair_id, a in by_a.items():
        b = by_b[pair_id]
        if not a.is_correct and b.is_correct:
            wrong_to_right += 1
        elif a.is_correct and not b.is_correct:
            right_to_wrong += 1
    return ShiftCounts(wrong_to_right=wrong_to_right, right_to_wrong=right_to_wrong)


def cohen_kappa(ann_a: Sequence, ann_b: Sequence) -> float | None:
    """Chance-corrected agreement; ``None`` when chance agreement is total."""
    if len(ann_a) != len(ann_b):
        raise LengthMismatchError(f"annotation lengths differ: {len(ann_a)} vs {len(ann_b)}")
    if not ann_a:
        raise DegenerateInputError("need at least one annotation")
    n = len(ann_a)
    observed = sum(1 for x, y in zip(ann_a, ann_b) if x == y)
    labels = set(ann_a) | set(ann_b)
    count_a = {label: 0 for label in labels}
    count_b = {label: 0 for label in labels}
    for x in ann_a:
        count_a[x] += 1
    for y in ann_b:
        count_b[y] += 1
    chance_numerator = sum(count_a[label] * count_b[label] for label in labels)
    if chance_numerator == n * n:  # both annotators constant on the same label
        return None
    p_o = observed / n
    p_e = chance_numerator / (n * n)
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# t-distribution survival function via the regularized incomplete beta


def t_sf_two_sided(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise DegenerateInputError("degrees of freedom must be >= 1")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz iteration; converges in a handful of steps for t-test inputs
    max_iter = 300
    eps = 3e-16
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction failed to converge")


# ---------------------------------------------------------------------------
# report rendering (mirrors the condition-per-row ablation table layout)


def format_fraction(value: float | None) -> str:
    return "undefined" if value is None else f"{value * 100.0:.2f}"


def format_points(value: float | None) -> str:
    if value is None:
        return "/"
    return f"{value:+.2f}" if value != 0 else "0.00"


def format_p_value(value: float | None) -> str:
    if value is None:
        return "/"
    marker = "*" if is_significant(value) else ""
    return f"{value:.2e}{marker}"


def render_metrics_table(rows: list[tuple[str, MetricSet]]) -> str:
    """Aligned-column table: condition, P, Acc, R, F1, dF1, p."""
    header = ["condition", "P", "Acc", "R", "F1", "dF1", "p"]
    body = [
        [
            name,
            format_fraction(m.precision),
            format_fraction(m.accuracy),
            format_fraction(m.recall),
            format_fraction(m.f1),
            format_points(m.delta_f1_points),
            format_p_value(m.p_value),
        ]
        for name, m in rows
    ]
    return _align([header] + body)


def render_shift_table(rows: list[tuple[str, ShiftCounts]]) -> str:
    header = ["condition", "wrong_to_right", "right_to_wrong"]
    body = [[name, str(s.wrong_to_right), str(s.right_to_wrong)] for name, s in rows]
    return _align([header] + body)


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"
