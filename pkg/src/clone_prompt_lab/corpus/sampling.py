"""Sample-size calculation and balanced benchmark sampling."""

from __future__ import annotations

import math
import random
from statistics import NormalDist

from .types import ClonePair, Label, SamplingSpec

# Conventional two-sided critical values; arbitrary levels fall back to the
# inverse normal CDF, which reproduces these to full precision anyway.
_Z_TABLE = {
    0.90: 1.6448536269514722,
    0.95: 1.959963984540054,
    0.99: 2.5758293035489004,
}


class InsufficientClassCountError(ValueError):
    """A requested benchmark needs more pairs of one class than exist."""

    def __init__(self, label: Label, available: int, needed: int) -> None:
        super().__init__(
            f"class {label.value} has {available} pairs, benchmark needs {needed}"
        )
        self.label = label
        self.available = available
        self.needed = needed


def z_score(confidence_level: float) -> float:
    """Two-sided critical value of the standard normal distribution."""
    if confidence_level in _Z_TABLE:
        return _Z_TABLE[confidence_level]
    return NormalDist().inv_cdf(0.5 + confidence_level / 2.0)


def required_sample_size(spec: SamplingSpec) -> int:
    """Cochran sample size with finite-population correction.

    Uses the maximum-variance proportion p=0.5, so the result is the
    familiar "sample size calculator" number: n0 = z^2 * p(1-p) / e^2,
    corrected to n0 / (1 + (n0 - 1) / N) and rounded up, never above N.
    """
    z = z_score(spec.confidence_level)
    e = spec.margin_of_error
    n0 = (z * z * 0.25) / (e * e)
    corrected = n0 / (1.0 + (n0 - 1.0) / spec.population_size)
    return min(math.ceil(corrected), spec.population_size)


def build_benchmark(pairs: list[ClonePair], size: int, seed: int) -> list[ClonePair]:
    """Draw a class-balanced benchmark of ``size`` pairs without replacement.

    Selection and final order are deterministic under ``seed``.
    """
    if size <= 0 or size % 2 != 0:
        raise ValueError(f"benchmark size must be a positive even integer, got {size}")
    per_class = size // 2
    by_class = {Label.CLONE: [], Label.NOT_CLONE: []}
    for pair in pairs:
        by_class[pair.label].append(pair)
    for label in (Label.CLONE, Label.NOT_CLONE):
        if len(by_class[label]) < per_class:
            raise InsufficientClassCountError(label, len(by_class[label]), per_class)

    rng = random.Random(seed)
    chosen = rng.sample(by_class[Label.CLONE], per_class)
    chosen += rng.sample(by_class[Label.NOT_CLONE], per_class)
    rng.shuffle(chosen)
    return chosen
