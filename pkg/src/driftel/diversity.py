"""Yule's Q-statistic diversity over classifier correctness patterns, and the
archive replacement rule that keeps the most diverse model set.

Q for a pair of classifiers is computed from the 2x2 contingency of their
per-instance correctness: Q = (N11*N00 - N01*N10) / (N11*N00 + N01*N10),
with Q := 0 when the denominator is zero (the value of statistical
independence). Set diversity is 1 minus the mean pairwise Q.

Internally the replacement decision uses exact rational arithmetic so that
mathematically tied candidates compare equal and the deterministic tie rule
(drop the oldest model; the new model survives ties) always applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cart import Tree, predict_chunk
from .core import Chunk

NEW_MODEL = "new"


@dataclass(frozen=True, eq=False)
class CorrectnessVector:
    """Per-instance correctness bits of one model on one evaluation chunk."""

    bits: np.ndarray  # bool, one entry per instance
    model_id: int | str  # archive slot, or "new"
    origin: int  # chunk index the model was trained on

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.bits, dtype=bool))
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def is_new(self) -> bool:
        return self.model_id == NEW_MODEL


def correctness(model: Tree, chunk: Chunk, model_id: int | str | None = None) -> CorrectnessVector:
    """Evaluate a model on a chunk and record which instances it gets right."""
    bits = predict_chunk(model, chunk) == chunk.y
    if model_id is None:
        model_id = model.origin_chunk_index
    return CorrectnessVector(bits, model_id, model.origin_chunk_index)


def contingency(ci: CorrectnessVector, cj: CorrectnessVector) -> tuple[int, int, int, int]:
    """(N11, N10, N01, N00) correctness contingency counts."""
    a, b = ci.bits, cj.bits
    if a.shape != b.shape:
        raise ValueError("correctness vectors must have equal length")
    n11 = int(np.count_nonzero(a & b))
    n10 = int(np.count_nonzero(a & ~b))
    n01 = int(np.count_nonzero(~a & b))
    n00 = a.size - n11 - n10 - n01
    return n11, n10, n01, n00


def _q_fraction(ci: CorrectnessVector, cj: CorrectnessVector) -> Fraction:
    n11, n10, n01, n00 = contingency(ci, cj)
    den = n11 * n00 + n01 * n10
    if den == 0:
        return Fraction(0)
    return Fraction(n11 * n00 - n01 * n10, den)


def q_statistic(ci: CorrectnessVector, cj: CorrectnessVector) -> float:
    n11, n10, n01, n00 = contingency(ci, cj)
    den = n11 * n00 + n01 * n10
    if den == 0:
        return 0.0
    return (n11 * n00 - n01 * n10) / den


def div(vectors) -> float:
    """Set diversity: 1 minus the mean Q over all ordered pairs.

    Q is symmetric, so this equals 1 minus the unordered-pair mean.
    """
    vectors = list(vectors)
    if len(vectors) < 2:
        raise ValueError("div needs at least two correctness vectors")
    total = Fraction(0)
    pairs = 0
    for i, a in enumerate(vectors):
        for j, b in enumerate(vectors):
            if i != j:
                total += _q_fraction(a, b)
                pairs += 1
    return float(1 - total / pairs)


def _removal_priority(c: CorrectnessVector) -> tuple[int, int]:
    # Oldest models are preferred for removal on ties; "new" survives ties.
    return (1 if c.is_new else 0, c.origin)


def select_removal(candidates) -> int | str:
    """Pick the candidate whose removal maximizes the diversity of the rest.

    Because Q is symmetric, removing candidate c changes the ordered-pair sum
    by exactly twice c's summed Q against the others, so the removal that
    maximizes remaining diversity is the one with the largest row sum. Row
    sums are compared as exact rationals; ties drop the candidate with the
    smallest origin chunk index, and the new model only when it is the sole
    argmax.
    """
    candidates = list(candidates)
    if len(candidates) < 3:
        raise ValueError("select_removal needs at least three candidates")
    length = candidates[0].bits.size
    if any(c.bits.size != length for c in candidates):
        raise ValueError("correctness vectors must have equal length")
    rows = []
    for i, a in enumerate(candidates):
        row = Fraction(0)
        for j, b in enumerate(candidates):
            if i != j:
                row += _q_fraction(a, b)
        rows.append(row)
    order = sorted(range(len(candidates)), key=lambda i: _removal_priority(candidates[i]))
    best = order[0]
    for i in order[1:]:
        if rows[i] > rows[best]:
            best = i
    return candidates[best].model_id
