"""Smoothed pair probabilities and the PMI / fit-weight blocks built from them.

Pair counts are symmetrized before use, so every block is exactly symmetric
under transposition of its index ranges.  Entries with zero smoothed
probability mass get PMI 0 and weight 0; a zero weight makes the PMI value
inert in the downstream weighted fits, so any finite placeholder would do.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import CooccurrenceTable, Vocabulary


@dataclass(frozen=True)
class SmoothingConfig:
    """Jelinek-Mercer interpolation weight between the empirical pair
    probability (weight 1 - lam) and the unigram product (weight lam)."""

    lam: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")


@dataclass(frozen=True)
class WeightConfig:
    """Monotone transform turning a pair probability into a fit weight:
    min(p, cap) ** alpha, optionally rescaled so a block's maximum is 1."""

    alpha: float = 0.5
    cap: float | None = None
    normalize: bool = True

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.cap is not None and self.cap <= 0.0:
            raise ValueError("cap must be positive when present")


@dataclass
class UnigramDistribution:
    """Per-word probability, strictly positive and summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.size == 0:
            raise ValueError("distribution over an empty vocabulary")
        if np.any(self.probs <= 0.0):
            raise ValueError("all probabilities must be positive")
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")


def unigram_distribution(vocab: Vocabulary) -> UnigramDistribution:
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    counts = np.asarray(vocab.counts, dtype=float)
    return UnigramDistribution(counts / counts.sum())


def smoothed_bigram_prob(
    i: int,
    j: int,
    table: CooccurrenceTable,
    uni: UnigramDistribution,
    cfg: SmoothingConfig,
) -> float:
    """Interpolated probability of the symmetrized pair (i, j)."""
    if table.total_pairs == 0:
        raise ValueError("table holds no pairs")
    emp = (table.pair_count(i, j) + table.pair_count(j, i)) / (2.0 * table.total_pairs)
    return (1.0 - cfg.lam) * emp + cfg.lam * float(uni.probs[i] * uni.probs[j])


def weight_transform(p, cfg: WeightConfig):
    """Monotone non-decreasing map from probability to raw fit weight.

    Normalization (when requested) is applied by the block builders, which
    know the block maximum.
    """
    p = np.asarray(p, dtype=float)
    if cfg.cap is not None:
        p = np.minimum(p, cfg.cap)
    return p**cfg.alpha


@dataclass
class PmiBlock:
    """Dense rectangular view of the PMI matrix (natural log)."""

    row_words: range
    col_words: range
    values: np.ndarray


@dataclass
class WeightBlock:
    """Fit weights paired with a PmiBlock.

    ``normalizer`` is the divisor that was applied to the raw transform
    output (1.0 when normalization is off).  Row builders reuse it so that
    weights stay on one scale across an entire factorization run.
    """

    row_words: range
    col_words: range
    values: np.ndarray
    normalizer: float = 1.0


def _check_range(r: range, n: int, label: str) -> None:
    if r.step != 1 or len(r) == 0:
        raise ValueError(f"{label} must be a nonempty step-1 range")
    if r.start < 0 or r.stop > n:
        raise ValueError(f"{label} exceeds the vocabulary")


def _empirical_block(row_range, col_range, table) -> np.ndarray:
    """Symmetrized pair counts for the block, divided by 2 * total pairs."""
    emp = np.zeros((len(row_range), len(col_range)))
    r0, c0 = row_range.start, col_range.start
    for i in row_range:
        for j, c in table.rows.get(i, {}).items():
            if c0 <= j < col_range.stop:
                emp[i - r0, j - c0] += c
    for j in col_range:
        for i, c in table.rows.get(j, {}).items():
            if r0 <= i < row_range.stop:
                emp[i - r0, j - c0] += c
    emp /= 2.0 * table.total_pairs
    return emp


def pmi_block(
    row_range: range,
    col_range: range,
    table: CooccurrenceTable,
    uni: UnigramDistribution,
    smoothing: SmoothingConfig,
    weighting: WeightConfig,
) -> tuple[PmiBlock, WeightBlock]:
    """Build the PMI block and its paired weight block for two index ranges."""
    n = len(table.vocab)
    _check_range(row_range, n, "row range")
    _check_range(col_range, n, "col range")
    if table.total_pairs == 0:
        raise ValueError("table holds no pairs")
    emp = _empirical_block(row_range, col_range, table)
    indep = np.outer(
        uni.probs[row_range.start : row_range.stop],
        uni.probs[col_range.start : col_range.stop],
    )
    p = (1.0 - smoothing.lam) * emp + smoothing.lam * indep
    mask = p > 0.0
    pmi = np.zeros_like(p)
    pmi[mask] = np.log(p[mask] / indep[mask])
    weights = weight_transform(p, weighting)
    weights[~mask] = 0.0
    normalizer = 1.0
    if weighting.normalize:
        peak = float(weights.max(initial=0.0))
        if peak > 0.0:
            normalizer = peak
            weights = weights / normalizer
    return (
        PmiBlock(row_range, col_range, pmi),
        WeightBlock(row_range, col_range, weights, normalizer),
    )


def pmi_row(
    i: int,
    cols: np.ndarray,
    table: CooccurrenceTable,
    uni: UnigramDistribution,
    smoothing: SmoothingConfig,
    weighting: WeightConfig,
    normalizer: float = 1.0,
    col_pos: dict[int, int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """PMI and weight row of word ``i`` against the column words ``cols``.

    Built on demand from the sparse table; unseen pairs keep weight 0 under
    lam = 0.  ``normalizer`` should be the one recorded on the core weight
    block so row weights share its scale.  Transient cost is O(len(cols))
    plus the nonzeros of row ``i``.
    """
    if table.total_pairs == 0:
        raise ValueError("table holds no pairs")
    cols = np.asarray(cols, dtype=int)
    if col_pos is None:
        col_pos = {int(j): k for k, j in enumerate(cols)}
    emp = np.zeros(len(cols))
    for j, c in table.rows.get(i, {}).items():
        k = col_pos.get(j)
        if k is not None:
            emp[k] += c
    rows = table.rows
    for k, j in enumerate(cols):
        c = rows.get(int(j), {}).get(i)
        if c:
            emp[k] += c
    emp /= 2.0 * table.total_pairs
    indep = float(uni.probs[i]) * uni.probs[cols]
    p = (1.0 - smoothing.lam) * emp + smoothing.lam * indep
    mask = p > 0.0
    pmi = np.zeros_like(p)
    pmi[mask] = np.log(p[mask] / indep[mask])
    weights = weight_transform(p, weighting) / normalizer
    weights[~mask] = 0.0
    return pmi, weights
