"""Angle-gated cosine similarity matrices and greedy pair selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from fpfusion.descriptors import DescriptorSet
from fpfusion.geometry import angular_difference
from fpfusion.templates import MinutiaeTemplate

DEFAULT_DELTA_THETA = math.pi / 4

MAX_PAIRS_SELECT = 12  # n_R cap
MAX_PAIRS_SCORE = 8  # n_p cap


def compute_n_r(len_a: int, len_b: int) -> int:
    """Number of pairs selected per channel: min(12, min(len_a, len_b))."""
    return min(MAX_PAIRS_SELECT, len_a, len_b)


def compute_n_p(len_a: int, len_b: int) -> int:
    """Number of pairs summed into the score: min(8, min(len_a, len_b))."""
    return min(MAX_PAIRS_SCORE, len_a, len_b)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Cosine similarities in [-1, 1] with a GATED mask.

    Gated entries (angle gate fired, or either descriptor invalid) are
    never selected; their stored value is meaningless. The gate is a
    sentinel rather than a low score so that negative cosines stay
    selectable when not gated.
    """

    values: np.ndarray
    gated: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        gated = np.asarray(self.gated, dtype=bool)
        if values.shape != gated.shape or values.ndim != 2:
            raise ValueError("values and gated must be 2-d arrays of equal shape")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gated", gated)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


class Pair(NamedTuple):
    row: int
    col: int
    score: float
    source: str


@dataclass(frozen=True)
class PairSet:
    """Ranked minutia-index pairs with their initial local scores."""

    pairs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def cosine_similarity(v1: np.ndarray, v2: np.ndarray) -> float:
    """Cosine of two nonzero vectors, clamped into [-1, 1]."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape:
        raise ValueError(f"dimension mismatch: {v1.shape} vs {v2.shape}")
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.clip(v1 @ v2 / (n1 * n2), -1.0, 1.0))


def sim_score(
    a: DescriptorSet,
    b: DescriptorSet,
    template_a: MinutiaeTemplate | None = None,
    template_b: MinutiaeTemplate | None = None,
    delta_theta: float = DEFAULT_DELTA_THETA,
) -> SimilarityMatrix:
    """Pairwise cosine matrix between two descriptor sets.

    When both templates are supplied, entry (i, j) is gated unless the
    circular difference of the minutia directions is within
    ``delta_theta``. Without templates the gate trivially passes.
    Entries involving invalid descriptors are always gated.
    """
    if template_a is not None and len(template_a) != len(a):
        raise ValueError(f"descriptor count {len(a)} != template size {len(template_a)}")
    if template_b is not None and len(template_b) != len(b):
        raise ValueError(f"descriptor count {len(b)} != template size {len(template_b)}")

    norms_a = np.linalg.norm(a.vectors, axis=1)
    norms_b = np.linalg.norm(b.vectors, axis=1)
    safe_a = np.where(norms_a > 0, norms_a, 1.0)
    safe_b = np.where(norms_b > 0, norms_b, 1.0)
    values = (a.vectors / safe_a[:, None]) @ (b.vectors / safe_b[:, None]).T
    np.clip(values, -1.0, 1.0, out=values)

    gated = ~(a.valid & (norms_a > 0))[:, None] | ~(b.valid & (norms_b > 0))[None, :]
    if template_a is not None and template_b is not None:
        gap = angular_difference(
            template_a.thetas()[:, None], template_b.thetas()[None, :]
        ).reshape(len(a), len(b))
        gated |= gap > delta_theta
    return SimilarityMatrix(values=values, gated=gated)


def lsa_select(s: SimilarityMatrix, n_r: int, source: str = "") -> PairSet:
    """Greedy top-pair selection without reusing a row or column.

    Repeatedly takes the globally maximal non-gated entry whose row and
    column are both unused, until ``n_r`` pairs are chosen or none remain.
    Ties break on smaller row, then smaller column; output is sorted by
    score descending with the same tie-break.
    """
    if n_r <= 0 or s.rows == 0 or s.cols == 0:
        return PairSet(())
    work = np.where(s.gated, -np.inf, s.values).copy()
    chosen = []
    for _ in range(n_r):
        flat = int(np.argmax(work))  # first occurrence = smallest row, then col
        r, c = divmod(flat, s.cols)
        if not np.isfinite(work[r, c]):
            break
        chosen.append(Pair(r, c, float(s.values[r, c]), source))
        work[r, :] = -np.inf
        work[:, c] = -np.inf
    chosen.sort(key=lambda p: (-p.score, p.row, p.col))
    return PairSet(tuple(chosen))
