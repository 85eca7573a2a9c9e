"""Relaxation of selected pairs into a global match score.

Each pair's score is iteratively mixed with the compatibility-weighted
mean of all other pairs' scores; geometrically inconsistent pairs decay
while mutually consistent ones persist. The final score averages the top
pairs after relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fpfusion.geometry import (
    angular_difference,
    direction_difference,
    euclidean_distance,
    radial_angle,
)
from fpfusion.pairing import PairSet
from fpfusion.templates import Minutia, MinutiaeTemplate


@dataclass(frozen=True)
class RelaxationParams:
    """Relaxation weights and the sigmoid compatibility parameters.

    ``distance_scale`` divides the spatial-distance discrepancy before the
    first sigmoid, so mu[0]=0.0416 corresponds to ~4.16 px.
    """

    weight: float = 0.5  # mixing factor per iteration
    iterations: int = 5
    mu: tuple[float, float, float] = (0.0416, 0.7853, 0.2094)
    tau: tuple[float, float, float] = (-30.0, -9.0, -16.8)
    distance_scale: float = 100.0

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


@dataclass(frozen=True)
class RelaxedPair:
    row: int
    col: int
    initial: float
    relaxed: float
    source: str = ""


@dataclass(frozen=True)
class RelaxedPairs:
    """Pairs with initial and relaxed scores plus the compatibility matrix."""

    pairs: tuple
    rho: np.ndarray

    def __len__(self) -> int:
        return len(self.pairs)


def _sigmoid_product(d1, d2, d3, params: RelaxationParams):
    out = 1.0
    for d, mu, tau in zip((d1, d2, d3), params.mu, params.tau):
        out = out / (1.0 + np.exp(-tau * (d - mu)))
    return out


def pair_compatibility(
    t_pair: tuple[Minutia, Minutia],
    k_pair: tuple[Minutia, Minutia],
    params: RelaxationParams | None = None,
) -> float:
    """Geometric compatibility of two minutia pairs, in (0, 1).

    Compares, between the A side and the B side: the spatial distance
    (scaled by 1/distance_scale), the direction difference and the radial
    angle of the two involved minutiae; each discrepancy passes through a
    sigmoid and the three factors multiply.
    """
    params = params or RelaxationParams()
    a_t, b_t = t_pair
    a_k, b_k = k_pair
    d1 = abs(euclidean_distance(a_t, a_k) - euclidean_distance(b_t, b_k))
    d1 /= params.distance_scale
    d2 = abs(
        angular_difference(direction_difference(a_t, a_k), direction_difference(b_t, b_k))
    )
    d3 = abs(angular_difference(radial_angle(a_t, a_k), radial_angle(b_t, b_k)))
    return float(_sigmoid_product(d1, d2, d3, params))


def _pairwise_radial(x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(n, n) matrix of radial angles between minutiae t (row) and k (col)."""
    dy = y[:, None] - y[None, :]
    dx = x[None, :] - x[:, None]
    ray = np.arctan2(dy, dx)
    out = angular_difference(theta[:, None], ray)
    out[(dx == 0) & (dy == 0)] = 0.0  # co-located convention
    return out


def compatibility_matrix(
    pairs: PairSet | tuple,
    template_a: MinutiaeTemplate,
    template_b: MinutiaeTemplate,
    params: RelaxationParams,
) -> np.ndarray:
    """Vectorized pairwise compatibilities; the diagonal is unused."""
    rows = np.array([p.row for p in pairs], dtype=np.intp)
    cols = np.array([p.col for p in pairs], dtype=np.intp)
    pa = template_a.positions()[rows]
    ta = template_a.thetas()[rows]
    pb = template_b.positions()[cols]
    tb = template_b.thetas()[cols]

    ds_a = np.hypot(pa[:, None, 0] - pa[None, :, 0], pa[:, None, 1] - pa[None, :, 1])
    ds_b = np.hypot(pb[:, None, 0] - pb[None, :, 0], pb[:, None, 1] - pb[None, :, 1])
    d1 = np.abs(ds_a - ds_b) / params.distance_scale

    dth_a = angular_difference(ta[:, None], ta[None, :])
    dth_b = angular_difference(tb[:, None], tb[None, :])
    d2 = np.abs(angular_difference(dth_a, dth_b))

    dr_a = _pairwise_radial(pa[:, 0], pa[:, 1], ta)
    dr_b = _pairwise_radial(pb[:, 0], pb[:, 1], tb)
    d3 = np.abs(angular_difference(dr_a, dr_b))

    return _sigmoid_product(d1, d2, d3, params)


def relax(
    pairs: PairSet,
    template_a: MinutiaeTemplate,
    template_b: MinutiaeTemplate,
    params: RelaxationParams | None = None,
) -> RelaxedPairs:
    """Run synchronous relaxation iterations over the selected pairs.

    Every iteration computes all new scores from the full previous score
    vector, so results are independent of pair ordering. A single pair has
    no peers to relax against and keeps its initial score.
    """
    params = params or RelaxationParams()
    n = len(pairs)
    if n == 0:
        raise ValueError("cannot relax an empty pair set; callers should score 0")
    gamma = np.array([p.score for p in pairs], dtype=np.float64)
    if n == 1:
        rho = np.zeros((1, 1))
        relaxed = gamma.copy()
    else:
        rho = compatibility_matrix(pairs, template_a, template_b, params)
        off = ~np.eye(n, dtype=bool)
        w = params.weight
        relaxed = gamma.copy()
        for _ in range(params.iterations):
            support = (rho * relaxed[None, :] * off).sum(axis=1) / (n - 1)
            relaxed = w * relaxed + (1.0 - w) * support
    out = tuple(
        RelaxedPair(p.row, p.col, float(g0), float(gi), p.source)
        for p, g0, gi in zip(pairs, gamma, relaxed)
    )
    return RelaxedPairs(pairs=out, rho=rho)


def match_score(relaxed: RelaxedPairs, n_p: int) -> tuple[float, list]:
    """Average of the top ``n_p`` relaxed scores (clamped at 0).

    Pairs sort by relaxed score descending, ties by (row, col). The sum of
    the top min(n_p, available) clamped values is divided by ``n_p`` so
    scores stay comparable across differing template sizes.
    """
    if n_p <= 0 or len(relaxed) == 0:
        return 0.0, []
    ordered = sorted(relaxed.pairs, key=lambda p: (-p.relaxed, p.row, p.col))
    top = ordered[: min(n_p, len(ordered))]
    total = sum(max(p.relaxed, 0.0) for p in top)
    return total / n_p, top
