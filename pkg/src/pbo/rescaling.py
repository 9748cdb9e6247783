"""Augmented sample set and min-max normalization for the acquisition terms.

The exploration score is 0 at every evaluated sample, so normalizing it over
the samples alone is useless.  Instead both acquisition terms are normalized
over an augmented set: the samples, the midpoints between cluster centroids
(approximate stationary points of the exploration score), and the two box
corners ``l`` and ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AugmentedSet",
    "MinMaxStats",
    "kmeans",
    "augment",
    "minmax_stats",
    "rescale",
]


def kmeans(points, k: int, seed: int, max_iter: int = 300) -> np.ndarray:
    """Lloyd k-means with k-means++ seeding; deterministic for a fixed seed.

    Empty clusters are re-seeded to the point farthest from its assigned
    centroid.  Requires strictly more points than clusters.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) <= k:
        raise ValueError("k-means needs more points than clusters")
    rng = np.random.default_rng(seed)

    # k-means++ seeding
    centroids = np.empty((k, pts.shape[1]))
    centroids[0] = pts[rng.integers(len(pts))]
    closest = np.sum((pts - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            centroids[i:] = pts[rng.choice(len(pts), size=k - i, replace=False)]
            break
        probs = closest / total
        centroids[i] = pts[rng.choice(len(pts), p=probs)]
        closest = np.minimum(closest, np.sum((pts - centroids[i]) ** 2, axis=1))

    for _ in range(max_iter):
        d2 = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        assigned_d2 = d2[np.arange(len(pts)), labels]
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = pts[members].mean(axis=0)
            else:
                far = int(np.argmax(assigned_d2))
                new_centroids[c] = pts[far]
                assigned_d2[far] = -1.0  # claim at most once
        if np.allclose(new_centroids, centroids, rtol=0.0, atol=1e-12):
            centroids = new_centroids
            break
        centroids = new_centroids
    return centroids


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    """Keep the first occurrence of every point, merging matches within tol."""
    kept: list[np.ndarray] = []
    for p in points:
        if not any(np.linalg.norm(p - q) <= tol for q in kept):
            kept.append(p)
    return np.array(kept)


@dataclass(frozen=True)
class AugmentedSet:
    """Samples plus centroid midpoints plus the box corners, deduplicated."""

    points: np.ndarray  # (m, n)
    k_aug: int
    source_count: int
    midpoints: np.ndarray  # the centroid-midpoint subset, kept for warm starts


def augment(samples, k_aug: int, lower, upper, seed: int) -> AugmentedSet:
    """Build the augmented sample set used to normalize the acquisition terms.

    When there are more samples than ``k_aug`` the samples are clustered and
    the centroids stand in for them; otherwise the samples themselves are
    used.  Midpoints of every unordered pair of (centroids + corners) are
    added, then everything is deduplicated at tolerance 1e-9.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if len(pts) == 0:
        raise ValueError("samples must be nonempty")
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)

    if len(pts) > k_aug:
        anchors = kmeans(pts, k_aug, seed)
    else:
        anchors = pts
    anchors = _dedup(np.vstack([anchors, lo[None, :], hi[None, :]]), 1e-9)

    mids = []
    for i in range(len(anchors)):
        for j in range(i + 1, len(anchors)):
            mids.append(0.5 * (anchors[i] + anchors[j]))
    midpoints = np.array(mids) if mids else np.empty((0, pts.shape[1]))

    stacked = np.vstack([pts, midpoints, lo[None, :], hi[None, :]])
    return AugmentedSet(
        points=_dedup(stacked, 1e-9),
        k_aug=k_aug,
        source_count=len(pts),
        midpoints=midpoints,
    )


@dataclass(frozen=True)
class MinMaxStats:
    h_min: float
    h_max: float
    delta: float


def minmax_stats(values) -> MinMaxStats:
    """Range statistics with guards against a degenerate (constant) range.

    When all values coincide the divisor falls back to the common value, or
    to 1 when that value is itself zero.
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("cannot take min-max statistics of an empty list")
    h_min = float(np.min(vals))
    h_max = float(np.max(vals))
    if h_max > h_min:
        delta = h_max - h_min
    elif h_max != 0.0:
        delta = h_max
    else:
        delta = 1.0
    return MinMaxStats(h_min=h_min, h_max=h_max, delta=delta)


def rescale(value, stats: MinMaxStats):
    """Normalize ``value`` by the recorded range; in [0, 1] on the source set."""
    return (value - stats.h_min) / stats.delta
