"""Inverse-distance-weighting exploration scores over the evaluated samples.

The exploration score of a point is ``-(2/pi) * arctan(1 / sum_i w_i(x))``
with ``w_i(x) = 1 / ||x - x_i||^2``, which is 0 exactly at evaluated samples
and tends toward -1 far away from all of them.  Minimizing it pushes new
proposals into unexplored territory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IdwContext",
    "idw_weight",
    "idw_distance",
    "idw_distance_batch",
    "idw_distance_gradient",
    "idw_distance_cglisp",
    "idw_distance_cglisp_batch",
]


@dataclass(frozen=True)
class IdwContext:
    """Immutable sample set with the numeric membership tolerance.

    Points closer than ``coincidence_tol`` to a sample are treated as members
    (the inverse-square weights overflow below that distance).
    """

    samples: np.ndarray  # (N, n)
    coincidence_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(
            self, "samples", np.atleast_2d(np.asarray(self.samples, dtype=float))
        )


def _sq_dists(ctx: IdwContext, pts: np.ndarray) -> np.ndarray:
    """Squared distances, shape (m, N)."""
    diff = pts[:, None, :] - ctx.samples[None, :, :]
    return np.einsum("mij,mij->mi", diff, diff)


def idw_weight(ctx: IdwContext, i: int, x) -> float:
    """Inverse squared distance to sample ``i``; undefined at the sample itself."""
    x = np.asarray(x, dtype=float)
    d2 = float(np.sum((x - ctx.samples[i]) ** 2))
    if d2 <= ctx.coincidence_tol**2:
        raise ValueError("x coincides with the requested sample")
    return 1.0 / d2


def idw_distance_batch(ctx: IdwContext, pts: np.ndarray) -> np.ndarray:
    """Exploration scores for a batch of points, shape (m,)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    d2 = _sq_dists(ctx, pts)
    member = np.min(d2, axis=1) <= ctx.coincidence_tol**2
    safe = np.where(member[:, None], 1.0, d2)
    total = np.sum(1.0 / safe, axis=1)
    vals = -(2.0 / np.pi) * np.arctan(1.0 / total)
    vals[member] = 0.0
    return vals


def idw_distance(ctx: IdwContext, x) -> float:
    """Exploration score of a single point; 0 when ``x`` is a member sample."""
    return float(idw_distance_batch(ctx, np.asarray(x, dtype=float).reshape(1, -1))[0])


def idw_distance_gradient(ctx: IdwContext, x) -> np.ndarray:
    """Analytic gradient of the exploration score; zero at member samples."""
    x = np.asarray(x, dtype=float)
    diff = x[None, :] - ctx.samples  # (N, n)
    d2 = np.sum(diff**2, axis=1)
    if np.min(d2) <= ctx.coincidence_tol**2:
        return np.zeros_like(x)
    w = 1.0 / d2
    num = (w**2) @ diff
    return -(4.0 / np.pi) * num / (1.0 + np.sum(w) ** 2)


def idw_distance_gradient_batch(ctx: IdwContext, pts: np.ndarray) -> np.ndarray:
    """Gradients for a batch of points, shape (m, n)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    diff = pts[:, None, :] - ctx.samples[None, :, :]  # (m, N, n)
    d2 = np.einsum("mij,mij->mi", diff, diff)
    member = np.min(d2, axis=1) <= ctx.coincidence_tol**2
    safe = np.where(member[:, None], 1.0, d2)
    w = 1.0 / safe
    num = np.einsum("mi,min->mn", w**2, diff)
    grads = -(4.0 / np.pi) * num / (1.0 + np.sum(w, axis=1) ** 2)[:, None]
    grads[member] = 0.0
    return grads


def idw_distance_cglisp_batch(
    ctx: IdwContext, pts: np.ndarray, best_index: int, n_max: int
) -> np.ndarray:
    """Budget-aware exploration variant, evaluated on a batch of points.

    Blends two arctan terms weighted by the fraction of the budget already
    spent: early on, distance is measured relative to the crowding around the
    incumbent; toward the end the plain inverse-distance term dominates.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    N = len(ctx.samples)
    if not 0 <= best_index < N:
        raise ValueError("best_index out of range")
    if N > n_max:
        raise ValueError("sample count exceeds the stated budget")
    d2 = _sq_dists(ctx, pts)
    member = np.min(d2, axis=1) <= ctx.coincidence_tol**2
    safe = np.where(member[:, None], 1.0, d2)
    total = np.sum(1.0 / safe, axis=1)

    best_d2 = np.sum((ctx.samples - ctx.samples[best_index]) ** 2, axis=1)
    mask = np.arange(N) != best_index
    crowding_at_best = float(np.sum(1.0 / best_d2[mask])) if N > 1 else 0.0

    frac = N / n_max
    vals = (frac - 1.0) * np.arctan(crowding_at_best / total) - frac * np.arctan(1.0 / total)
    vals[member] = 0.0
    return vals


def idw_distance_cglisp(ctx: IdwContext, x, best_index: int, n_max: int) -> float:
    return float(
        idw_distance_cglisp_batch(
            ctx, np.asarray(x, dtype=float).reshape(1, -1), best_index, n_max
        )[0]
    )
