"""Acquisition functions and the greedy trade-off weight cycling.

Two families are provided.  The rescaled acquisition blends the min-max
normalized surrogate and exploration scores with a weight ``delta`` in
[0, 1]: ``delta = 1`` is pure exploitation, ``delta = 0`` pure exploration.
The legacy acquisition divides the raw surrogate by its spread over the
samples and adds ``delta`` (typically 2) times the raw exploration score.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .exploration import (
    IdwContext,
    idw_distance_batch,
    idw_distance_cglisp_batch,
    idw_distance_gradient,
)
from .rescaling import AugmentedSet, MinMaxStats, minmax_stats, rescale
from .surrogate import RbfSurrogate

__all__ = [
    "Variant",
    "DeltaCycle",
    "AcquisitionContext",
    "cycle_step",
    "build_context",
    "acquisition_glisp_r",
    "acquisition_glisp_legacy",
    "acquisition_value",
    "acquisition_gradient",
    "legacy_surrogate_spread",
]


class Variant(enum.Enum):
    GLISP_R = "glispr"
    GLISP_LEGACY = "glisp"
    CGLISP_LEGACY = "cglisp"


@dataclass(frozen=True)
class DeltaCycle:
    """Cycling sequence of trade-off weights with the current position."""

    sequence: tuple[float, ...]
    index: int = 0

    def __post_init__(self):
        seq = tuple(float(d) for d in self.sequence)
        if not seq:
            raise ValueError("the cycling sequence must be nonempty")
        if any(d < 0.0 or d > 1.0 for d in seq):
            raise ValueError("cycling weights must lie in [0, 1]")
        if self.index < 0:
            raise ValueError("cycle index must be nonnegative")
        object.__setattr__(self, "sequence", seq)

    @property
    def current(self) -> float:
        return self.sequence[self.index % len(self.sequence)]

    @property
    def contains_zero(self) -> bool:
        """Whether pure-exploration steps can occur (required for global
        convergence of the sampling sequence)."""
        return 0.0 in self.sequence


def cycle_step(cycle: DeltaCycle, improved: bool) -> DeltaCycle:
    """Keep the weight after an improvement, otherwise advance the cycle."""
    if improved:
        return cycle
    return replace(cycle, index=cycle.index + 1)


def legacy_surrogate_spread(surrogate: RbfSurrogate) -> float:
    """Spread of the surrogate over its own centers; 1 when degenerate."""
    vals = surrogate.evaluate(surrogate.centers)
    spread = float(np.max(vals) - np.min(vals))
    return spread if spread > 0.0 else 1.0


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything needed to evaluate one acquisition variant at a point."""

    surrogate: RbfSurrogate
    idw: IdwContext
    delta: float
    variant: Variant
    aug: Optional[AugmentedSet] = None
    surrogate_stats: Optional[MinMaxStats] = None
    exploration_stats: Optional[MinMaxStats] = None
    surrogate_spread: Optional[float] = None  # legacy variants
    best_index: int = 0  # budget-aware exploration only
    n_max: int = 0


def build_context(
    surrogate: RbfSurrogate,
    idw: IdwContext,
    delta: float,
    variant: Variant,
    aug: Optional[AugmentedSet] = None,
    best_index: int = 0,
    n_max: int = 0,
) -> AcquisitionContext:
    """Precompute the normalization statistics the chosen variant needs."""
    if variant is Variant.GLISP_R:
        if not 0.0 <= delta <= 1.0:
            raise ValueError("the rescaled acquisition requires delta in [0, 1]")
        if aug is None:
            raise ValueError("the rescaled acquisition requires an augmented set")
        return AcquisitionContext(
            surrogate=surrogate,
            idw=idw,
            delta=delta,
            variant=variant,
            aug=aug,
            surrogate_stats=minmax_stats(surrogate.evaluate(aug.points)),
            exploration_stats=minmax_stats(idw_distance_batch(idw, aug.points)),
        )
    if delta < 0.0:
        raise ValueError("the legacy acquisition requires delta >= 0")
    return AcquisitionContext(
        surrogate=surrogate,
        idw=idw,
        delta=delta,
        variant=variant,
        surrogate_spread=legacy_surrogate_spread(surrogate),
        best_index=best_index,
        n_max=n_max,
    )


def acquisition_glisp_r(ctx: AcquisitionContext, x) -> np.ndarray:
    """Convex blend of the normalized surrogate and exploration scores."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    f_bar = rescale(ctx.surrogate.evaluate(pts), ctx.surrogate_stats)
    z_bar = rescale(idw_distance_batch(ctx.idw, pts), ctx.exploration_stats)
    vals = ctx.delta * f_bar + (1.0 - ctx.delta) * z_bar
    return vals if np.ndim(x) > 1 else float(vals[0])


def acquisition_glisp_legacy(
    surrogate: RbfSurrogate,
    idw: IdwContext,
    delta: float,
    x,
    spread: Optional[float] = None,
) -> np.ndarray:
    """Legacy acquisition: surrogate over its sample spread plus raw exploration."""
    if spread is None:
        spread = legacy_surrogate_spread(surrogate)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    vals = surrogate.evaluate(pts) / spread + delta * idw_distance_batch(idw, pts)
    return vals if np.ndim(x) > 1 else float(vals[0])


def acquisition_value(ctx: AcquisitionContext, x) -> np.ndarray:
    """Dispatch on the configured variant; accepts a point or a batch."""
    if ctx.variant is Variant.GLISP_R:
        return acquisition_glisp_r(ctx, x)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if ctx.variant is Variant.GLISP_LEGACY:
        explore = idw_distance_batch(ctx.idw, pts)
    else:
        explore = idw_distance_cglisp_batch(ctx.idw, pts, ctx.best_index, ctx.n_max)
    vals = ctx.surrogate.evaluate(pts) / ctx.surrogate_spread + ctx.delta * explore
    return vals if np.ndim(x) > 1 else float(vals[0])


def acquisition_gradient(ctx: AcquisitionContext, x) -> np.ndarray:
    """Analytic gradient of the rescaled acquisition at a single point.

    Valid for differentiable radial kinds; normalization contributes only the
    1/range factors.  At the pure-exploration and pure-exploitation extremes
    the vanished term is skipped, so the kinked radial kinds still work with
    ``delta = 0``.
    """
    if ctx.variant is not Variant.GLISP_R:
        raise ValueError("gradient is implemented for the rescaled variant only")
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    if ctx.delta > 0.0:
        grad += ctx.delta * ctx.surrogate.gradient(x) / ctx.surrogate_stats.delta
    if ctx.delta < 1.0:
        grad += (1.0 - ctx.delta) * idw_distance_gradient(ctx.idw, x) / ctx.exploration_stats.delta
    return grad


def acquisition_gradient_batch(ctx: AcquisitionContext, pts) -> np.ndarray:
    """Gradients of the rescaled acquisition for a batch of points."""
    from .exploration import idw_distance_gradient_batch

    if ctx.variant is not Variant.GLISP_R:
        raise ValueError("gradient is implemented for the rescaled variant only")
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    grads = np.zeros_like(pts)
    if ctx.delta > 0.0:
        grads += ctx.delta * ctx.surrogate.gradient_batch(pts) / ctx.surrogate_stats.delta
    if ctx.delta < 1.0:
        grads += (
            (1.0 - ctx.delta)
            * idw_distance_gradient_batch(ctx.idw, pts)
            / ctx.exploration_stats.delta
        )
    return grads
