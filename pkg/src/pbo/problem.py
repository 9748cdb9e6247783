"""Feasible-set definition, decision-space rescaling and initial designs.

The optimizer itself always works in coordinates rescaled to the [-1, 1] box;
user-supplied constraint functions are evaluated in original coordinates
through the inverse map of an :class:`AffineRescaler`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConstraintSet",
    "AffineRescaler",
    "is_feasible",
    "latin_hypercube",
    "make_rescaler",
]


def _as_1d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class ConstraintSet:
    """Box bounds plus optional known inequality/equality constraints.

    The feasible set is ``l <= x <= u``, ``ineq(x) <= 0`` element-wise and
    ``eq(x) == 0`` element-wise (up to a tolerance).  ``ineq``/``eq`` are
    user-supplied callables mapping a vector to a 1-D array; the engine never
    differentiates them.
    """

    lower: np.ndarray
    upper: np.ndarray
    ineq: Optional[Callable[[np.ndarray], np.ndarray]] = None
    eq: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        lo = _as_1d(self.lower, "lower")
        hi = _as_1d(self.upper, "upper")
        if lo.size < 1:
            raise ValueError("dimension must be at least 1")
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds must have the same length")
        if np.any(lo > hi):
            raise ValueError("lower bounds must not exceed upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.size

    def with_bounds(self, lower, upper) -> "ConstraintSet":
        return ConstraintSet(lower, upper, self.ineq, self.eq)


def is_feasible(c: ConstraintSet, x, tol_eq: float = 1e-8) -> bool:
    """True iff ``x`` lies in the box and satisfies all general constraints."""
    x = _as_1d(x, "x")
    if x.size != c.dimension:
        raise ValueError(f"x has dimension {x.size}, expected {c.dimension}")
    if np.any(x < c.lower) or np.any(x > c.upper):
        return False
    if c.ineq is not None:
        if np.any(np.asarray(c.ineq(x), dtype=float) > 0.0):
            return False
    if c.eq is not None:
        if np.any(np.abs(np.asarray(c.eq(x), dtype=float)) > tol_eq):
            return False
    return True


def latin_hypercube(lower, upper, count: int, seed: int) -> np.ndarray:
    """Latin hypercube design of `count` points inside the box ``[lower, upper]``.

    Each coordinate is stratified: exactly one point falls in each of the
    `count` axis-aligned slabs of width ``(u - l)/count``, with one random
    point per stratum and an independent random permutation per dimension.
    Deterministic for a fixed seed.
    """
    lo = _as_1d(lower, "lower")
    hi = _as_1d(upper, "upper")
    if count < 2:
        raise ValueError("a Latin hypercube design needs at least 2 points")
    rng = np.random.default_rng(seed)
    n = lo.size
    unit = np.empty((count, n))
    for j in range(n):
        strata = rng.permutation(count)
        unit[:, j] = (strata + rng.uniform(size=count)) / count
    return lo + unit * (hi - lo)


@dataclass(frozen=True)
class AffineRescaler:
    """Affine map taking the box ``[l, u]`` onto ``[-1, 1]`` exactly."""

    scale: np.ndarray
    offset: np.ndarray

    def forward(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) * self.scale + self.offset

    def inverse(self, z) -> np.ndarray:
        return (np.asarray(z, dtype=float) - self.offset) / self.scale


def make_rescaler(c: ConstraintSet) -> AffineRescaler:
    """Rescaler for ``c``; every bound interval must have positive width."""
    width = c.upper - c.lower
    degenerate = np.nonzero(width <= 0)[0]
    if degenerate.size:
        raise ValueError(
            f"degenerate dimensions (upper == lower) at indexes {degenerate.tolist()}"
        )
    scale = 2.0 / width
    offset = -(c.upper + c.lower) / width
    return AffineRescaler(scale=scale, offset=offset)
