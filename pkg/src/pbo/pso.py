"""Global minimization of the acquisition over the feasible set.

A global-best particle swarm with the standard constriction coefficients
handles the box directly (positions are clamped) and any general constraints
through an additive quadratic penalty.  For pure-exploration steps a
multistart projected-gradient refiner can polish the swarm's answer, since
the exploration score has an analytic gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .problem import ConstraintSet

__all__ = ["PsoConfig", "PsoResult", "minimize_acquisition", "multistart_refine"]


@dataclass
class PsoConfig:
    """Swarm parameters; the size/iteration defaults scale with dimension."""

    swarm_size: Optional[int] = None  # default max(30, 10 n)
    max_iters: Optional[int] = None  # default 200 n
    inertia: float = 0.729
    cognitive: float = 1.49
    social: float = 1.49
    seed: int = 0
    penalty_weight: float = 1e6

    def resolved(self, n: int) -> tuple[int, int]:
        size = self.swarm_size if self.swarm_size is not None else max(30, 10 * n)
        iters = self.max_iters if self.max_iters is not None else 200 * n
        return size, iters


@dataclass
class PsoResult:
    x: np.ndarray
    value: float
    feasible: bool
    history: list[float] = field(default_factory=list)


def _batch_eval(objective: Callable, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(objective(pts), dtype=float)
    if vals.shape != (len(pts),):
        vals = np.array([float(objective(p)) for p in pts])
    return vals


def _penalty(constraint: ConstraintSet, pts: np.ndarray, weight: float) -> np.ndarray:
    if constraint.ineq is None and constraint.eq is None:
        return np.zeros(len(pts))
    pen = np.zeros(len(pts))
    for i, p in enumerate(pts):
        total = 0.0
        if constraint.ineq is not None:
            g = np.asarray(constraint.ineq(p), dtype=float)
            total += float(np.sum(np.maximum(g, 0.0) ** 2))
        if constraint.eq is not None:
            h = np.asarray(constraint.eq(p), dtype=float)
            total += float(np.sum(h**2))
        pen[i] = weight * total
    return pen


def minimize_acquisition(
    objective: Callable,
    constraint: ConstraintSet,
    cfg: PsoConfig,
) -> PsoResult:
    """Best feasible point found by the swarm; deterministic for a fixed seed.

    ``objective`` is preferably vectorized over a (m, n) batch; a plain
    scalar function also works.  When no particle ever attains zero penalty
    the best penalized point is returned flagged infeasible.
    """
    lo, hi = constraint.lower, constraint.upper
    n = constraint.dimension
    size, iters = cfg.resolved(n)
    rng = np.random.default_rng(cfg.seed)

    pos = rng.uniform(lo, hi, size=(size, n))
    span = hi - lo
    vel = rng.uniform(-span, span, size=(size, n))
    has_general = constraint.ineq is not None or constraint.eq is not None

    def score(pts):
        vals = _batch_eval(objective, pts)
        pen = _penalty(constraint, pts, cfg.penalty_weight)
        return vals, pen

    vals, pen = score(pos)
    total = vals + pen
    pbest_pos = pos.copy()
    pbest_total = total.copy()
    pbest_pen = pen.copy()
    g = int(np.argmin(total))
    gbest_pos = pos[g].copy()
    gbest_total = float(total[g])
    feasible_seen = bool(np.any(pen == 0.0)) if has_general else True

    history = [gbest_total]
    for _ in range(iters):
        r1 = rng.uniform(size=(size, n))
        r2 = rng.uniform(size=(size, n))
        vel = (
            cfg.inertia * vel
            + cfg.cognitive * r1 * (pbest_pos - pos)
            + cfg.social * r2 * (gbest_pos - pos)
        )
        np.clip(vel, -span, span, out=vel)
        pos = np.clip(pos + vel, lo, hi)
        vals, pen = score(pos)
        total = vals + pen
        better = total < pbest_total
        pbest_pos[better] = pos[better]
        pbest_total[better] = total[better]
        pbest_pen[better] = pen[better]
        g = int(np.argmin(pbest_total))
        if pbest_total[g] < gbest_total:
            gbest_total = float(pbest_total[g])
            gbest_pos = pbest_pos[g].copy()
        if has_general and np.any(pen == 0.0):
            feasible_seen = True
        history.append(gbest_total)

    if has_general and feasible_seen:
        # report the best point among those with zero penalty
        mask = pbest_pen == 0.0
        if mask.any():
            idx = int(np.argmin(np.where(mask, pbest_total, np.inf)))
            gbest_pos = pbest_pos[idx].copy()
    value = float(_batch_eval(objective, gbest_pos[None, :])[0])
    pen_final = float(_penalty(constraint, gbest_pos[None, :], cfg.penalty_weight)[0])
    return PsoResult(
        x=gbest_pos,
        value=value,
        feasible=(pen_final == 0.0),
        history=history,
    )


def multistart_refine(
    objective: Callable,
    gradient: Callable,
    starts: Sequence[np.ndarray],
    lower,
    upper,
    max_steps: int = 200,
) -> tuple[np.ndarray, float]:
    """Projected gradient descent with backtracking from every start.

    Returns the best endpoint over all starts; never worse than the best
    start itself since only improving steps are accepted.  When the callables
    accept (m, n) batches all starts are marched together, which is the fast
    path the driver uses.
    """
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    stacked = np.clip(np.array([np.asarray(s, dtype=float) for s in starts]), lo, hi)
    if _supports_batch(objective, gradient, stacked):
        return _refine_batched(objective, gradient, stacked, lo, hi, max_steps)

    best_x: Optional[np.ndarray] = None
    best_val = np.inf
    for start in stacked:
        x = start.copy()
        fx = float(objective(x))
        for _ in range(max_steps):
            g = np.asarray(gradient(x), dtype=float)
            gnorm = np.linalg.norm(g)
            if gnorm <= 1e-14:
                break
            t = 1.0 / max(gnorm, 1.0)
            moved = False
            while t > 1e-14:
                cand = np.clip(x - t * g, lo, hi)
                step = cand - x
                if np.linalg.norm(step) <= 1e-14:
                    break
                f_cand = float(objective(cand))
                if f_cand <= fx + 1e-4 * float(g @ step):
                    x, fx = cand, f_cand
                    moved = True
                    break
                t *= 0.5
            if not moved:
                break
        if fx < best_val:
            best_val = fx
            best_x = x
    assert best_x is not None, "multistart_refine requires at least one start"
    return best_x, best_val


def _supports_batch(objective, gradient, stacked) -> bool:
    if len(stacked) < 2:
        return False
    try:
        vals = np.asarray(objective(stacked[:2]))
        grads = np.asarray(gradient(stacked[:2]))
    except Exception:
        return False
    return vals.shape == (2,) and grads.shape == stacked[:2].shape


def _refine_batched(objective, gradient, X, lo, hi, max_steps) -> tuple[np.ndarray, float]:
    X = X.copy()
    F = np.asarray(objective(X), dtype=float)
    k = len(X)
    active = np.ones(k, dtype=bool)
    for _ in range(max_steps):
        if not active.any():
            break
        G = np.zeros_like(X)
        G[active] = np.asarray(gradient(X[active]), dtype=float)
        gnorm = np.linalg.norm(G, axis=1)
        active &= gnorm > 1e-14
        t = 1.0 / np.maximum(gnorm, 1.0)
        moved = np.zeros(k, dtype=bool)
        for _ in range(50):
            rows = np.nonzero(active & ~moved & (t > 1e-14))[0]
            if rows.size == 0:
                break
            cand = np.clip(X[rows] - t[rows, None] * G[rows], lo, hi)
            step = cand - X[rows]
            stepnorm = np.linalg.norm(step, axis=1)
            fixed = stepnorm <= 1e-14  # projection pinned these iterates
            active[rows[fixed]] = False
            live = ~fixed
            if live.any():
                f_cand = np.asarray(objective(cand[live]), dtype=float)
                armijo = f_cand <= F[rows[live]] + 1e-4 * np.einsum(
                    "ij,ij->i", G[rows[live]], step[live]
                )
                acc = rows[live][armijo]
                X[acc] = cand[live][armijo]
                F[acc] = f_cand[armijo]
                moved[acc] = True
            t[rows] *= 0.5
        active &= moved
    best = int(np.argmin(F))
    return X[best].copy(), float(F[best])
