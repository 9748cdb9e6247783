"""Main preference-driven optimization loop.

The engine works in coordinates rescaled to the [-1, 1] box.  A user-supplied
oracle (a human front-end or a synthetic comparator) is queried in original
coordinates; every query compares the incumbent best sample against a new
candidate.  One query is spent per sample beyond the first, so a budget of
``n_max`` samples costs exactly ``n_max - 1`` queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Protocol

import numpy as np

from .acquisition import (
    DeltaCycle,
    Variant,
    acquisition_gradient_batch,
    acquisition_value,
    build_context,
    cycle_step,
)
from .exploration import IdwContext, idw_distance_batch
from .problem import AffineRescaler, ConstraintSet, is_feasible, latin_hypercube, make_rescaler
from .pso import PsoConfig, minimize_acquisition, multistart_refine
from .rescaling import augment
from .surrogate import (
    DEFAULT_LOOCV_GRID,
    PreferenceDataset,
    RadialKind,
    RbfSurrogate,
    fit_weights,
    loocv_select_epsilon,
)

__all__ = [
    "PreferenceOracle",
    "ProtocolError",
    "SolverConfig",
    "IterationRecord",
    "SessionState",
    "SolveResult",
    "initial_queries",
    "step",
    "solve",
]

_SEED_LHD, _SEED_AUG, _SEED_PSO, _SEED_DUP = 1, 2, 3, 4


class ProtocolError(ValueError):
    """An oracle answered outside {-1, 0, 1}."""


class PreferenceOracle(Protocol):
    def query(self, xi, xj) -> int:
        """-1 if xi is preferred, +1 if xj is preferred, 0 for a tie."""
        ...


def _checked_query(oracle: PreferenceOracle, xi, xj) -> int:
    b = oracle.query(xi, xj)
    if b not in (-1, 0, 1):
        raise ProtocolError(f"oracle answered {b!r}, expected -1, 0 or 1")
    return int(b)


def _derived_seed(seed: int, tag: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, tag, k]).generate_state(1)[0])


@dataclass
class SolverConfig:
    """Hyper-parameters of a run; the defaults follow the reference setup."""

    n_init: Optional[int] = None  # default 4 * dimension
    n_max: int = 200
    kind: RadialKind = RadialKind.INVERSE_QUADRATIC
    epsilon_init: float = 1.0
    sigma: float = 1e-2
    lam: float = 1e-6
    delta_cycle: tuple[float, ...] = (0.95, 0.7, 0.35, 0.0)
    k_aug: int = 5
    recal_iters: frozenset[int] = frozenset({1, 50, 100})
    loocv_grid: tuple[float, ...] = DEFAULT_LOOCV_GRID
    variant: Variant = Variant.GLISP_R
    legacy_delta: float = 2.0  # trade-off weight of the legacy variants
    seed: int = 0
    pso: PsoConfig = field(default_factory=PsoConfig)
    tol_eq: float = 1e-8

    def resolve_n_init(self, dimension: int) -> int:
        n_init = self.n_init if self.n_init is not None else 4 * dimension
        if n_init < 2:
            raise ValueError("n_init must be at least 2")
        if self.n_max <= n_init:
            raise ValueError("the budget n_max must exceed n_init")
        return n_init


@dataclass
class IterationRecord:
    iteration: int
    best_index: int
    delta: float
    proposed_x: np.ndarray  # original coordinates


@dataclass
class SessionState:
    """Mutable per-run state; confined to one session."""

    dataset: PreferenceDataset
    cycle: DeltaCycle
    rescaler: AffineRescaler
    constraint: ConstraintSet  # engine coordinates
    epsilon: float
    iteration: int = 0
    surrogate: Optional[RbfSurrogate] = None
    history: list[IterationRecord] = field(default_factory=list)
    best_trace: list[int] = field(default_factory=list)

    def original_samples(self) -> np.ndarray:
        return self.rescaler.inverse(self.dataset.samples)

    def best_x(self) -> np.ndarray:
        return self.rescaler.inverse(self.dataset.samples[self.dataset.best_index])


@dataclass
class SolveResult:
    x_best: np.ndarray  # original coordinates
    state: SessionState


def initial_queries(samples, oracle: PreferenceOracle) -> PreferenceDataset:
    """Sequentially compare the incumbent with each next initial sample.

    Produces one preference per sample beyond the first; the pair recorded
    for query i is (incumbent index, i) and an answer of +1 promotes sample i
    to incumbent.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if len(samples) < 2:
        raise ValueError("at least 2 initial samples are required")
    ds = PreferenceDataset(samples=samples)
    best = 0
    for i in range(1, len(samples)):
        b = _checked_query(oracle, samples[best], samples[i])
        ds.add_preference(b, (best, i))
        if b == 1:
            best = i
    ds.best_index = best
    return ds


def _best_trace_from_initial(ds: PreferenceDataset) -> list[int]:
    best = 0
    trace = [0]
    for b, (_, i) in zip(ds.outcomes, ds.pairs):
        if b == 1:
            best = i
        trace.append(best)
    return trace


def _duplicates(X: np.ndarray, x: np.ndarray, tol: float = 1e-9) -> bool:
    return bool(np.min(np.linalg.norm(X - x[None, :], axis=1)) <= tol)


def _pure_exploration_fallback(
    state: SessionState, cfg: SolverConfig, idw: IdwContext, k: int
) -> np.ndarray:
    objective = lambda pts: idw_distance_batch(idw, np.atleast_2d(pts))
    pso_cfg = replace(cfg.pso, seed=_derived_seed(cfg.seed, _SEED_DUP, k))
    res = minimize_acquisition(objective, state.constraint, pso_cfg)
    x = res.x
    if not _duplicates(state.dataset.samples, x):
        return x
    rng = np.random.default_rng(_derived_seed(cfg.seed, _SEED_DUP, 10_000 + k))
    while True:
        x = rng.uniform(state.constraint.lower, state.constraint.upper)
        if not _duplicates(state.dataset.samples, x):
            return x


def step(state: SessionState, cfg: SolverConfig, oracle: PreferenceOracle) -> SessionState:
    """One iteration: refit, propose, query, record.

    The oracle is queried as (new candidate, incumbent); an answer of -1
    promotes the candidate and keeps the trade-off weight, anything else
    advances the cycle.
    """
    ds = state.dataset
    if ds.n_samples >= cfg.n_max:
        raise ValueError("budget exhausted")
    k = state.iteration + 1

    if k in cfg.recal_iters:
        state.epsilon = loocv_select_epsilon(
            ds, cfg.kind, cfg.loocv_grid, cfg.sigma, cfg.lam, state.epsilon
        )
    beta, _ = fit_weights(ds, cfg.kind, state.epsilon, cfg.sigma, cfg.lam)
    surrogate = RbfSurrogate(
        kind=cfg.kind, epsilon=state.epsilon, centers=ds.samples.copy(), beta=beta
    )
    state.surrogate = surrogate
    idw = IdwContext(ds.samples.copy())

    if cfg.variant is Variant.GLISP_R:
        delta = state.cycle.current
        aug = augment(
            ds.samples,
            cfg.k_aug,
            state.constraint.lower,
            state.constraint.upper,
            seed=_derived_seed(cfg.seed, _SEED_AUG, k),
        )
        ctx = build_context(surrogate, idw, delta, cfg.variant, aug=aug)
    else:
        delta = cfg.legacy_delta
        aug = None
        ctx = build_context(
            surrogate,
            idw,
            delta,
            cfg.variant,
            best_index=ds.best_index,
            n_max=cfg.n_max,
        )

    objective = lambda pts: acquisition_value(ctx, np.atleast_2d(pts))
    pso_cfg = replace(cfg.pso, seed=_derived_seed(cfg.seed, _SEED_PSO, k))
    res = minimize_acquisition(objective, state.constraint, pso_cfg)
    x_new, val_new = res.x, res.value

    if cfg.variant is Variant.GLISP_R and delta == 0.0 and aug is not None:
        # pure-exploration steps benefit from gradient polishing: the
        # exploration score is differentiable with known stationary points
        starts = list(aug.midpoints)
        starts.extend([state.constraint.lower, state.constraint.upper, res.x])
        x_ref, val_ref = multistart_refine(
            objective,
            lambda pts: acquisition_gradient_batch(ctx, pts),
            starts,
            state.constraint.lower,
            state.constraint.upper,
        )
        if val_ref < val_new and is_feasible(state.constraint, x_ref, cfg.tol_eq):
            x_new, val_new = x_ref, val_ref

    if _duplicates(ds.samples, x_new):
        x_new = _pure_exploration_fallback(state, cfg, idw, k)

    best_engine = ds.samples[ds.best_index]
    b = _checked_query(oracle, x_new, best_engine)

    new_index = ds.add_sample(x_new)
    ds.add_preference(b, (new_index, ds.best_index))
    if b == -1:
        ds.best_index = new_index
    state.cycle = cycle_step(state.cycle, improved=(b == -1))

    state.iteration = k
    state.best_trace.append(ds.best_index)
    state.history.append(
        IterationRecord(
            iteration=k,
            best_index=ds.best_index,
            delta=delta,
            proposed_x=state.rescaler.inverse(x_new),
        )
    )
    return state


def _engine_constraint(problem: ConstraintSet, rescaler: AffineRescaler) -> ConstraintSet:
    n = problem.dimension
    ineq = None
    eq = None
    if problem.ineq is not None:
        user_ineq = problem.ineq
        ineq = lambda z: user_ineq(rescaler.inverse(z))
    if problem.eq is not None:
        user_eq = problem.eq
        eq = lambda z: user_eq(rescaler.inverse(z))
    return ConstraintSet(-np.ones(n), np.ones(n), ineq, eq)


class _EngineOracle:
    """Adapts a user oracle (original coordinates) to engine coordinates."""

    def __init__(self, oracle: PreferenceOracle, rescaler: AffineRescaler):
        self._oracle = oracle
        self._rescaler = rescaler

    def query(self, xi, xj) -> int:
        return _checked_query(
            self._oracle, self._rescaler.inverse(xi), self._rescaler.inverse(xj)
        )


def solve(
    problem: ConstraintSet,
    oracle: PreferenceOracle,
    cfg: SolverConfig,
    observer: Optional[Callable[[SessionState], None]] = None,
) -> SolveResult:
    """Run the full loop until the sample budget is exhausted.

    Deterministic given (cfg.seed, oracle).  ``observer``, when given, is
    called with the session state after the initial design and after every
    iteration.
    """
    n = problem.dimension
    n_init = cfg.resolve_n_init(n)
    rescaler = make_rescaler(problem)
    constraint = _engine_constraint(problem, rescaler)
    engine_oracle = _EngineOracle(oracle, rescaler)

    samples = latin_hypercube(
        constraint.lower, constraint.upper, n_init, seed=_derived_seed(cfg.seed, _SEED_LHD, 0)
    )
    ds = initial_queries(samples, engine_oracle)
    state = SessionState(
        dataset=ds,
        cycle=DeltaCycle(sequence=cfg.delta_cycle),
        rescaler=rescaler,
        constraint=constraint,
        epsilon=cfg.epsilon_init,
        best_trace=_best_trace_from_initial(ds),
    )
    if observer is not None:
        observer(state)
    while state.dataset.n_samples < cfg.n_max:
        step(state, cfg, engine_oracle)
        if observer is not None:
            observer(state)
    return SolveResult(x_best=state.best_x(), state=state)
