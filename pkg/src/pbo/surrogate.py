"""RBF surrogate of a latent scoring function learned from pairwise preferences.

The surrogate is a radial basis function expansion ``f(x) = sum_i beta_i *
phi(eps * ||x - x_i||)`` whose weights are fit so that the induced ranking
reproduces the observed preferences: for every recorded comparison the fitted
values must differ by at least a margin ``sigma`` in the stated direction (or
agree within ``sigma`` for ties), with nonnegative slack variables absorbing
inconsistencies.  The fit is a convex QP (LP when the ridge weight is zero),
solved by the dense ADMM solver in :mod:`pbo.qp`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .qp import solve_qp

__all__ = [
    "RadialKind",
    "RbfSurrogate",
    "PreferenceDataset",
    "FitError",
    "DIFFERENTIABLE_KINDS",
    "DEFAULT_LOOCV_GRID",
    "radial_eval",
    "surrogate_eval",
    "surrogate_gradient",
    "surrogate_preference",
    "fit_weights",
    "loocv_select_epsilon",
]

# Grid of candidate shape parameters for leave-one-out recalibration
# (10^linspace(-1, 1, 11), rounded to 4 decimals).
DEFAULT_LOOCV_GRID = (
    0.1000,
    0.1668,
    0.2783,
    0.4642,
    0.7743,
    1.0,
    1.2915,
    2.1544,
    3.5938,
    5.9948,
    10.0,
)


class FitError(RuntimeError):
    """Raised when the ranking fit fails to converge."""

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class RadialKind(enum.Enum):
    INVERSE_QUADRATIC = "inverse_quadratic"
    MULTIQUADRATIC = "multiquadratic"
    LINEAR = "linear"
    GAUSSIAN = "gaussian"
    THIN_PLATE_SPLINE = "thin_plate_spline"
    INVERSE_MULTIQUADRATIC = "inverse_multiquadratic"


#: Kinds whose basis functions are differentiable everywhere (the linear and
#: thin-plate-spline kernels have a kink at their center).
DIFFERENTIABLE_KINDS = frozenset(
    {
        RadialKind.INVERSE_QUADRATIC,
        RadialKind.MULTIQUADRATIC,
        RadialKind.GAUSSIAN,
        RadialKind.INVERSE_MULTIQUADRATIC,
    }
)


def radial_eval(kind: RadialKind, epsilon: float, r):
    """Evaluate the radial function at distance(s) ``r >= 0``."""
    if epsilon <= 0:
        raise ValueError("shape parameter epsilon must be positive")
    t = epsilon * np.asarray(r, dtype=float)
    if kind is RadialKind.INVERSE_QUADRATIC:
        out = 1.0 / (1.0 + t**2)
    elif kind is RadialKind.MULTIQUADRATIC:
        out = np.sqrt(1.0 + t**2)
    elif kind is RadialKind.LINEAR:
        out = t
    elif kind is RadialKind.GAUSSIAN:
        out = np.exp(-(t**2))
    elif kind is RadialKind.THIN_PLATE_SPLINE:
        # t^2 log t, extended by its limit value 0 at t = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(t > 0, t**2 * np.log(np.where(t > 0, t, 1.0)), 0.0)
    elif kind is RadialKind.INVERSE_MULTIQUADRATIC:
        out = 1.0 / np.sqrt(1.0 + t**2)
    else:  # pragma: no cover
        raise ValueError(f"unknown radial kind {kind!r}")
    return out if np.ndim(r) else float(out)


def _radial_slope_over_t(kind: RadialKind, t: np.ndarray) -> np.ndarray:
    """phi'(t)/t for the differentiable kinds; finite at t = 0."""
    if kind is RadialKind.INVERSE_QUADRATIC:
        return -2.0 / (1.0 + t**2) ** 2
    if kind is RadialKind.MULTIQUADRATIC:
        return 1.0 / np.sqrt(1.0 + t**2)
    if kind is RadialKind.GAUSSIAN:
        return -2.0 * np.exp(-(t**2))
    if kind is RadialKind.INVERSE_MULTIQUADRATIC:
        return -1.0 / (1.0 + t**2) ** 1.5
    raise ValueError(f"radial kind {kind.value} is not differentiable everywhere")


@dataclass(frozen=True)
class RbfSurrogate:
    """Immutable fitted surrogate: centers with one weight per center."""

    kind: RadialKind
    epsilon: float
    centers: np.ndarray  # (N, n)
    beta: np.ndarray  # (N,)

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        beta = np.asarray(self.beta, dtype=float).ravel()
        if len(beta) != len(centers):
            raise ValueError("one weight per center is required")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "beta", beta)

    def evaluate(self, x) -> np.ndarray:
        """Surrogate values at one point (n,) or a batch (m, n)."""
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        d = np.linalg.norm(pts[:, None, :] - self.centers[None, :, :], axis=2)
        vals = radial_eval(self.kind, self.epsilon, d) @ self.beta
        return vals if np.ndim(x) > 1 else float(vals[0])

    def gradient(self, x) -> np.ndarray:
        """Analytic gradient at a single point; differentiable kinds only."""
        x = np.asarray(x, dtype=float)
        diff = x[None, :] - self.centers  # (N, n)
        r = np.linalg.norm(diff, axis=1)
        slope = _radial_slope_over_t(self.kind, self.epsilon * r)
        coeff = self.beta * (self.epsilon**2) * slope
        return coeff @ diff

    def gradient_batch(self, pts) -> np.ndarray:
        """Gradients for a batch of points, shape (m, n)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        diff = pts[:, None, :] - self.centers[None, :, :]  # (m, N, n)
        r = np.sqrt(np.einsum("mij,mij->mi", diff, diff))
        slope = _radial_slope_over_t(self.kind, self.epsilon * r)
        coeff = (self.epsilon**2) * slope * self.beta[None, :]
        return np.einsum("mi,min->mn", coeff, diff)


def surrogate_eval(s: RbfSurrogate, x):
    return s.evaluate(x)


def surrogate_gradient(s: RbfSurrogate, x) -> np.ndarray:
    return s.gradient(x)


def surrogate_preference(s: RbfSurrogate, xi, xj, sigma: float) -> int:
    """Predicted comparison of two points with indifference band ``sigma``.

    The strict branches are checked first so the boundary ``|diff| == sigma``
    resolves deterministically.
    """
    diff = s.evaluate(np.asarray(xi, dtype=float)) - s.evaluate(np.asarray(xj, dtype=float))
    if diff <= -sigma:
        return -1
    if diff >= sigma:
        return 1
    return 0


@dataclass
class PreferenceDataset:
    """Distinct samples plus the comparisons recorded between them.

    ``pairs[h] = (i, j)`` means the h-th query compared ``samples[i]`` against
    ``samples[j]`` and got ``outcomes[h]``: -1 if i was preferred, +1 if j was,
    0 for a tie.  ``best_index`` tracks the incumbent.
    """

    samples: np.ndarray  # (N, n)
    outcomes: list[int] = field(default_factory=list)
    pairs: list[tuple[int, int]] = field(default_factory=list)
    best_index: int = 0

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        self.validate()

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def n_preferences(self) -> int:
        return len(self.outcomes)

    def validate(self):
        n = self.n_samples
        if len(self.pairs) != len(self.outcomes):
            raise ValueError("pairs and outcomes must have equal length")
        for h, (i, j) in enumerate(self.pairs):
            if i == j:
                raise ValueError(f"preference {h} compares a sample with itself")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"preference {h} references an unknown sample")
        for b in self.outcomes:
            if b not in (-1, 0, 1):
                raise ValueError(f"preference outcome {b} outside {{-1, 0, 1}}")
        if not 0 <= self.best_index < n:
            raise ValueError("best_index out of range")
        if n > 1:
            d = np.linalg.norm(self.samples[:, None, :] - self.samples[None, :, :], axis=2)
            d[np.diag_indices(n)] = np.inf
            if np.min(d) <= 1e-12:
                raise ValueError("samples must be pairwise distinct")

    def add_sample(self, x) -> int:
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if np.min(np.linalg.norm(self.samples - x, axis=1)) <= 1e-12:
            raise ValueError("new sample duplicates an existing one")
        self.samples = np.vstack([self.samples, x])
        return self.n_samples - 1

    def add_preference(self, outcome: int, pair: tuple[int, int]):
        if outcome not in (-1, 0, 1):
            raise ValueError(f"preference outcome {outcome} outside {{-1, 0, 1}}")
        self.outcomes.append(int(outcome))
        self.pairs.append((int(pair[0]), int(pair[1])))

    def slack_weights(self) -> np.ndarray:
        """Per-preference slack penalties: 10 on comparisons touching the incumbent."""
        w = np.ones(self.n_preferences)
        for h, (i, j) in enumerate(self.pairs):
            if i == self.best_index or j == self.best_index:
                w[h] = 10.0
        return w

    def without_preference(self, h: int) -> "PreferenceDataset":
        return PreferenceDataset(
            samples=self.samples,
            outcomes=[b for k, b in enumerate(self.outcomes) if k != h],
            pairs=[p for k, p in enumerate(self.pairs) if k != h],
            best_index=self.best_index,
        )


def _pair_feature_rows(data: PreferenceDataset, kind: RadialKind, epsilon: float) -> np.ndarray:
    """Rows of phi(x_i) - phi(x_j), one per recorded comparison."""
    X = data.samples
    d = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    gram = radial_eval(kind, epsilon, d)
    idx_i = np.array([p[0] for p in data.pairs])
    idx_j = np.array([p[1] for p in data.pairs])
    return gram[idx_i] - gram[idx_j]


def fit_weights(
    data: PreferenceDataset,
    kind: RadialKind,
    epsilon: float,
    sigma: float,
    lam: float,
    slack_weight_scale: float = 1.0,
    warm_start: "tuple[np.ndarray, np.ndarray] | None" = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Fit surrogate weights from preferences; returns ``(beta, slacks)``.

    Minimizes ``lam/2 * ||beta||^2 + sum_h r_h * slack_h`` subject to the
    margin constraints implied by each recorded outcome, with ``r_h = 10`` for
    comparisons involving the incumbent and 1 otherwise.  The objective is
    jointly homogeneous in (r, lam): scaling both by the same constant (via
    ``slack_weight_scale``) leaves the minimizer unchanged.
    """
    if data.n_preferences < 1:
        raise ValueError("at least one preference is required to fit")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    data.validate()

    N = data.n_samples
    M = data.n_preferences
    rows = _pair_feature_rows(data, kind, epsilon)
    weights = data.slack_weights() * slack_weight_scale

    # Decision vector v = [beta (N), slack (M)].
    nv = N + M
    P = np.zeros((nv, nv))
    P[:N, :N] = lam * np.eye(N)
    q = np.concatenate([np.zeros(N), weights])

    A_rows = []
    lo = []
    hi = []
    inf = np.inf
    for h, b in enumerate(data.outcomes):
        slack_col = np.zeros(M)
        slack_col[h] = 1.0
        if b == -1:
            # diff_h - slack_h <= -sigma
            A_rows.append(np.concatenate([rows[h], -slack_col]))
            lo.append(-inf)
            hi.append(-sigma)
        elif b == 1:
            # -diff_h - slack_h <= -sigma
            A_rows.append(np.concatenate([-rows[h], -slack_col]))
            lo.append(-inf)
            hi.append(-sigma)
        else:
            # |diff_h| <= sigma + slack_h, split into two rows sharing the slack
            A_rows.append(np.concatenate([rows[h], -slack_col]))
            lo.append(-inf)
            hi.append(sigma)
            A_rows.append(np.concatenate([-rows[h], -slack_col]))
            lo.append(-inf)
            hi.append(sigma)
    # slack >= 0
    for h in range(M):
        slack_col = np.zeros(M)
        slack_col[h] = 1.0
        A_rows.append(np.concatenate([np.zeros(N), slack_col]))
        lo.append(0.0)
        hi.append(inf)

    warm = None
    if warm_start is not None:
        warm = np.concatenate([warm_start[0], warm_start[1]])
    res = solve_qp(P, q, np.array(A_rows), np.array(lo), np.array(hi), warm_start=warm)
    if not res.converged:
        raise FitError(
            f"ranking fit did not converge within {res.iterations} iterations",
            iterations=res.iterations,
        )
    return res.x[:N].copy(), res.x[N:].copy()


def loocv_select_epsilon(
    data: PreferenceDataset,
    kind: RadialKind,
    grid,
    sigma: float,
    lam: float,
    current_epsilon: float,
) -> float:
    """Pick the shape parameter that best predicts held-out preferences.

    Each preference is held out in turn; the surrogate fit on the remainder
    must classify it correctly.  Ties are broken toward ``current_epsilon``,
    then toward the smaller candidate.
    """
    grid = [float(e) for e in grid]
    if not grid:
        raise ValueError("the candidate grid must be nonempty")
    if data.n_preferences < 2:
        return current_epsilon

    scores = []
    for eps in grid:
        # each held-out problem differs from the full fit by one preference:
        # warm-starting from the full solution certifies in a few KKT solves
        full_beta, full_slack = fit_weights(data, kind, eps, sigma, lam)
        correct = 0
        for h in range(data.n_preferences):
            held = data.pairs[h]
            train = data.without_preference(h)
            warm = (full_beta, np.delete(full_slack, h))
            beta, _ = fit_weights(train, kind, eps, sigma, lam, warm_start=warm)
            model = RbfSurrogate(kind=kind, epsilon=eps, centers=train.samples, beta=beta)
            pred = surrogate_preference(
                model, data.samples[held[0]], data.samples[held[1]], sigma
            )
            if pred == data.outcomes[h]:
                correct += 1
        scores.append(correct)

    best = max(scores)
    candidates = [e for e, s in zip(grid, scores) if s == best]
    candidates.sort(key=lambda e: (abs(e - current_epsilon), e))
    return candidates[0]
