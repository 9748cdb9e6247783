import cvxpy as cp
import numpy as np
import pytest

from pbo.qp import solve_qp


def _reference(P, q, A, lower, upper):
    x = cp.Variable(q.size)
    constraints = []
    finite_up = np.isfinite(upper)
    finite_lo = np.isfinite(lower)
    if finite_up.any():
        constraints.append(A[finite_up] @ x <= upper[finite_up])
    if finite_lo.any():
        constraints.append(A[finite_lo] @ x >= lower[finite_lo])
    prob = cp.Problem(cp.Minimize(0.5 * cp.quad_form(x, cp.psd_wrap(P)) + q @ x), constraints)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == "optimal"
    return float(prob.value)


def _random_instance(rng, n, m, lp=False):
    if lp:
        P = np.zeros((n, n))
    else:
        L = rng.normal(size=(n, n))
        P = L @ L.T + 0.1 * np.eye(n)
    q = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    mid = rng.normal(size=m)
    half = rng.uniform(0.1, 2.0, size=m)
    lower = mid - half
    upper = mid + half
    # keep LPs bounded: box every variable
    A = np.vstack([A, np.eye(n)])
    lower = np.concatenate([lower, -5.0 * np.ones(n)])
    upper = np.concatenate([upper, 5.0 * np.ones(n)])
    return P, q, A, lower, upper


class TestSolveQp:
    @pytest.mark.parametrize("trial", range(10))
    def test_random_qp_matches_reference(self, trial):
        rng = np.random.default_rng(100 + trial)
        P, q, A, lower, upper = _random_instance(rng, n=8, m=6)
        res = solve_qp(P, q, A, lower, upper)
        assert res.converged
        assert res.primal_residual <= 1e-7
        ref = _reference(P, q, A, lower, upper)
        assert res.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)

    @pytest.mark.parametrize("trial", range(5))
    def test_random_lp_matches_reference(self, trial):
        rng = np.random.default_rng(200 + trial)
        P, q, A, lower, upper = _random_instance(rng, n=6, m=8, lp=True)
        res = solve_qp(P, q, A, lower, upper)
        assert res.converged
        ref = _reference(P, q, A, lower, upper)
        assert res.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)

    def test_one_sided_rows(self):
        # mix of upper-only, lower-only and two-sided constraints
        P = np.eye(2)
        q = np.array([1.0, -2.0])
        A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        lower = np.array([-np.inf, 0.5, -1.0])
        upper = np.array([0.25, np.inf, 1.0])
        res = solve_qp(P, q, A, lower, upper)
        assert res.converged
        ref = _reference(P, q, A, lower, upper)
        assert res.objective == pytest.approx(ref, rel=1e-8, abs=1e-8)

    def test_unconstrained(self):
        P = 2.0 * np.eye(3)
        q = np.array([1.0, 2.0, 3.0])
        res = solve_qp(P, q, np.empty((0, 3)), np.empty(0), np.empty(0))
        np.testing.assert_allclose(res.x, -q / 2.0, atol=1e-8)

    def test_badly_scaled_near_lp(self):
        # tiny ridge against unit linear costs, the shape of ranking fits
        rng = np.random.default_rng(7)
        n = 10
        P = np.zeros((n, n))
        P[:5, :5] = 1e-6 * np.eye(5)
        q = np.concatenate([np.zeros(5), np.ones(5)])
        A = np.vstack([rng.normal(size=(8, n)), np.eye(n)])
        lower = np.concatenate([-np.inf * np.ones(8), np.zeros(n)])
        upper = np.concatenate([rng.uniform(-1.0, 0.0, size=8), np.full(n, np.inf)])
        res = solve_qp(P, q, A, lower, upper)
        assert res.converged
        ref = _reference(P, q, A, lower, upper)
        assert res.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)
