"""Dense solver for small convex QPs and LPs with two-sided constraints.

Solves problems of the form

    minimize    (1/2) x' P x + q' x
    subject to  lower <= A x <= upper

with P positive semidefinite (P = 0 gives an LP).  A Mehrotra
predictor-corrector interior-point method produces the iterate (a couple of
dozen Newton steps regardless of problem scaling, with a Ruiz-equilibrated
ADMM iteration as fallback), and a primal active-set refinement seeded by
that iterate lands exactly on the optimal face whenever it can certify KKT
optimality.  The refinement matters for ranking-fit problems, which are
nearly LPs: their minimizers sit on vertices that first-order iterates only
approach along very flat directions.

Dual sign convention: ``y_i > 0`` means the upper bound of row i is active,
``y_i < 0`` the lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

__all__ = ["QpResult", "solve_qp"]


@dataclass
class QpResult:
    x: np.ndarray
    z: np.ndarray
    y: np.ndarray
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool
    objective: float


def _inf_norm(v) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def _objective(P, q, x) -> float:
    return 0.5 * float(x @ P @ x) + float(q @ x)


def _result_residuals(P, q, A, lower, upper, x, y):
    ax = A @ x
    if ax.size:
        viol = float(np.max(np.maximum(np.maximum(ax - upper, lower - ax), 0.0)))
    else:
        viol = 0.0
    r_dual = float(np.max(np.abs(P @ x + q + A.T @ y)))
    prim_scale = max(_inf_norm(ax), 1.0)
    dual_scale = max(_inf_norm(P @ x), _inf_norm(A.T @ y), _inf_norm(q), 1.0)
    return viol, r_dual, prim_scale, dual_scale


def _one_sided_rows(A, lower, upper):
    """Stack the two-sided constraints into G x <= h with back-mapping."""
    rows, rhs, back = [], [], []
    for i in range(A.shape[0]):
        if np.isfinite(upper[i]):
            rows.append(A[i])
            rhs.append(upper[i])
            back.append((i, +1.0))
        if np.isfinite(lower[i]):
            rows.append(-A[i])
            rhs.append(-lower[i])
            back.append((i, -1.0))
    n = A.shape[1]
    G = np.array(rows) if rows else np.empty((0, n))
    return G, np.array(rhs), back


# ---------------------------------------------------------------------------
# interior-point engine


def _solve_ipm(P, q, G, h, max_iter: int = 100, tol: float = 1e-10):
    """Mehrotra predictor-corrector on the inequality form G x <= h.

    Constraint rows are equilibrated to unit infinity norm, and the Newton
    normal matrix falls back to escalating diagonal regularization when its
    factorization fails (ill-conditioned ranking geometries).
    """
    n = q.size
    m = len(h)
    if m == 0:
        try:
            return np.linalg.solve(P + 1e-12 * np.eye(n), -q), np.zeros(0), 0
        except np.linalg.LinAlgError:
            return None

    row_scale = 1.0 / np.clip(np.max(np.abs(G), axis=1), 1e-10, None)
    G = G * row_scale[:, None]
    h = h * row_scale

    x = np.zeros(n)
    s = np.maximum(h - G @ x, 1.0)
    z = np.ones(m)
    q_scale = max(_inf_norm(q), 1.0)
    h_scale = max(_inf_norm(h), 1.0)

    iters = 0
    for iters in range(1, max_iter + 1):
        rd = P @ x + q + G.T @ z
        rp = G @ x + s - h
        mu = float(s @ z) / m
        if (
            _inf_norm(rd) <= tol * q_scale
            and _inf_norm(rp) <= tol * h_scale
            and mu <= tol * q_scale
        ):
            break

        d = z / s
        base = P + (G.T * d) @ G
        chol = None
        reg = 1e-12
        while reg <= 1e-4:
            normal = base.copy()
            normal[np.diag_indices(n)] += reg
            try:
                chol = cho_factor(normal)
                break
            except np.linalg.LinAlgError:
                reg *= 100.0
        if chol is None:
            break  # hand the current iterate to the caller for refinement

        def newton_step(rs):
            rhs = -rd - G.T @ ((z * rp - rs) / s)
            dx = cho_solve(chol, rhs)
            ds = -rp - G @ dx
            dz = (-rs - z * ds) / s
            return dx, ds, dz

        dx_a, ds_a, dz_a = newton_step(s * z)
        alpha_p = _max_step(s, ds_a)
        alpha_d = _max_step(z, dz_a)
        mu_aff = float((s + alpha_p * ds_a) @ (z + alpha_d * dz_a)) / m
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0

        rs = s * z + ds_a * dz_a - sigma * mu
        dx, ds, dz = newton_step(rs)
        alpha_p = min(1.0, 0.99 * _max_step(s, ds))
        alpha_d = min(1.0, 0.99 * _max_step(z, dz))
        x = x + alpha_p * dx
        s = s + alpha_p * ds
        z = z + alpha_d * dz

    return x, z * row_scale, iters


def _max_step(v, dv) -> float:
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


# ---------------------------------------------------------------------------
# active-set refinement


def _active_set_refine(P, q, G, h, x0, seed_tol: float, max_rounds: int = 40):
    """Primal active-set iteration seeded near ``x0``.

    Starts from the rows tight at ``x0`` within ``seed_tol``, then adds the
    most violated row / drops the most negative multiplier until the KKT
    conditions certify a global optimum of the convex program.  Returns
    ``(x, z)`` (z = multipliers of G x <= h) or None.
    """
    n = q.size
    m = len(h)
    resid = G @ x0 - h
    working = list(np.nonzero(resid >= -seed_tol)[0])
    feas_tol = 1e-9
    stat_scale = max(_inf_norm(q), 1.0)

    for _ in range(max_rounds):
        mw = len(working)
        Gw = G[working]
        kkt = np.zeros((n + mw, n + mw))
        kkt[:n, :n] = P + 1e-10 * np.eye(n)
        kkt[:n, n:] = Gw.T
        kkt[n:, :n] = Gw
        kkt[n:, n:] = -1e-10 * np.eye(mw)
        rhs = np.concatenate([-q, h[working]])
        try:
            t = np.linalg.solve(kkt, rhs)
            for _ in range(2):
                t += np.linalg.solve(kkt, rhs - kkt @ t)
        except np.linalg.LinAlgError:
            return None
        x = t[:n]
        nu = t[n:]

        viol = G @ x - h
        worst = int(np.argmax(viol)) if m else -1
        if m and viol[worst] > feas_tol:
            if worst in working:
                return None  # numerically inconsistent working set
            working.append(worst)
            continue
        if mw and np.min(nu) < -feas_tol:
            working.pop(int(np.argmin(nu)))
            continue
        z = np.zeros(m)
        z[working] = np.maximum(nu, 0.0)
        if _inf_norm(P @ x + q + G.T @ z) > 1e-8 * stat_scale:
            return None
        return x, z
    return None


# ---------------------------------------------------------------------------
# ADMM engine (fallback)


def _ruiz_equilibrate(P, q, A, iters: int = 10):
    """Scale rows/columns of the KKT data toward unit infinity norm."""
    n = q.size
    m = A.shape[0]
    D = np.ones(n)
    E = np.ones(m)
    c = 1.0
    P = P.copy()
    q = q.copy()
    A = A.copy()
    for _ in range(iters):
        col_norms = np.maximum(
            np.max(np.abs(P), axis=0, initial=0.0),
            np.max(np.abs(A), axis=0, initial=0.0),
        )
        row_norms = np.max(np.abs(A), axis=1, initial=0.0) if m else np.empty(0)
        d = 1.0 / np.sqrt(np.clip(col_norms, 1e-8, 1e8))
        e = 1.0 / np.sqrt(np.clip(row_norms, 1e-8, 1e8))
        P = d[:, None] * P * d[None, :]
        q = d * q
        A = e[:, None] * A * d[None, :]
        D *= d
        E *= e
        p_scale = np.mean(np.max(np.abs(P), axis=0, initial=0.0))
        gamma = 1.0 / max(p_scale, _inf_norm(q), 1e-8)
        P *= gamma
        q *= gamma
        c *= gamma
    return P, q, A, D, E, c


def _solve_admm(
    P,
    q,
    A,
    lower,
    upper,
    max_iter: int,
    eps_abs: float,
    eps_rel: float,
    rho: float = 0.1,
    sigma: float = 1e-6,
    alpha: float = 1.6,
):
    n = q.size
    m = A.shape[0]
    Ps, qs, As, D, E, c = _ruiz_equilibrate(P, q, A)
    lo_s = E * lower
    up_s = E * upper

    x = np.zeros(n)
    z = np.zeros(m)
    y = np.zeros(m)

    def factor(rho_val):
        return cho_factor(Ps + sigma * np.eye(n) + rho_val * (As.T @ As))

    chol = factor(rho)
    iters_done = 0
    converged = False
    while iters_done < max_iter:
        iters_done += 1
        rhs = sigma * x - qs + As.T @ (rho * z - y)
        x_tilde = cho_solve(chol, rhs)
        z_tilde = As @ x_tilde
        x = alpha * x_tilde + (1.0 - alpha) * x
        z_relaxed = alpha * z_tilde + (1.0 - alpha) * z
        z_new = np.clip(z_relaxed + y / rho, lo_s, up_s)
        y = y + rho * (z_relaxed - z_new)
        z = z_new

        if iters_done % 25 == 0 or iters_done == max_iter:
            xu = D * x
            yu = E * y / c
            r_prim, r_dual, prim_scale, dual_scale = _result_residuals(
                P, q, A, lower, upper, xu, yu
            )
            if r_prim <= eps_abs + eps_rel * prim_scale and r_dual <= eps_abs + eps_rel * dual_scale:
                converged = True
                break
            if iters_done % 100 == 0:
                ratio = (r_prim / prim_scale) / max(r_dual / dual_scale, 1e-16)
                if ratio > 5.0 or ratio < 0.2:
                    rho = float(np.clip(rho * np.sqrt(ratio), 1e-6, 1e6))
                    chol = factor(rho)

    return D * x, E * y / c, iters_done, converged


# ---------------------------------------------------------------------------


def _fold_duals(back, m_two_sided: int, z: np.ndarray) -> np.ndarray:
    y = np.zeros(m_two_sided)
    for k, (row, sign) in enumerate(back):
        y[row] += sign * z[k]
    return y


def solve_qp(
    P,
    q,
    A,
    lower,
    upper,
    max_iter: int = 50_000,
    eps_abs: float = 1e-8,
    eps_rel: float = 1e-8,
    warm_start=None,
) -> QpResult:
    """Solve to tolerance; certified-exact when the active set is identified.

    A warm start near the solution short-circuits everything: the active-set
    refinement certifies it in a couple of KKT solves.  Otherwise
    interior-point runs first, refined the same way; ADMM is the fallback
    when the interior-point candidate misses the requested tolerances.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, q.size)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m = A.shape[0]
    G, h, back = _one_sided_rows(A, lower, upper)

    def refined_result(x_seed, iters):
        for seed_tol in (1e-3, 1e-5, 1e-7):
            out = _active_set_refine(P, q, G, h, x_seed, seed_tol)
            if out is None:
                continue
            x, z = out
            y = _fold_duals(back, m, z)
            r_prim, r_dual, _, _ = _result_residuals(P, q, A, lower, upper, x, y)
            return QpResult(
                x=x,
                z=A @ x,
                y=y,
                iterations=iters,
                primal_residual=r_prim,
                dual_residual=r_dual,
                converged=True,
                objective=_objective(P, q, x),
            )
        return None

    if warm_start is not None:
        warm = np.asarray(warm_start, dtype=float).ravel()
        if warm.size == q.size:
            refined = refined_result(warm, 0)
            if refined is not None:
                return refined

    candidates = []
    ipm = _solve_ipm(P, q, G, h)
    if ipm is not None:
        x_ipm, z_ipm, iters = ipm
        refined = refined_result(x_ipm, iters)
        if refined is not None:
            return refined
        y_ipm = _fold_duals(back, m, z_ipm)
        r_prim, r_dual, prim_scale, dual_scale = _result_residuals(
            P, q, A, lower, upper, x_ipm, y_ipm
        )
        ok = r_prim <= eps_abs + eps_rel * prim_scale and r_dual <= eps_abs + eps_rel * dual_scale
        if ok:
            return QpResult(
                x=x_ipm,
                z=A @ x_ipm,
                y=y_ipm,
                iterations=iters,
                primal_residual=r_prim,
                dual_residual=r_dual,
                converged=True,
                objective=_objective(P, q, x_ipm),
            )
        candidates.append((x_ipm, y_ipm, iters, r_prim, r_dual, False))

    x, y, iters, converged = _solve_admm(P, q, A, lower, upper, max_iter, eps_abs, eps_rel)
    refined = refined_result(x, iters)
    if refined is not None:
        return refined
    r_prim, r_dual, _, _ = _result_residuals(P, q, A, lower, upper, x, y)
    candidates.append((x, y, iters, r_prim, r_dual, converged))

    candidates.sort(key=lambda t: (not t[5], max(t[3], t[4])))
    x, y, iters, r_prim, r_dual, ok = candidates[0]
    return QpResult(
        x=x,
        z=A @ x,
        y=y,
        iterations=iters,
        primal_residual=r_prim,
        dual_residual=r_dual,
        converged=ok,
        objective=_objective(P, q, x),
    )
