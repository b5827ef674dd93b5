"""Shared first-order machinery: minimize a linear functional <C, Z> over the
convex feasible region in Z-space at exponent p.

The region is the intersection of
  * correlation structure: X = 1 - Z is PSD with unit diagonal,
  * the spread bound sum_{i<j} z_ij >= rhs,
  * the power-triangle inequalities z_ik^{p/2} <= z_ij^{p/2} + z_jk^{p/2}.

The correlation structure is enforced exactly by optimizing over a factor
V with unit rows (X = V V^T), so the only soft constraints are spread and
the lazily-activated triangles, handled with an augmented Lagrangian.  The
p = 2 solver and the concave solver's linearized subproblem are both thin
wrappers around `minimize_linear_zform`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as scipy_minimize

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap

Z_FLOOR = 1e-8  # gradient guard: d(z^{p/2})/dz blows up at z = 0 for p < 2


class NonconvergedError(RuntimeError):
    """Solver hit its iteration budget without a feasible point.

    Carries the best iterate seen so far in `best_z`.
    """

    def __init__(self, message, best_z=None):
        super().__init__(message)
        self.best_z = best_z


@dataclass
class CoreResult:
    z: np.ndarray
    value: float
    iterations: int
    rounds: int
    spread_slack: float
    max_triangle_violation: float
    active_triangles: int
    feasible: bool


def symmetrize(a):
    return (a + a.T) / 2.0


def factor_correlation(x, jitter, rng):
    """Unit-row factor V of a correlation-ish matrix, jittered to full width.

    The jitter matters: a rank-deficient factor (e.g. a +/-1 cut matrix) has
    zero gradient in the missing directions and would lock the search into the
    starting subspace.
    """
    n = x.shape[0]
    w, q = np.linalg.eigh(symmetrize(x))
    w = np.maximum(w, 0.0)
    v = q * np.sqrt(w)[None, :]
    if jitter > 0.0:
        v = v + jitter * rng.standard_normal((n, n)) / np.sqrt(n)
    return normalize_rows(v)


def normalize_rows(v):
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return v / norms


def z_of_factor(v):
    x = v @ v.T
    z = 1.0 - symmetrize(x)
    np.fill_diagonal(z, 0.0)
    return z


def spread_sum(z):
    return float(np.sum(np.triu(z, k=1)))


def power_matrix(z, p):
    half = p / 2.0
    if half == 1.0:
        return np.maximum(z, 0.0)
    return np.maximum(z, 0.0) ** half


def scan_triangle_violations(z, p, tol):
    """All ordered triples violating the power-triangle inequality by more
    than tol, as (violation, i, j, k) sorted by decreasing violation with a
    deterministic tie-break.  Triples are canonicalized to i < k."""
    n = z.shape[0]
    if n < 3:
        return []
    w = power_matrix(z, p)
    np.fill_diagonal(w, 0.0)
    found = []
    for j in range(n):
        viol = w - w[:, j][:, None] - w[j, :][None, :]
        ii, kk = np.nonzero(np.triu(viol, k=1) > tol)
        for i, k in zip(ii.tolist(), kk.tolist()):
            if i != j and k != j:
                found.append((float(viol[i, k]), i, j, k))
    found.sort(key=lambda t: (-t[0], t[1], t[2], t[3]))
    return found


def max_triangle_violation_z(z, p):
    n = z.shape[0]
    if n < 3:
        return 0.0
    w = power_matrix(z, p)
    np.fill_diagonal(w, 0.0)
    worst = 0.0
    for j in range(n):
        viol = w - w[:, j][:, None] - w[j, :][None, :]
        worst = max(worst, float(viol.max()))
    return worst


def _triangle_terms(z, tri, p, floor):
    """Constraint values h_t and the z-derivative coefficients of w at the
    three pairs of each active triple."""
    half = p / 2.0
    i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
    z_ik = z[i, k]
    z_ij = z[i, j]
    z_jk = z[j, k]
    if half == 1.0:
        h = z_ik - z_ij - z_jk
        ones = np.ones_like(z_ik)
        return h, ones, ones, ones
    zc_ik = np.maximum(z_ik, 0.0)
    zc_ij = np.maximum(z_ij, 0.0)
    zc_jk = np.maximum(z_jk, 0.0)
    h = zc_ik**half - zc_ij**half - zc_jk**half
    d_ik = half * np.maximum(z_ik, floor) ** (half - 1.0)
    d_ij = half * np.maximum(z_ij, floor) ** (half - 1.0)
    d_jk = half * np.maximum(z_jk, floor) ** (half - 1.0)
    return h, d_ik, d_ij, d_jk


@njit(cache=True)
def _al_eval_fast(v, c_mat, rhs, p, mu, rho, tri, nu, floor):
    """Jitted augmented-Lagrangian value and V-gradient.  Mirrors _al_eval."""
    n, d = v.shape
    half = p / 2.0
    x = v @ v.T
    z = 1.0 - x
    for i in range(n):
        z[i, i] = 0.0
    val = 0.0
    ssum = 0.0
    for i in range(n):
        for j in range(n):
            val += c_mat[i, j] * z[i, j]
            if j > i:
                ssum += z[i, j]
    s = ssum - rhs
    act_s = mu - rho * s
    if act_s < 0.0:
        act_s = 0.0
    val += (act_s * act_s - mu * mu) / (2.0 * rho)
    m = c_mat.copy()
    if act_s != 0.0:
        half_act = 0.5 * act_s
        for i in range(n):
            for j in range(n):
                if i != j:
                    m[i, j] -= half_act
    t = tri.shape[0]
    for idx in range(t):
        i, j, k = tri[idx, 0], tri[idx, 1], tri[idx, 2]
        z_ik = z[i, k] if z[i, k] > 0.0 else 0.0
        z_ij = z[i, j] if z[i, j] > 0.0 else 0.0
        z_jk = z[j, k] if z[j, k] > 0.0 else 0.0
        if half == 1.0:
            h = z_ik - z_ij - z_jk
            d_ik = 1.0
            d_ij = 1.0
            d_jk = 1.0
        else:
            h = z_ik**half - z_ij**half - z_jk**half
            f_ik = z_ik if z_ik > floor else floor
            f_ij = z_ij if z_ij > floor else floor
            f_jk = z_jk if z_jk > floor else floor
            d_ik = half * f_ik ** (half - 1.0)
            d_ij = half * f_ij ** (half - 1.0)
            d_jk = half * f_jk ** (half - 1.0)
        act_t = nu[idx] + rho * h
        if act_t < 0.0:
            act_t = 0.0
        val += (act_t * act_t - nu[idx] * nu[idx]) / (2.0 * rho)
        if act_t != 0.0:
            m[i, k] += 0.5 * act_t * d_ik
            m[k, i] += 0.5 * act_t * d_ik
            m[i, j] -= 0.5 * act_t * d_ij
            m[j, i] -= 0.5 * act_t * d_ij
            m[j, k] -= 0.5 * act_t * d_jk
            m[k, j] -= 0.5 * act_t * d_jk
    # Z = 1 - V V^T, so dF/dV = -2 * (dF/dZ) V
    grad = -2.0 * (m @ v)
    return val, grad


def _al_eval(v, c_mat, rhs, p, mu, rho, tri, nu, floor, need_grad=True):
    """Augmented-Lagrangian value (and V-gradient) at factor v."""
    z = z_of_factor(v)
    val = float(np.vdot(c_mat, z))
    s = spread_sum(z) - rhs
    # inequality s >= 0 with multiplier mu
    act_s = max(0.0, mu - rho * s)
    val += (act_s * act_s - mu * mu) / (2.0 * rho)
    if len(tri):
        h, d_ik, d_ij, d_jk = _triangle_terms(z, tri, p, floor)
        act_t = np.maximum(0.0, nu + rho * h)
        val += float(np.sum(act_t * act_t - nu * nu)) / (2.0 * rho)
    if not need_grad:
        return val, None, s, None
    n = v.shape[0]
    m = c_mat.copy()
    if act_s != 0.0:
        m = m + (-act_s) * 0.5 * (1.0 - np.eye(n))
    h_out = None
    if len(tri):
        h_out = h
        coef = act_t
        if np.any(coef != 0.0):
            i, j, k = tri[:, 0], tri[:, 1], tri[:, 2]
            add = np.zeros_like(m)
            np.add.at(add, (i, k), 0.5 * coef * d_ik)
            np.add.at(add, (i, j), -0.5 * coef * d_ij)
            np.add.at(add, (j, k), -0.5 * coef * d_jk)
            m = m + add + add.T
    # Z = 1 - V V^T, so dF/dV = -2 * (dF/dZ) V
    grad = -2.0 * (m @ v)
    return val, grad, s, h_out


def _riemannian(grad, v):
    """Project the ambient gradient onto the unit-row (oblique) tangent space."""
    inner = np.sum(grad * v, axis=1, keepdims=True)
    return grad - inner * v


def _al_round(v, c_mat, rhs, p, mu, rho, tri, nu, floor, max_evals):
    """One inner minimization of the augmented Lagrangian.

    The unit-row constraint is folded into the objective by normalizing rows
    inside the function, which makes the problem unconstrained and lets L-BFGS
    do the line-search work.  Returns (v, evals used, converged flag)."""
    n, d = v.shape

    if HAVE_NUMBA:

        def fun(w_flat):
            w = w_flat.reshape(n, d)
            norms = np.sqrt(np.sum(w * w, axis=1))[:, None]
            norms[norms == 0.0] = 1.0
            u = w / norms
            val, grad_u = _al_eval_fast(u, c_mat, rhs, p, mu, rho, tri, nu, floor)
            grad_w = _riemannian(grad_u, u) / norms
            return val, grad_w.ravel()

    else:

        def fun(w_flat):
            w = w_flat.reshape(n, d)
            norms = np.linalg.norm(w, axis=1, keepdims=True)
            norms[norms == 0.0] = 1.0
            u = w / norms
            val, grad_u, _, _ = _al_eval(u, c_mat, rhs, p, mu, rho, tri, nu, floor)
            grad_w = _riemannian(grad_u, u) / norms
            return val, grad_w.ravel()

    val0 = fun(v.ravel())[0]
    res = scipy_minimize(
        fun,
        v.ravel(),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_evals, "maxfun": 4 * max_evals, "ftol": 1e-14, "gtol": 1e-8},
    )
    v_new = normalize_rows(res.x.reshape(n, d))
    converged = bool(res.status == 0) or (val0 - res.fun <= 1e-11 * (1.0 + abs(res.fun)))
    return v_new, int(res.nfev), converged


def minimize_linear_zform(
    c_mat,
    n,
    p,
    rhs,
    z0,
    *,
    tol=1e-6,
    max_iter=50000,
    triangle_batch=None,
    seed=0,
    jitter=1e-4,
    max_rounds=80,
    inner_steps=120,
):
    """Minimize <C, Z> over the exponent-p feasible region, warm-started at z0.

    Returns the best feasible iterate seen (z0 itself counts when feasible);
    raises NonconvergedError if no iterate ever satisfied the constraints
    within tol.
    """
    c_mat = symmetrize(np.asarray(c_mat, dtype=float))
    rng = np.random.default_rng(seed)
    if triangle_batch is None:
        triangle_batch = max(n, 4)
    # rescale the objective so step sizes and penalties are scale-free
    cscale = float(np.linalg.norm(c_mat))
    c_unit = c_mat / cscale if cscale > 0.0 else c_mat

    def z_feasibility(z):
        slack = spread_sum(z) - rhs
        tri_viol = max_triangle_violation_z(z, p)
        return slack, tri_viol

    best = None

    def consider(z):
        nonlocal best
        slack, tri_viol = z_feasibility(z)
        if slack >= -tol and tri_viol <= tol:
            val = float(np.vdot(c_mat, z))
            if best is None or val < best[0]:
                best = (val, z.copy(), slack, tri_viol)
            return True
        return False

    z0 = np.asarray(z0, dtype=float)
    consider(z0)

    # Start strictly inside: exact cut matrices are antipodal configurations,
    # which are critical points of any linear objective on the sphere manifold;
    # blending toward the orthonormal pattern breaks the saddle.
    z_interior = 1.0 - np.eye(n)
    z_start = 0.7 * z0 + 0.3 * z_interior
    v = factor_correlation(1.0 - z_start, jitter, rng)
    mu = 0.0
    tri = np.zeros((0, 3), dtype=np.int64)
    nu = np.zeros(0)
    rho = 1.0
    used = 0
    rounds = 0
    prev_infeas = np.inf
    prev_val = np.inf
    stable = 0
    feas_streak = 0
    while used < max_iter and rounds < max_rounds:
        rounds += 1
        budget = min(inner_steps, max_iter - used)
        v, took, pgd_conv = _al_round(
            v, c_unit, rhs, p, mu, rho, tri, nu, Z_FLOOR, budget
        )
        used += max(took, 1)
        z = z_of_factor(v)
        slack = spread_sum(z) - rhs
        violations = scan_triangle_violations(z, p, tol)
        infeas = max(0.0, -slack) + (violations[0][0] if violations else 0.0)
        feasible_now = consider(z)
        val_now = float(np.vdot(c_mat, z))
        if (
            pgd_conv
            and feasible_now
            and not violations
            and abs(prev_val - val_now) <= tol * (1.0 + abs(val_now))
        ):
            stable += 1
            if stable >= 2:
                break
        else:
            stable = 0
        prev_val = val_now if feasible_now else prev_val
        # multiplier updates
        mu = max(0.0, mu - rho * slack)
        if len(tri):
            h, _, _, _ = _triangle_terms(z, tri, p, Z_FLOOR)
            nu = np.maximum(0.0, nu + rho * h)
        # activate worst new triangles
        existing = {(int(a), int(b), int(cc)) for a, b, cc in tri}
        fresh = []
        for viol, i, j, k in violations:
            if (i, j, k) not in existing:
                fresh.append((i, j, k))
                existing.add((i, j, k))
            if len(fresh) >= triangle_batch:
                break
        if fresh:
            tri = np.vstack([tri, np.asarray(fresh, dtype=np.int64)])
            nu = np.concatenate([nu, np.zeros(len(fresh))])
        # two-sided penalty adaptation: grow on stalls, shrink once feasible so
        # the quadratic wall does not choke tangent progress along the boundary
        if infeas <= tol:
            feas_streak += 1
            if feas_streak >= 2:
                rho = max(rho * 0.5, 1.0)
        else:
            feas_streak = 0
            if infeas > 0.9 * prev_infeas:
                rho = min(rho * 2.0, 1e8)
        prev_infeas = max(infeas, 1e-300)

    if best is None:
        raise NonconvergedError(
            f"no feasible iterate within tol={tol} after {used} steps",
            best_z=z_of_factor(v),
        )
    val, z, slack, tri_viol = best
    return CoreResult(
        z=z,
        value=val,
        iterations=used,
        rounds=rounds,
        spread_slack=slack,
        max_triangle_violation=tri_viol,
        active_triangles=len(tri),
        feasible=True,
    )
