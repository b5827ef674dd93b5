"""Concave minimization for exponents 0 < p < 2.

In Z-form the objective (1/2^(p/2)) sum_edges z_ij^(p/2) is concave while the
feasible region stays convex, so the global minimum sits at an extreme point.
The solver runs multistart successive linearization: each step minimizes the
tangent plane over the feasible region (via the shared first-order core) and
moves there outright, which can only decrease a concave objective.  Descent
steps use a loose feasibility tolerance; the returned point always comes from
a tight solve.

Also hosts the desk verifications of concavity: closed-form Hessian of
f(x, y) = (x^(1/q) + y^(1/q))^q, its factored quadratic form, the sampling
check against finite differences, and an exhaustive n = 3 grid oracle.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import solver_core as core
from .embeddings import (
    RelaxationParams,
    ZForm,
    check_feasibility,
    embedding_from_gram,
    gram_from_z,
    objective_z,
    zform_spread_requirement,
)
from .graphs import (
    BRUTE_FORCE_CAP,
    Cut,
    Graph,
    InfeasibleBalanceError,
    balanced_size_range,
    brute_force_cut_values,
    exact_balanced_separator,
    is_c_balanced,
)
from .sdp import SdpOptions, SolveReport, cut_z_matrix, solve_sdp

CONCAVE_N_CAP = 24
GRAD_FLOOR = 1e-4  # d(z^{p/2})/dz is unbounded at 0; cap the linearization slope


@dataclass(frozen=True)
class ConcaveOptions:
    starts: int = 8
    inner_tol: float = 1e-5
    max_outer: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.inner_tol <= 0 or self.max_outer < 1:
            raise ValueError("inner_tol must be positive and max_outer >= 1")


@dataclass(frozen=True)
class HessianSample:
    x: float
    y: float
    q: float
    matrix: np.ndarray  # 2x2 symmetric


@dataclass(frozen=True)
class ConcavityReport:
    q: float
    samples: int
    max_eigenvalue: float
    max_fd_relative_error: float
    max_quadform_relative_error: float
    passed: bool
    witness: tuple | None  # (x, y) of the worst offender when failing


def feasible_point_from_cut(g: Graph, s: Cut, c: float | None = None) -> ZForm:
    """Z of a cut embedding: 0 within sides, 2 across; objective equals the
    cut size for every exponent.  With c given, rejects non-balanced cuts."""
    s.validate(g)
    k = len(s.members)
    if k == 0 or k == g.n:
        raise InfeasibleBalanceError(f"cut side size {k} of n={g.n} is degenerate")
    if c is not None and not is_c_balanced(g, s, c):
        raise InfeasibleBalanceError(
            f"|S|={k} violates {c}*{g.n} < |S| < {(1 - c) * g.n}"
        )
    return ZForm(cut_z_matrix(g, s.members))


def objective_gradient(g: Graph, z: np.ndarray, p: float, floor: float = GRAD_FLOOR):
    """Entrywise gradient of the concave Z-objective as a symmetric matrix
    (half weight per mirror entry), with the slope capped near z = 0."""
    n = z.shape[0]
    grad = np.zeros((n, n))
    scale = (p / 2.0) / 2.0 ** (p / 2.0)
    for i, j in g.edges:
        coef = scale * max(float(z[i, j]), floor) ** (p / 2.0 - 1.0)
        grad[i, j] += coef / 2.0
        grad[j, i] += coef / 2.0
    return grad


def _linear_subproblem_full(grad, g, c, inner_tol, p, z0, seed, feas_tol):
    if z0 is None:
        z0 = 1.0 - np.eye(g.n)
    rhs = zform_spread_requirement(g.n, c)
    tol = min(inner_tol, 1e-6) if feas_tol is None else feas_tol
    result = core.minimize_linear_zform(
        np.asarray(grad, dtype=float), g.n, p, rhs, np.asarray(z0, dtype=float),
        tol=tol, seed=seed,
    )
    return ZForm(result.z), result


def linear_subproblem(
    grad,
    g: Graph,
    c: float,
    inner_tol: float,
    p: float,
    z0=None,
    seed: int = 0,
) -> ZForm:
    """Minimize <grad, Z> over the exponent-p feasible region; returns ZForm.

    The region depends on p through the power-triangle inequalities, so the
    exponent is an explicit argument.  z0 seeds the search (defaults to the
    orthonormal pattern).
    """
    return _linear_subproblem_full(grad, g, c, inner_tol, p, z0, seed, None)[0]


def _cut_start_members(g: Graph, c: float, starts: int, rng):
    """Deterministic list of cut member-sets to seed the multistart: the best
    balanced cut first, then a seeded sample of the others (canonical side
    contains vertex 0, so complements collapse)."""
    if g.n <= 12:
        pool = []
        for members, value in brute_force_cut_values(g, c):
            if 0 in members:
                pool.append((value, members))
        pool.sort(key=lambda t: (t[0], t[1]))
        chosen = [pool[0]] if pool else []
        rest = pool[1:]
        if rest and starts > 1:
            idx = rng.choice(len(rest), size=min(starts - 1, len(rest)), replace=False)
            chosen += [rest[i] for i in sorted(idx.tolist())]
        return [set(members) for _, members in chosen]
    sizes = balanced_size_range(g.n, c)
    picks = []
    if g.n <= BRUTE_FORCE_CAP:
        best, _ = exact_balanced_separator(g, c)
        picks.append(set(best.members))
    while len(picks) < starts:
        k = int(rng.integers(sizes.start, sizes.stop))
        members = set(rng.choice(g.n, size=k, replace=False).tolist())
        if 0 not in members:
            members = set(range(g.n)) - members
        if members not in picks:
            picks.append(members)
    return picks


TIGHT_TOL = 1e-6
LOOSE_TOL = 1e-3


def _descend(g, c, p, z_start, f_start, opts, seed):
    """Successive linearization from one start.

    Loose subproblems steer the search into a basin cheaply; the final answer
    always comes from the tight loop, so the point handed back is feasible at
    solver precision, no worse than the start, and one more tight step cannot
    improve it by inner_tol.  Returns (z, value, iterations, certified).
    """
    iterations = 0

    def subproblem(z, feas_tol):
        nonlocal iterations
        grad = objective_gradient(g, z, p)
        znew, result = _linear_subproblem_full(
            grad, g, c, opts.inner_tol, p, z, seed, feas_tol
        )
        iterations += result.iterations
        return znew.matrix, objective_z(g, znew, p)

    # loose exploration
    z, f = np.asarray(z_start, dtype=float), f_start
    for _ in range(opts.max_outer):
        znew, fnew = subproblem(z, LOOSE_TOL)
        if f - fnew < opts.inner_tol:
            break
        z, f = znew, fnew

    # tight landing: anchor at a point that is feasible at solver precision
    # and no worse than the start
    z1, f1 = subproblem(z, TIGHT_TOL)
    if f1 > f_start:
        z1, f1 = np.asarray(z_start, dtype=float), f_start

    # tight descent to a linearization fixed point
    z, f = z1, f1
    for _ in range(opts.max_outer):
        znew, fnew = subproblem(z, TIGHT_TOL)
        if f - fnew < opts.inner_tol:
            return z, f, iterations, True
        z, f = znew, fnew
    return z, f, iterations, False


def solve_concave(g: Graph, c: float, p: float, opts: ConcaveOptions = ConcaveOptions()):
    """Multistart linearization descent for 0 < p < 2; returns (ZForm, SolveReport).

    Start list: opts.starts - 1 balanced-cut matrices (the best cut plus a
    seeded sample of others, complements deduplicated), and the Z of the
    p = 2 solution as the last start.  The reported value never exceeds the
    value at any start; ties across starts resolve to the earliest one.
    """
    if not (0.0 < p < 2.0):
        raise ValueError(f"solve_concave needs 0 < p < 2, got {p}")
    if g.n > CONCAVE_N_CAP:
        raise ValueError(f"n={g.n} beyond the desk-scale cap {CONCAVE_N_CAP}")
    if len(balanced_size_range(g.n, c)) == 0:
        raise InfeasibleBalanceError(f"no c-balanced subset size for c={c}, n={g.n}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(opts.seed)
    starts = []
    for members in _cut_start_members(g, c, max(opts.starts - 1, 1), rng):
        starts.append(cut_z_matrix(g, members))
    if opts.starts >= 2:
        x_sdp, _ = solve_sdp(g, c, SdpOptions(seed=opts.seed))
        z_sdp = 1.0 - x_sdp.matrix
        np.fill_diagonal(z_sdp, 0.0)
        starts.append(z_sdp)

    best = None
    total_iter = 0
    certified = False
    for idx, z0 in enumerate(starts):
        f0 = objective_z(g, ZForm(z0), p)
        z, f, iters, cert = _descend(g, c, p, z0, f0, opts, opts.seed)
        total_iter += iters
        if best is None or f < best[0] - 1e-15:
            best = (f, z, idx)
            certified = cert
    if best is None:
        raise core.NonconvergedError("no start produced a feasible point")
    if not certified:
        raise core.NonconvergedError(
            f"no linearization fixed point within max_outer={opts.max_outer}",
            best_z=best[1],
        )
    value, z, _ = best
    zform = ZForm(z)
    residuals = check_feasibility(
        embedding_from_gram(gram_from_z(zform)),
        RelaxationParams(p, c),
        tol_triangle=2e-6,
        tol_spread=2e-6,
    )
    report = SolveReport(
        value=value,
        residuals=residuals,
        iterations=total_iter,
        wall_time=time.perf_counter() - t0,
        seed=opts.seed,
    )
    return zform, report


def hessian_f(x: float, y: float, q: float) -> HessianSample:
    """Closed-form Hessian of f(x, y) = (x^(1/q) + y^(1/q))^q for x, y > 0.

    Negative semidefinite for q > 1, which is what makes the power-triangle
    region convex.
    """
    if x <= 0.0 or y <= 0.0:
        raise ValueError(f"second derivatives need x, y > 0, got ({x}, {y})")
    if q <= 1.0:
        raise ValueError(f"exponent q must exceed 1, got {q}")
    k = (q - 1.0) / q
    f_xx = -k * (1.0 + (y / x) ** (1.0 / q)) ** (q - 2.0) * y ** (1.0 / q) * x ** (
        -(q + 1.0) / q
    )
    f_yy = -k * (1.0 + (x / y) ** (1.0 / q)) ** (q - 2.0) * x ** (1.0 / q) * y ** (
        -(q + 1.0) / q
    )
    f_xy = k * (x ** (-1.0 / q) + y ** (-1.0 / q)) ** (q - 2.0) * (x * y) ** (
        -1.0 / q
    )
    h = np.array([[f_xx, f_xy], [f_xy, f_yy]])
    return HessianSample(x=float(x), y=float(y), q=float(q), matrix=h)


def hessian_quadratic_form(x: float, y: float, q: float, alpha: float, beta: float):
    """Factored value of [alpha, beta] H [alpha, beta]^T:

        -((q-1)/q) * (x^(1/q) + y^(1/q))^(q-2) * (alpha*y - beta*x)^2
                   / (xy)^((2q-1)/q)

    always nonpositive, which certifies concavity.
    """
    s = x ** (1.0 / q) + y ** (1.0 / q)
    k = (q - 1.0) / q
    return -k * s ** (q - 2.0) * (alpha * y - beta * x) ** 2 / (x * y) ** (
        (2.0 * q - 1.0) / q
    )


def _f_power(x, y, q):
    return (x ** (1.0 / q) + y ** (1.0 / q)) ** q


def _fd_hessian(x, y, q, rel_h=1e-3):
    hx = rel_h * x
    hy = rel_h * y
    f = _f_power
    f_xx = (f(x + hx, y, q) - 2.0 * f(x, y, q) + f(x - hx, y, q)) / hx**2
    f_yy = (f(x, y + hy, q) - 2.0 * f(x, y, q) + f(x, y - hy, q)) / hy**2
    f_xy = (
        f(x + hx, y + hy, q)
        - f(x + hx, y - hy, q)
        - f(x - hx, y + hy, q)
        + f(x - hx, y - hy, q)
    ) / (4.0 * hx * hy)
    return np.array([[f_xx, f_xy], [f_xy, f_yy]])


def check_concavity(
    q: float,
    samples: int = 1000,
    seed: int = 0,
    eig_tol: float = 1e-8,
    fd_rel_tol: float = 1e-4,
    quad_rel_tol: float = 1e-6,
) -> ConcavityReport:
    """Sample (x, y) in (0, 2]^2 and verify, at every point, that the closed
    forms are negative semidefinite, match central finite differences, and
    match the factored quadratic form."""
    if q <= 1.0:
        raise ValueError(f"concavity check needs q > 1, got {q}")
    rng = np.random.default_rng(seed)
    max_eig = -np.inf
    max_fd = 0.0
    max_quad = 0.0
    witness = None
    passed = True
    for _ in range(samples):
        x, y = rng.uniform(1e-3, 2.0, size=2)
        sample = hessian_f(x, y, q)
        h = sample.matrix
        eig = float(np.linalg.eigvalsh(h)[1])
        fd = _fd_hessian(x, y, q)
        fd_err = float(
            np.max(np.abs(h - fd) / np.maximum(np.abs(h), 1e-12))
        )
        alpha, beta = rng.uniform(-1.0, 1.0, size=2)
        quad_direct = float(np.array([alpha, beta]) @ h @ np.array([alpha, beta]))
        quad_factored = hessian_quadratic_form(x, y, q, alpha, beta)
        denom = max(abs(quad_direct), abs(quad_factored), 1e-12)
        quad_err = abs(quad_direct - quad_factored) / denom
        max_eig = max(max_eig, eig)
        max_fd = max(max_fd, fd_err)
        max_quad = max(max_quad, quad_err)
        if eig > eig_tol or fd_err > fd_rel_tol or quad_err > quad_rel_tol:
            passed = False
            if witness is None:
                witness = (float(x), float(y))
    return ConcavityReport(
        q=float(q),
        samples=samples,
        max_eigenvalue=max_eig,
        max_fd_relative_error=max_fd,
        max_quadform_relative_error=max_quad,
        passed=passed,
        witness=witness,
    )


def grid_oracle_n3(g: Graph, c: float, p: float, resolution: float = 0.02) -> float:
    """Exhaustive minimum of the Z-form objective for n = 3 over a regular
    grid of (z01, z02, z12) in [0, 2]^3, keeping points that satisfy the
    power-triangle inequalities, the spread bound, and 1 - Z PSD (checked by
    principal minors).  Independent of the descent machinery."""
    if g.n != 3:
        raise ValueError(f"grid oracle is specific to n=3, got n={g.n}")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    steps = int(round(2.0 / resolution))
    if steps > 500:
        raise ValueError(f"resolution {resolution} needs {steps + 1}^3 grid points")
    axis = np.linspace(0.0, 2.0, steps + 1)
    z01, z02, z12 = np.meshgrid(axis, axis, axis, indexing="ij", sparse=True)
    half = p / 2.0
    w01, w02, w12 = z01**half, z02**half, z12**half
    eps = 1e-9
    feas = (
        (w02 <= w01 + w12 + eps)
        & (w01 <= w02 + w12 + eps)
        & (w12 <= w01 + w02 + eps)
        & (z01 + z02 + z12 >= zform_spread_requirement(3, c) - eps)
    )
    # principal minors of 1 - Z with unit diagonal
    a, b, d = 1.0 - z01, 1.0 - z02, 1.0 - z12
    det = 1.0 + 2.0 * a * b * d - a * a - b * b - d * d
    feas &= (np.abs(a) <= 1.0 + eps) & (np.abs(b) <= 1.0 + eps) & (np.abs(d) <= 1.0 + eps)
    feas &= det >= -eps
    if not np.any(feas):
        raise InfeasibleBalanceError("grid contains no feasible point")
    scale = 1.0 / 2.0**half
    obj = np.zeros_like(feas, dtype=float)
    for i, j in g.edges:
        key = {(0, 1): w01, (0, 2): w02, (1, 2): w12}[(i, j)]
        obj = obj + scale * key
    return float(np.min(np.where(feas, obj, np.inf)))
