"""The p = 2 relaxation at desk scale.

Solves  min (1/4) sum_{ij in E} ||v_i - v_j||^2  over unit vectors with the
squared-distance triangle inequalities and the spread bound, by running the
shared first-order core on the Z-form of the program.  Warm-started from the
best balanced cut (exact oracle) whenever the instance is small enough, and
the returned value is never worse than that warm start.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import solver_core as core
from .embeddings import (
    FeasibilityReport,
    GramForm,
    RelaxationParams,
    check_feasibility,
    embedding_from_gram,
    gram_from_z,
    zform_spread_requirement,
    ZForm,
)
from .graphs import (
    BRUTE_FORCE_CAP,
    Graph,
    InfeasibleBalanceError,
    balanced_size_range,
    exact_balanced_separator,
)

SDP_N_CAP = 64


@dataclass(frozen=True)
class SdpOptions:
    tol: float = 1e-6
    max_iter: int = 50000
    triangle_batch: int | None = None  # None: one batch of n per round
    seed: int = 0
    warm_start: str = "cut"  # "cut" | "orthonormal"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter <= 0:
            raise ValueError("max_iter must be positive")
        if self.warm_start not in ("cut", "orthonormal"):
            raise ValueError(f"unknown warm start {self.warm_start!r}")


@dataclass(frozen=True)
class SolveReport:
    value: float
    residuals: FeasibilityReport
    iterations: int
    wall_time: float
    seed: int


def cut_z_matrix(g: Graph, members) -> np.ndarray:
    """Z of the +/-1 cut embedding: 0 within sides, 2 across."""
    signs = np.where(np.isin(np.arange(g.n), sorted(members)), 1.0, -1.0)
    z = 1.0 - np.outer(signs, signs)
    np.fill_diagonal(z, 0.0)
    return z


def objective_matrix(g: Graph) -> np.ndarray:
    """Symmetric C with <C, Z> = (1/2) sum_edges z_ij, the linear p = 2
    objective in Z form; each edge contributes half per mirror entry."""
    c_mat = np.zeros((g.n, g.n))
    for i, j in g.edges:
        c_mat[i, j] += 0.25
        c_mat[j, i] += 0.25
    return c_mat


def warm_start_z(g: Graph, c: float, kind: str) -> np.ndarray:
    if kind == "cut" and g.n <= BRUTE_FORCE_CAP:
        cut, _ = exact_balanced_separator(g, c)
        return cut_z_matrix(g, cut.members)
    # orthonormal embedding: identity Gram
    return 1.0 - np.eye(g.n)


def solve_sdp(g: Graph, c: float, opts: SdpOptions = SdpOptions()):
    """Solve the p = 2 program; returns (GramForm, SolveReport).

    Raises InfeasibleBalanceError when no balanced subset size exists and
    NonconvergedError (carrying the best iterate) when no feasible point was
    found within the iteration budget.
    """
    if g.n > SDP_N_CAP:
        raise ValueError(f"n={g.n} beyond the desk-scale cap {SDP_N_CAP}")
    if len(balanced_size_range(g.n, c)) == 0:
        raise InfeasibleBalanceError(f"no c-balanced subset size for c={c}, n={g.n}")
    t0 = time.perf_counter()
    z0 = warm_start_z(g, c, opts.warm_start)
    rhs = zform_spread_requirement(g.n, c)
    # z-space residuals are half the squared-distance residuals, so run the
    # core at tol/2 to honour opts.tol in the vector form
    result = core.minimize_linear_zform(
        objective_matrix(g),
        g.n,
        2.0,
        rhs,
        z0,
        tol=opts.tol / 2.0,
        max_iter=opts.max_iter,
        triangle_batch=opts.triangle_batch,
        seed=opts.seed,
    )
    x = gram_from_z(ZForm(result.z))
    residuals = check_feasibility(
        embedding_from_gram(x),
        RelaxationParams(2.0, c),
        tol_triangle=opts.tol,
        tol_spread=opts.tol,
    )
    report = SolveReport(
        value=result.value,
        residuals=residuals,
        iterations=result.iterations,
        wall_time=time.perf_counter() - t0,
        seed=opts.seed,
    )
    return x, report


def violated_triangles(x: GramForm, tol: float):
    """Ordered triples (i, j, k, violation) of the squared-distance triangle
    inequality violated by more than tol, sorted by decreasing violation.

    Violations are in squared-distance units, twice their z-form size.
    """
    z = 1.0 - x.matrix
    np.fill_diagonal(z, 0.0)
    found = core.scan_triangle_violations(z, 2.0, tol / 2.0)
    return [(i, j, k, 2.0 * viol) for viol, i, j, k in found]
