"""Unit-vector embeddings of graph vertices and their Gram / Z matrix forms.

The relaxation family works with n unit vectors, their Gram matrix X of inner
products, and the distance-like change of variables Z = 1 - X.  Everything here
is pure and immutable; solvers build on these conversions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, Cut

TOL_UNIT = 1e-8
TOL_TRIANGLE = 1e-8
TOL_SPREAD = 1e-8
TOL_PSD = 1e-7

TRIANGLE_ENUM_LIMIT = 64


class NotPsdError(ValueError):
    """Matrix has an eigenvalue below the PSD tolerance."""


@dataclass(frozen=True)
class Embedding:
    """n points in R^d, one row per vertex."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        object.__setattr__(self, "vectors", v)

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    def norms(self):
        return np.linalg.norm(self.vectors, axis=1)

    def distance_matrix(self):
        """Pairwise Euclidean distances, exact zeros on the diagonal."""
        v = self.vectors
        sq = np.sum(v * v, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (v @ v.T)
        np.fill_diagonal(d2, 0.0)
        return np.sqrt(np.maximum(d2, 0.0))

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "d": self.d, "vectors": self.vectors.tolist()},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "Embedding":
        doc = json.loads(text)
        v = np.asarray(doc["vectors"], dtype=float)
        if v.shape != (doc["n"], doc["d"]):
            raise ValueError(
                f"vector array shape {v.shape} does not match n={doc['n']}, d={doc['d']}"
            )
        return Embedding(v)


@dataclass(frozen=True)
class RelaxationParams:
    """Exponent p in (0, 2] and balance fraction c in (0, 1/2]."""

    p: float
    c: float

    def __post_init__(self):
        if not (0.0 < self.p <= 2.0):
            raise ValueError(f"p must lie in (0, 2], got {self.p}")
        if not (0.0 < self.c <= 0.5):
            raise ValueError(f"c must lie in (0, 1/2], got {self.c}")


def _check_square_symmetric(a, name, tol=1e-10):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if np.max(np.abs(a - a.T), initial=0.0) > tol:
        raise ValueError(f"{name} must be symmetric")
    return a


@dataclass(frozen=True)
class GramForm:
    """Symmetric matrix of pairwise inner products x_ij = <v_i, v_j>."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "matrix", _check_square_symmetric(self.matrix, "Gram matrix")
        )

    @property
    def n(self):
        return self.matrix.shape[0]

    def diag_residual(self):
        return float(np.max(np.abs(np.diag(self.matrix) - 1.0)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "matrix": self.matrix.tolist()}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GramForm":
        doc = json.loads(text)
        return GramForm(np.asarray(doc["matrix"], dtype=float))


@dataclass(frozen=True)
class ZForm:
    """Matrix with z_ij = 1 - x_ij; zero diagonal, entries in [0, 2]."""

    matrix: np.ndarray

    def __post_init__(self):
        z = _check_square_symmetric(self.matrix, "Z matrix").copy()
        np.fill_diagonal(z, 0.0)
        object.__setattr__(self, "matrix", z)

    @property
    def n(self):
        return self.matrix.shape[0]

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "matrix": self.matrix.tolist()}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ZForm":
        doc = json.loads(text)
        return ZForm(np.asarray(doc["matrix"], dtype=float))


@dataclass(frozen=True)
class FeasibilityReport:
    max_unit_violation: float
    max_triangle_violation: float
    spread_slack: float
    feasible: bool


def cut_to_embedding(g: Graph, s: Cut) -> Embedding:
    """One-dimensional +/-1 embedding: members of s at +1, the rest at -1."""
    s.validate(g)
    v = -np.ones((g.n, 1))
    for i in s.members:
        v[i, 0] = 1.0
    return Embedding(v)


def objective(g: Graph, e: Embedding, p: float) -> float:
    """(1/2^p) * sum over edges of ||v_i - v_j||^p."""
    ea = g.edge_array()
    if len(ea) == 0:
        return 0.0
    diff = e.vectors[ea[:, 0]] - e.vectors[ea[:, 1]]
    dist = np.linalg.norm(diff, axis=1)
    return float(np.sum(dist**p) / 2.0**p)


def spread(e: Embedding) -> float:
    """Sum over all pairs i < j of squared distances."""
    d = e.distance_matrix()
    return float(np.sum(np.triu(d * d, k=1)))


def spread_requirement(n: int, c: float) -> float:
    return 4.0 * c * (1.0 - c) * n * n


def max_triangle_violation(dist_pow: np.ndarray, sample_seed: int = 0) -> float:
    """Largest D[i,k] - D[i,j] - D[j,k] over ordered triples of a symmetric
    nonnegative matrix.  Full n^3 scan up to TRIANGLE_ENUM_LIMIT, seeded
    sampling beyond."""
    d = dist_pow
    n = d.shape[0]
    if n < 3:
        return 0.0
    if n <= TRIANGLE_ENUM_LIMIT:
        worst = -np.inf
        for j in range(n):
            m = d - d[:, j][:, None] - d[j, :][None, :]
            worst = max(worst, float(m.max()))
        return worst
    rng = np.random.default_rng(sample_seed)
    idx = rng.integers(0, n, size=(200000, 3))
    i, j, k = idx[:, 0], idx[:, 1], idx[:, 2]
    return float(np.max(d[i, k] - d[i, j] - d[j, k]))


def check_feasibility(
    e: Embedding,
    params: RelaxationParams,
    tol_unit: float = TOL_UNIT,
    tol_triangle: float = TOL_TRIANGLE,
    tol_spread: float = TOL_SPREAD,
) -> FeasibilityReport:
    """Residuals of the three constraint families at exponent params.p:
    unit norms, the l2^p triangle inequality over ordered triples, and the
    all-pairs spread lower bound."""
    unit = float(np.max(np.abs(e.norms() - 1.0)))
    dist = e.distance_matrix()
    tri = max_triangle_violation(dist**params.p)
    slack = spread(e) - spread_requirement(e.n, params.c)
    ok = unit <= tol_unit and tri <= tol_triangle and slack >= -tol_spread
    return FeasibilityReport(unit, tri, slack, ok)


def gram_from_embedding(e: Embedding) -> GramForm:
    v = e.vectors
    x = v @ v.T
    x = (x + x.T) / 2.0
    return GramForm(x)


def embedding_from_gram(x: GramForm, tol: float = TOL_PSD) -> Embedding:
    """Factor X into unit-ish vectors: eigenvalues in [-tol, 0) clip to zero,
    anything below -tol is rejected; the ambient dimension is the numerical
    rank (relative cutoff), so meaningful small directions survive."""
    w, q = np.linalg.eigh(x.matrix)
    if w[0] < -tol:
        raise NotPsdError(f"minimum eigenvalue {w[0]:.3e} below -{tol:.1e}")
    rank_floor = x.n * np.finfo(float).eps * max(float(w[-1]), 1.0)
    keep = w > rank_floor
    v = q[:, keep] * np.sqrt(w[keep])
    if v.shape[1] == 0:
        v = np.zeros((x.n, 1))
    return Embedding(v)


def z_from_gram(x: GramForm) -> ZForm:
    return ZForm(1.0 - x.matrix)


def gram_from_z(z: ZForm) -> GramForm:
    x = 1.0 - z.matrix
    return GramForm(x)


def objective_z(g: Graph, z: ZForm, p: float, tol: float = 1e-9) -> float:
    """(1/2^(p/2)) * sum over edges of z_ij^(p/2); equals the vector-form
    objective whenever z derives from an embedding."""
    ea = g.edge_array()
    if len(ea) == 0:
        return 0.0
    vals = z.matrix[ea[:, 0], ea[:, 1]]
    if np.min(vals, initial=0.0) < -tol:
        raise ValueError(f"negative z entry {vals.min():.3e} outside tolerance")
    vals = np.maximum(vals, 0.0)
    return float(np.sum(vals ** (p / 2.0)) / 2.0 ** (p / 2.0))


def zform_spread(z: ZForm) -> float:
    return float(np.sum(np.triu(z.matrix, k=1)))


def zform_spread_requirement(n: int, c: float) -> float:
    # Sum_{i<j} z_ij >= 2c(1-c)n^2, the Z-side equivalent of the vector bound
    # (z_ij is half the squared distance for unit vectors).
    return 2.0 * c * (1.0 - c) * n * n
