"""Projection rounding: split an embedding along a random direction, delete
close cross pairs, and turn the separated sets into a balanced-ish cut via a
random distance threshold.  Also the Monte-Carlo check of the random-projection
tail bounds that the separation analysis leans on.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace

import numpy as np

from .embeddings import Embedding, embedding_from_gram, gram_from_z
from .graphs import (
    BRUTE_FORCE_CAP,
    Cut,
    Graph,
    InfeasibleBalanceError,
    balanced_size_range,
    cut_size,
    exact_balanced_separator,
)


class RoundingError(RuntimeError):
    """The produced region violated a structural guarantee (S inside, T outside)."""


@dataclass(frozen=True)
class RoundingParams:
    """Knobs of the set-find stage.  delta=None means use delta_target."""

    delta: float | None = None
    sigma: float = 1.0
    c_prime: float | None = None  # None: c/4, filled in by the pipeline
    b_const: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.sigma <= 0 or self.b_const <= 0:
            raise ValueError("sigma and b_const must be positive")
        if self.c_prime is not None and not (0.0 < self.c_prime < 0.5):
            raise ValueError("c_prime must lie in (0, 1/2)")


@dataclass(frozen=True)
class SeparatedSets:
    s_side: tuple
    t_side: tuple


@dataclass(frozen=True)
class SetFindResult:
    success: bool
    sets: SeparatedSets
    halted: bool  # stopped at the size check before deletion
    deleted_pairs: tuple
    median: float
    margin: float


def delta_target(n: int, p: float, b: float = 1.0) -> float:
    """Separation target b * (ln n)^(-(1 + p/2)/3)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if p <= 0 or b <= 0:
        raise ValueError("p and b must be positive")
    return b * math.log(n) ** (-(1.0 + p / 2.0) / 3.0)


def random_unit_vector(d: int, rng) -> np.ndarray:
    u = rng.standard_normal(d)
    norm = np.linalg.norm(u)
    while norm == 0.0:  # pragma: no cover - probability zero
        u = rng.standard_normal(d)
        norm = np.linalg.norm(u)
    return u / norm


def modified_set_find(
    e: Embedding,
    p: float,
    params: RoundingParams,
    rng,
    direction=None,
) -> SetFindResult:
    """One projection round: median split with sigma/(2 sqrt(d)) margins, then
    greedy pairwise deletion of cross pairs at ||.||^p distance <= delta.

    `direction` forces the projection direction (used by the deterministic
    fixtures); otherwise a uniform random unit vector is drawn from rng.
    For even n the median is the midpoint of the two central projections,
    which keeps both margins meaningful.  Success means both sides still hold
    at least c'n vectors after deletion.
    """
    if params.delta is None or params.c_prime is None:
        raise ValueError("set-find needs explicit delta and c_prime")
    n, d = e.n, e.d
    u = np.asarray(direction, dtype=float) if direction is not None else random_unit_vector(d, rng)
    proj = e.vectors @ u
    med = float(np.median(proj))
    margin = params.sigma / (2.0 * math.sqrt(d))
    s_prime = [i for i in range(n) if proj[i] >= med + margin]
    t_prime = [i for i in range(n) if proj[i] <= med - margin]
    threshold = 2.0 * params.c_prime * n
    if len(s_prime) <= threshold or len(t_prime) <= threshold:
        return SetFindResult(
            success=False,
            sets=SeparatedSets(tuple(s_prime), tuple(t_prime)),
            halted=True,
            deleted_pairs=(),
            median=med,
            margin=margin,
        )
    dist = e.distance_matrix() ** p
    alive_s = dict.fromkeys(s_prime, True)
    alive_t = dict.fromkeys(t_prime, True)
    deleted = []
    for i in s_prime:
        if not alive_s[i]:
            continue
        for j in t_prime:
            if not alive_t[j]:
                continue
            if dist[i, j] <= params.delta:
                alive_s[i] = False
                alive_t[j] = False
                deleted.append((i, j))
                break
    s_side = tuple(i for i in s_prime if alive_s[i])
    t_side = tuple(j for j in t_prime if alive_t[j])
    ok = len(s_side) >= params.c_prime * n and len(t_side) >= params.c_prime * n
    return SetFindResult(
        success=ok,
        sets=SeparatedSets(s_side, t_side),
        halted=False,
        deleted_pairs=tuple(deleted),
        median=med,
        margin=margin,
    )


def check_separated(e: Embedding, s_side, t_side, p: float, delta: float):
    """True iff every cross pair is at ||.||^p distance >= delta; also returns
    the closest pair (None when a side is empty)."""
    if not s_side or not t_side:
        return True, None
    dist = e.distance_matrix() ** p
    block = dist[np.ix_(list(s_side), list(t_side))]
    k = np.unravel_index(np.argmin(block), block.shape)
    worst = (s_side[k[0]], t_side[k[1]])
    return bool(block[k] >= delta), worst


def produce_cut(g: Graph, e: Embedding, p: float, sep: SeparatedSets, delta: float, rng) -> Cut:
    """Threshold cut: weight each edge ||v_i - v_j||^p and take V_r, the
    vertices within shortest-path distance r of the S side, for r uniform
    in [0, delta).

    Weights are unnormalized so that the power-triangle inequality makes every
    S-to-T path at least delta long; unreachable vertices count as infinitely
    far and land outside.  Raises RoundingError if T still intersects V_r.
    """
    if not sep.s_side or not sep.t_side:
        raise ValueError("both sides of the separation must be nonempty")
    dist_m = e.distance_matrix() ** p
    adjacency = [[] for _ in range(g.n)]
    for i, j in g.edges:
        w = float(dist_m[i, j])
        adjacency[i].append((j, w))
        adjacency[j].append((i, w))
    dist = [math.inf] * g.n
    heap = []
    for s in sep.s_side:
        dist[s] = 0.0
        heapq.heappush(heap, (0.0, s))
    while heap:
        d0, v = heapq.heappop(heap)
        if d0 > dist[v]:
            continue
        for w, wt in adjacency[v]:
            nd = d0 + wt
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    r = float(rng.uniform(0.0, delta))
    members = {v for v in range(g.n) if dist[v] <= r}
    if not set(sep.s_side) <= members:
        raise RoundingError("S side escaped the threshold region")
    if members & set(sep.t_side):
        raise RoundingError(
            "T side entered the threshold region; separation or feasibility "
            "of the embedding must have been violated"
        )
    return Cut(members)


@dataclass(frozen=True)
class PipelineReport:
    relaxation_value: float
    cut_members: tuple | None
    cut_size: int | None
    balance: float | None
    ratio: float | None
    attempts: int
    succeeded: bool
    delta: float
    exact_value: int | None
    p: float
    c: float
    seed: int

    def to_dict(self):
        return {
            "relaxation_value": self.relaxation_value,
            "cut_members": list(self.cut_members) if self.cut_members is not None else None,
            "cut_size": self.cut_size,
            "balance": self.balance,
            "ratio": self.ratio,
            "attempts": self.attempts,
            "succeeded": self.succeeded,
            "delta": self.delta,
            "exact_value": self.exact_value,
            "p": self.p,
            "c": self.c,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PipelineOptions:
    rounding: RoundingParams = RoundingParams()
    retries: int = 64
    seed: int = 0
    solver_seed: int | None = None  # None: use seed
    starts: int = 4  # concave multistart width
    exact_cap: int = BRUTE_FORCE_CAP


def attempt_rng(seed: int, attempt: int):
    """Independent, reproducible stream for one set-find attempt."""
    return np.random.default_rng([seed, 7_919, attempt])


def pipeline(
    g: Graph,
    c: float,
    p: float,
    opts: PipelineOptions = PipelineOptions(),
    embedding: Embedding | None = None,
    relaxation_value: float | None = None,
) -> PipelineReport:
    """Solve the exponent-p relaxation, round with repeated set-find attempts,
    and report the produced cut against the relaxation and the exact optimum.

    A precomputed (embedding, relaxation_value) pair skips the solve; that is
    how the CLI chains a stored solver artifact into the rounding stage.
    """
    if len(balanced_size_range(g.n, c)) == 0:
        raise InfeasibleBalanceError(f"no c-balanced subset size for c={c}, n={g.n}")
    solver_seed = opts.seed if opts.solver_seed is None else opts.solver_seed
    if embedding is None or relaxation_value is None:
        if p == 2.0:
            from .sdp import SdpOptions, solve_sdp

            x, rep = solve_sdp(g, c, SdpOptions(seed=solver_seed))
            embedding = embedding_from_gram(x)
            relaxation_value = rep.value
        else:
            from .concave import ConcaveOptions, solve_concave

            zf, rep = solve_concave(
                g, c, p, ConcaveOptions(starts=opts.starts, seed=solver_seed)
            )
            embedding = embedding_from_gram(gram_from_z(zf))
            relaxation_value = rep.value

    params = opts.rounding
    if params.c_prime is None:
        params = replace(params, c_prime=c / 4.0)
    delta = params.delta if params.delta is not None else delta_target(g.n, p, params.b_const)
    params = replace(params, delta=delta)

    exact = None
    if g.n <= opts.exact_cap:
        _, exact = exact_balanced_separator(g, c, cap=opts.exact_cap)

    for attempt in range(opts.retries):
        rng = attempt_rng(opts.seed, attempt)
        found = modified_set_find(embedding, p, params, rng)
        if not found.success:
            continue
        cut = produce_cut(g, embedding, p, found.sets, delta, rng)
        size = cut_size(g, cut)
        k = len(cut.members)
        denom = max(relaxation_value, exact) if exact is not None else relaxation_value
        ratio = size / denom if denom > 0 else (math.inf if size > 0 else 1.0)
        return PipelineReport(
            relaxation_value=relaxation_value,
            cut_members=cut.sorted_members(),
            cut_size=size,
            balance=min(k, g.n - k) / g.n,
            ratio=ratio,
            attempts=attempt + 1,
            succeeded=True,
            delta=delta,
            exact_value=exact,
            p=p,
            c=c,
            seed=opts.seed,
        )
    return PipelineReport(
        relaxation_value=relaxation_value,
        cut_members=None,
        cut_size=None,
        balance=None,
        ratio=None,
        attempts=opts.retries,
        succeeded=False,
        delta=delta,
        exact_value=exact,
        p=p,
        c=c,
        seed=opts.seed,
    )


@dataclass(frozen=True)
class ProjectionTestResult:
    d: int
    length: float
    x: float
    samples: int
    empirical_low: float  # Pr{|<v,u>| <= x l / sqrt(d)}
    empirical_high: float  # Pr{|<v,u>| >= x l / sqrt(d)}
    bound_low: float | None  # 3x, valid for x < 1
    bound_high: float | None  # e^{-x^2/4}, valid for x <= sqrt(d)/4


def gaussian_projection_test(
    d: int, length: float, x: float, samples: int = 100_000, seed: int = 0
) -> ProjectionTestResult:
    """Monte-Carlo estimate of both projection probabilities for a fixed
    vector of the given length against uniform random unit directions.
    Bounds outside their validity range come back as None."""
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples for a meaningful estimate")
    if x < 0:
        raise ValueError("x must be nonnegative")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((samples, d))
    norms = np.linalg.norm(u, axis=1)
    dots = np.abs(length * u[:, 0] / norms)
    thr = x * length / math.sqrt(d)
    emp_low = float(np.mean(dots <= thr))
    emp_high = float(np.mean(dots >= thr))
    bound_low = 3.0 * x if x < 1.0 else None
    bound_high = math.exp(-x * x / 4.0) if 0.0 < x <= math.sqrt(d) / 4.0 else None
    return ProjectionTestResult(
        d=d,
        length=length,
        x=x,
        samples=samples,
        empirical_low=emp_low,
        empirical_high=emp_high,
        bound_low=bound_low,
        bound_high=bound_high,
    )
