"""Undirected simple graphs, cuts, and the exact balanced-separator oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

BRUTE_FORCE_CAP = 20


class GraphParseError(ValueError):
    """Malformed edge-list or DIMACS input."""


class InfeasibleBalanceError(ValueError):
    """No subset size satisfies cn < |S| < (1-c)n."""


class CapExceededError(ValueError):
    """Instance is larger than the configured brute-force cap."""


class UndefinedSparsityError(ValueError):
    """Sparsity requested for an empty or full vertex set."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1 with a canonical edge tuple."""

    n: int
    edges: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        canon = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{i}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            canon.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def m(self):
        return len(self.edges)

    def edge_array(self):
        """Edges as an (m, 2) int array; (0, 2) when there are none."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)


@dataclass(frozen=True)
class Cut:
    """A vertex subset; the complement side is implied."""

    members: frozenset

    def __init__(self, members):
        object.__setattr__(self, "members", frozenset(members))

    def sorted_members(self):
        return tuple(sorted(self.members))

    def complement(self, n):
        return Cut(set(range(n)) - self.members)

    def validate(self, g: Graph):
        for v in self.members:
            if not (0 <= v < g.n):
                raise ValueError(f"cut member {v} out of range for n={g.n}")


def load_graph(text: str) -> Graph:
    """Parse the edge-list format: header "n m", then "i j" lines.

    '#' lines are comments. The declared edge count is advisory; duplicate
    edges collapse. Errors name the offending 1-based line number.
    """
    lines = text.splitlines()
    header = None
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise GraphParseError(f"line {lineno}: header must be 'n m', got {raw!r}")
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphParseError(f"line {lineno}: header must be two integers") from None
            if n < 1 or m < 0:
                raise GraphParseError(f"line {lineno}: need n >= 1 and m >= 0")
            header = (n, m)
            continue
        if len(parts) != 2:
            raise GraphParseError(f"line {lineno}: edge line must be 'i j', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"line {lineno}: edge endpoints must be integers") from None
        n = header[0]
        if not (0 <= i < n and 0 <= j < n):
            bad = i if not (0 <= i < n) else j
            raise GraphParseError(f"line {lineno}: vertex {bad} out of range [0, {n})")
        if i == j:
            raise GraphParseError(f"line {lineno}: self-loop at vertex {i}")
        edges.append((i, j))
    if header is None:
        raise GraphParseError("empty input: missing 'n m' header")
    return Graph(header[0], tuple(edges))


def dump_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def load_dimacs(text: str) -> Graph:
    """Parse DIMACS ('c' comments, 'p edge n m', 'e i j' 1-based) into a Graph."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) < 4:
                raise GraphParseError(f"line {lineno}: malformed problem line {raw!r}")
            n = int(parts[2])
        elif parts[0] == "e":
            if n is None:
                raise GraphParseError(f"line {lineno}: edge before problem line")
            if len(parts) != 3:
                raise GraphParseError(f"line {lineno}: edge line must be 'e i j'")
            i, j = int(parts[1]) - 1, int(parts[2]) - 1
            if not (0 <= i < n and 0 <= j < n):
                raise GraphParseError(f"line {lineno}: vertex id out of range")
            if i == j:
                raise GraphParseError(f"line {lineno}: self-loop at vertex {i + 1}")
            edges.append((i, j))
        else:
            raise GraphParseError(f"line {lineno}: unrecognized line {raw!r}")
    if n is None:
        raise GraphParseError("missing 'p edge n m' line")
    return Graph(n, tuple(edges))


def cut_size(g: Graph, s: Cut) -> int:
    """Number of edges with exactly one endpoint in s."""
    s.validate(g)
    mem = s.members
    return sum((i in mem) != (j in mem) for i, j in g.edges)


def sparsity(g: Graph, s: Cut) -> Fraction:
    """|E(S, S-bar)| / |S| as an exact rational."""
    s.validate(g)
    k = len(s.members)
    if k == 0 or k == g.n:
        raise UndefinedSparsityError(f"sparsity undefined for |S|={k} with n={g.n}")
    return Fraction(cut_size(g, s), k)


def balanced_size_range(n: int, c) -> range:
    """Integer sizes s with cn < s < (1-c)n, computed in exact arithmetic."""
    cf = Fraction(c)
    lo_excl = cf * n
    hi_excl = (1 - cf) * n
    lo = int(lo_excl) + 1  # smallest integer strictly above lo_excl
    hi = int(hi_excl) - 1 if hi_excl.denominator == 1 else int(hi_excl)
    # clamp to proper nonempty subsets
    lo = max(lo, 1)
    hi = min(hi, n - 1)
    return range(lo, hi + 1)


def is_c_balanced(g: Graph, s: Cut, c) -> bool:
    """Strict balance test cn < |S| < (1-c)n, exact for rational c."""
    s.validate(g)
    k = len(s.members)
    cf = Fraction(c)
    return cf * g.n < k < (1 - cf) * g.n


def _popcount(masks):
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(masks)
    x = masks.astype(np.uint64)
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x >>= np.uint64(1)
    return out


def _lex_min_members(masks, n):
    """Lexicographically smallest sorted member tuple among the given masks.

    Greedy radix scan: at each vertex v, a candidate set that already ended is a
    prefix of (hence smaller than) every extension, and taking v beats skipping it.
    """
    cand = masks
    prefix = 0
    members = []
    for v in range(n):
        if np.any(cand == prefix):
            return tuple(members)
        bit = np.uint32(1) << np.uint32(v)
        with_v = cand[(cand & bit) != 0]
        if len(with_v):
            cand = with_v
            prefix |= int(bit)
            members.append(v)
    return tuple(members)


def exact_balanced_separator(g: Graph, c, cap: int = BRUTE_FORCE_CAP):
    """Exhaustive minimum c-balanced cut; ties broken by lexicographically
    smallest member set. Returns (Cut, value)."""
    if g.n > cap or g.n > 31:
        raise CapExceededError(
            f"n={g.n} exceeds brute-force cap {min(cap, 31)}; raise cap only if "
            f"you can afford 2^{g.n} subsets"
        )
    sizes = balanced_size_range(g.n, c)
    if len(sizes) == 0:
        raise InfeasibleBalanceError(f"no subset size satisfies {c}*{g.n} < |S| < {1 - Fraction(c)}*{g.n}")

    masks = np.arange(1, 1 << g.n, dtype=np.uint32)
    pops = _popcount(masks)
    keep = (pops >= sizes.start) & (pops <= sizes.stop - 1)
    masks = masks[keep]
    vals = np.zeros(len(masks), dtype=np.uint32)
    for i, j in g.edges:
        vals += ((masks >> np.uint32(i)) ^ (masks >> np.uint32(j))) & np.uint32(1)
    best = int(vals.min())
    winners = masks[vals == best]
    members = _lex_min_members(winners, g.n)
    return Cut(members), best


def brute_force_cut_values(g: Graph, c):
    """All (members, value) pairs over c-balanced subsets, pure-Python path.

    Independent of the vectorized oracle; intended for cross-checks and for
    enumerating warm starts on small instances.
    """
    out = []
    for k in balanced_size_range(g.n, c):
        for sub in combinations(range(g.n), k):
            s = Cut(sub)
            out.append((sub, cut_size(g, s)))
    return out
