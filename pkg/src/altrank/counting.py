"""Exact counts of alternating integer matrices by rank, and the two
Gram-determinant identities for wedge bases built from lattice vectors.

Counting norms: "box" bounds every entry (|a_ij| <= bound), "l2" bounds
the Frobenius norm strictly (sum of squares of all entries < bound^2,
i.e. 2 * sum over the upper triangle).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

from .fitting import FitResult, exponent_fit
from .linalg import (
    AlternatingMatrix,
    IntegerMatrix,
    _alternating_rank,
    _upper_index,
    determinant,
    pfaffian,
)
from .primes import is_squarefree

__all__ = [
    "CapExceededError",
    "RankHistogram",
    "LatticeBasis",
    "Estimate",
    "CountFit",
    "count_alternating_by_rank",
    "fit_counting_exponent",
    "gram_matrix",
    "gram_det",
    "build_wedge_basis",
    "check_inner_product_identity",
    "check_det_identity",
    "squarefree_pfaffian_fraction",
]

ENUMERATION_CAP = 10**9


class CapExceededError(ValueError):
    """The requested exact enumeration would visit too many cells."""


class Estimate(NamedTuple):
    value: float
    stderr: float


class CountFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    used_bounds: tuple
    skipped_bounds: tuple


@dataclass(frozen=True)
class RankHistogram:
    n: int
    bound: int
    norm: str
    counts: dict

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def at_most(self, r: int) -> int:
        return sum(c for k, c in self.counts.items() if k <= r)


def _pfaffian_zero_count_box(x: int) -> int:
    """#{alternating 4x4, entries in [-x, x], Pfaffian = 0}, exactly.

    The Pfaffian is u - v + w for three independent products of entry
    pairs, so the count is a convolution of the product-distribution
    vector with itself.
    """
    span = x * x
    prod_counts = [0] * (2 * span + 1)
    for s in range(-x, x + 1):
        for t in range(-x, x + 1):
            prod_counts[s * t + span] += 1
    total = 0
    for u in range(-span, span + 1):
        pu = prod_counts[u + span]
        if not pu:
            continue
        for v in range(max(-span, u - span), min(span, u + span) + 1):
            pv = prod_counts[v + span]
            if pv:
                total += pu * pv * prod_counts[v - u + span]
    return total


def count_alternating_by_rank(
    n: int, bound: int, norm: str = "box", cap: int = ENUMERATION_CAP
) -> RankHistogram:
    """Exact histogram of rank over a finite family of alternating matrices."""
    if n < 0 or bound < 0:
        raise ValueError("dimension and bound must be nonnegative")
    if norm not in ("box", "l2"):
        raise ValueError(f"unknown norm {norm!r}")
    m = n * (n - 1) // 2
    if norm == "box":
        cells = (2 * bound + 1) ** m
        if cells > cap:
            raise CapExceededError(f"{cells} cells exceed cap {cap}")
        if n <= 1:
            return RankHistogram(n, bound, norm, {0: 1})
        if n == 2:
            return RankHistogram(n, bound, norm, {0: 1, 2: 2 * bound})
        if n == 4:
            # rank <= 2 is exactly Pfaffian = 0; rank 0 is the zero matrix
            z = _pfaffian_zero_count_box(bound)
            counts = {0: 1, 2: z - 1, 4: cells - z}
            return RankHistogram(n, bound, norm, {k: v for k, v in counts.items() if v})
        counts: Counter = Counter()
        rng = range(-bound, bound + 1)
        for upper in product(rng, repeat=m):
            counts[_alternating_rank(n, upper)] += 1
        return RankHistogram(n, bound, norm, dict(counts))

    # l2: strict bound |A| < bound, i.e. 2 * sum a_ij^2 <= bound^2 - 1
    budget = (bound * bound - 1) // 2
    est = (2 * math.isqrt(budget) + 1) ** m if m else 1
    if est > cap:
        raise CapExceededError(f"about {est} cells exceed cap {cap}")
    counts = Counter()
    upper = [0] * m

    def rec(idx: int, rem: int):
        if idx == m:
            counts[_alternating_rank(n, upper)] += 1
            return
        amax = math.isqrt(rem)
        for v in range(-amax, amax + 1):
            upper[idx] = v
            rec(idx + 1, rem - v * v)
        upper[idx] = 0

    if m == 0:
        counts[0] += 1
    else:
        rec(0, budget)
    return RankHistogram(n, bound, norm, dict(counts))


def fit_counting_exponent(
    n: int, r: int, bounds, norm: str = "l2", min_count: int = 20
) -> CountFit:
    """Log-log slope of the rank-r census against the bound.

    l2 mode counts matrices of rank exactly r (expected slope n*r/2);
    box mode counts rank <= r (expected slope n*(n-r)/2).  Bounds whose
    count is zero are skipped and reported.  Points below `min_count`
    are dropped unless that would leave fewer than three points, in
    which case every positive count is used.
    """
    bounds = list(bounds)
    if len(bounds) < 4:
        raise ValueError("need at least four bounds")
    pts = []
    skipped = []
    for b in bounds:
        hist = count_alternating_by_rank(n, b, norm)
        y = hist.at_most(r) if norm == "box" else hist.counts.get(r, 0)
        if y == 0:
            skipped.append(b)
        else:
            pts.append((b, y))
    big = [(b, y) for b, y in pts if y >= min_count]
    used = big if len(big) >= 3 else pts
    if len(used) < 3:
        raise ValueError("too few nonzero counts to fit")
    fit = exponent_fit(used)
    return CountFit(
        fit.slope,
        fit.intercept,
        fit.r_squared,
        tuple(b for b, _ in used),
        tuple(skipped),
    )


# ---------------------------------------------------------------------------
# lattice bases and wedge matrices


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True)
class LatticeBasis:
    """Tuple of linearly independent integer vectors of equal dimension."""

    vectors: tuple

    def __post_init__(self):
        vecs = tuple(tuple(int(x) for x in v) for v in self.vectors)
        object.__setattr__(self, "vectors", vecs)
        if not vecs:
            raise ValueError("basis must be nonempty")
        dim = len(vecs[0])
        if any(len(v) != dim for v in vecs):
            raise ValueError("vectors must share a dimension")
        if len(vecs) > dim:
            raise ValueError("more vectors than the ambient dimension")
        if gram_det(self) == 0:
            raise ValueError("vectors are linearly dependent")

    @property
    def r(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return len(self.vectors[0])


def gram_matrix(basis: LatticeBasis) -> IntegerMatrix:
    vecs = basis.vectors
    return IntegerMatrix.from_rows([[_dot(u, v) for v in vecs] for u in vecs])


def gram_det(basis) -> int:
    # accept a LatticeBasis or a raw sequence of vectors (used during
    # LatticeBasis validation, before the instance exists)
    vecs = basis.vectors if isinstance(basis, LatticeBasis) else tuple(basis)
    g = IntegerMatrix.from_rows([[_dot(u, v) for v in vecs] for u in vecs])
    return determinant(g)


def build_wedge_basis(basis: LatticeBasis) -> list:
    """Alternating matrices v_i (x) v_j - v_j (x) v_i for i < j."""
    if basis.r < 2:
        raise ValueError("need at least two vectors")
    vecs = basis.vectors
    n = basis.dim
    out = []
    for i in range(basis.r):
        for j in range(i + 1, basis.r):
            vi, vj = vecs[i], vecs[j]
            upper = []
            for s in range(n):
                for t in range(s + 1, n):
                    upper.append(vi[s] * vj[t] - vj[s] * vi[t])
            out.append(AlternatingMatrix(n, tuple(upper)))
    return out


def _frobenius_alt(a: AlternatingMatrix, b: AlternatingMatrix) -> int:
    # full-matrix inner product; upper entries each appear twice
    return 2 * sum(x * y for x, y in zip(a.upper, b.upper))


def check_inner_product_identity(basis: LatticeBasis) -> bool:
    """(w_ij, w_st) == 2 (v_i . v_s)(v_j . v_t) - 2 (v_i . v_t)(v_j . v_s)
    for every pair of wedge matrices, exactly."""
    vecs = basis.vectors
    wedges = build_wedge_basis(basis)
    pairs = [(i, j) for i in range(basis.r) for j in range(i + 1, basis.r)]
    for a, (i, j) in enumerate(pairs):
        for b, (s, t) in enumerate(pairs):
            lhs = _frobenius_alt(wedges[a], wedges[b])
            rhs = 2 * _dot(vecs[i], vecs[s]) * _dot(vecs[j], vecs[t]) - 2 * _dot(
                vecs[i], vecs[t]
            ) * _dot(vecs[j], vecs[s])
            if lhs != rhs:
                return False
    return True


def check_det_identity(basis: LatticeBasis) -> bool:
    """det Gram(wedges) == 2^(r(r-1)/2) * det Gram(vectors)^(r-1), exactly."""
    r = basis.r
    if r < 2:
        raise ValueError("need at least two vectors")
    wedges = build_wedge_basis(basis)
    g = IntegerMatrix.from_rows(
        [[_frobenius_alt(a, b) for b in wedges] for a in wedges]
    )
    lhs = determinant(g)
    rhs = 2 ** (r * (r - 1) // 2) * gram_det(basis) ** (r - 1)
    return lhs == rhs


def squarefree_pfaffian_fraction(n: int, x: int, samples: int, rng) -> Estimate:
    """Monte Carlo fraction of draws whose |Pfaffian| is squarefree.

    Zero Pfaffians count as not squarefree.  Entries are iid uniform on
    [-x, x]; n must be even.
    """
    if n % 2 or n <= 0:
        raise ValueError("n must be positive and even")
    if samples <= 0:
        raise ValueError("need a positive sample count")
    m = n * (n - 1) // 2
    hits = 0
    for _ in range(samples):
        upper = tuple(rng.randint(-x, x) for _ in range(m))
        pf = pfaffian(AlternatingMatrix(n, upper))
        if pf and is_squarefree(abs(pf)):
            hits += 1
    p = hits / samples
    return Estimate(p, math.sqrt(p * (1.0 - p) / samples))
