"""Exact integer linear algebra for dense and alternating matrices.

All arithmetic is arbitrary-precision and exact.  The hot paths (rank,
divisor-only Smith reduction, small-dimension alternating rank ladders)
operate on plain lists of Python ints; the frozen dataclasses are thin
immutable wrappers around that storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .groups import AbelianPGroup

__all__ = [
    "IntegerMatrix",
    "AlternatingMatrix",
    "SmithDecomposition",
    "CokernelStructure",
    "rank",
    "kernel_rank",
    "determinant",
    "pfaffian",
    "smith_normal_form",
    "smith_divisors",
    "divisors_from_minors",
    "cokernel",
    "cokernel_p_part",
    "matmul",
]


def _upper_index(n: int, i: int, j: int) -> int:
    """Position of a_ij (i < j) in row-major upper-triangle storage."""
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class IntegerMatrix:
    """Dense row-major integer matrix of any shape."""

    n_rows: int
    n_cols: int
    entries: tuple

    def __post_init__(self):
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.n_rows * self.n_cols:
            raise ValueError("entry storage length does not match dimensions")

    @classmethod
    def from_rows(cls, rows) -> "IntegerMatrix":
        rows = [list(r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if rows else 0
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return cls(m, n, tuple(v for r in rows for v in r))

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def entry(self, i: int, j: int) -> int:
        return self.entries[i * self.n_cols + j]

    def to_rows(self) -> list:
        n = self.n_cols
        return [list(self.entries[i * n : (i + 1) * n]) for i in range(self.n_rows)]


@dataclass(frozen=True)
class AlternatingMatrix:
    """n x n integer matrix with zero diagonal and a_ji = -a_ij.

    Only the n(n-1)/2 strictly-upper entries are stored, row-major:
    (a_01, a_02, ..., a_0(n-1), a_12, ...).
    """

    n: int
    upper: tuple

    def __post_init__(self):
        if not isinstance(self.upper, tuple):
            object.__setattr__(self, "upper", tuple(self.upper))
        if self.n < 0:
            raise ValueError("dimension must be nonnegative")
        if len(self.upper) != self.n * (self.n - 1) // 2:
            raise ValueError("upper-triangle storage length does not match n")

    def entry(self, i: int, j: int) -> int:
        if i == j:
            return 0
        if i < j:
            return self.upper[_upper_index(self.n, i, j)]
        return -self.upper[_upper_index(self.n, j, i)]

    def to_integer_matrix(self) -> IntegerMatrix:
        n = self.n
        flat = [0] * (n * n)
        idx = 0
        for i in range(n):
            base = i * n
            for j in range(i + 1, n):
                v = self.upper[idx]
                idx += 1
                flat[base + j] = v
                flat[j * n + i] = -v
        return IntegerMatrix(n, n, tuple(flat))


@dataclass(frozen=True)
class SmithDecomposition:
    """U @ A @ V = diag(divisors), with U, V unimodular.

    Only the divisor chain is contractually stable; the transforms are
    one valid choice among many.
    """

    U: IntegerMatrix
    V: IntegerMatrix
    divisors: tuple


@dataclass(frozen=True)
class CokernelStructure:
    """Shape of Z^n / (column space): free rank plus invariant factors >= 2."""

    free_rank: int
    torsion: tuple

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.torsion:
            out *= d
        return out


# ---------------------------------------------------------------------------
# rank / determinant (fraction-free elimination)


def _rank_rows(rows, m: int, n: int) -> int:
    """Exact rank by Bareiss-style fraction-free elimination.

    Mutates `rows`.  Column skipping keeps the one-step-delayed divisor
    exact (entries stay minors of the column-filtered matrix).
    """
    r = 0
    prev = 1
    for col in range(n):
        piv = -1
        for i in range(r, m):
            if rows[i][col]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            rows[piv], rows[r] = rows[r], rows[piv]
        rr = rows[r]
        pv = rr[col]
        for i in range(r + 1, m):
            ri = rows[i]
            rv = ri[col]
            if rv:
                for j in range(col + 1, n):
                    ri[j] = (ri[j] * pv - rv * rr[j]) // prev
                ri[col] = 0
            else:
                # zero-lead rows still need the Bareiss rescale, or the
                # delayed exact division breaks at the next step
                for j in range(col + 1, n):
                    ri[j] = (ri[j] * pv) // prev
        prev = pv
        r += 1
        if r == m:
            break
    return r


def rank(m) -> int:
    """Exact rank over the rationals of an IntegerMatrix or AlternatingMatrix."""
    if isinstance(m, AlternatingMatrix):
        return _alternating_rank(m.n, m.upper)
    return _rank_rows(m.to_rows(), m.n_rows, m.n_cols)


def kernel_rank(a: AlternatingMatrix) -> int:
    """n - rank(a); congruent to n mod 2 since alternating rank is even."""
    return a.n - _alternating_rank(a.n, a.upper)


def determinant(m: IntegerMatrix) -> int:
    if m.n_rows != m.n_cols:
        raise ValueError("determinant needs a square matrix")
    n = m.n_rows
    if n == 0:
        return 1
    rows = m.to_rows()
    sign = 1
    prev = 1
    for col in range(n - 1):
        piv = -1
        for i in range(col, n):
            if rows[i][col]:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != col:
            rows[piv], rows[col] = rows[col], rows[piv]
            sign = -sign
        rr = rows[col]
        pv = rr[col]
        for i in range(col + 1, n):
            ri = rows[i]
            rv = ri[col]
            for j in range(col + 1, n):
                ri[j] = (ri[j] * pv - rv * rr[j]) // prev
            ri[col] = 0
        prev = pv
    return sign * rows[n - 1][n - 1]


def matmul(a: IntegerMatrix, b: IntegerMatrix) -> IntegerMatrix:
    if a.n_cols != b.n_rows:
        raise ValueError("inner dimensions do not match")
    ar = a.to_rows()
    br = b.to_rows()
    out = []
    for i in range(a.n_rows):
        rai = ar[i]
        row = [0] * b.n_cols
        for k in range(a.n_cols):
            v = rai[k]
            if v:
                rbk = br[k]
                for j in range(b.n_cols):
                    row[j] += v * rbk[j]
        out.append(row)
    return IntegerMatrix.from_rows(out) if out else IntegerMatrix(0, b.n_cols, ())


# ---------------------------------------------------------------------------
# Pfaffian and alternating rank


def pfaffian(a: AlternatingMatrix) -> int:
    """Integer Pfaffian; satisfies pfaffian(a)**2 == det(a).

    Odd dimension returns 0 by convention (odd alternating matrices are
    singular).  Uses memoized expansion along the first remaining index.
    """
    n = a.n
    if n % 2:
        return 0
    if n == 0:
        return 1
    up = a.upper
    memo: dict = {}

    def pf(idx):
        if len(idx) == 2:
            return up[_upper_index(n, idx[0], idx[1])]
        val = memo.get(idx)
        if val is not None:
            return val
        i0 = idx[0]
        rest = idx[1:]
        total = 0
        sign = 1
        for u in range(len(rest)):
            # pair i0 with rest[u]; sign alternates with the gap size
            aij = up[_upper_index(n, i0, rest[u])]
            if aij:
                total += sign * aij * pf(rest[:u] + rest[u + 1 :])
            sign = -sign
        memo[idx] = total
        return total

    return pf(tuple(range(n)))


def _pf4(up, n, i, j, k, l):
    return (
        up[_upper_index(n, i, j)] * up[_upper_index(n, k, l)]
        - up[_upper_index(n, i, k)] * up[_upper_index(n, j, l)]
        + up[_upper_index(n, i, l)] * up[_upper_index(n, j, k)]
    )


def _alternating_rank(n: int, upper) -> int:
    """Rank of an alternating matrix given its upper entries.

    n <= 6 walks the principal-Pfaffian ladder (rank equals the largest
    2m with a nonvanishing principal 2m-Pfaffian); larger n falls back
    to fraction-free elimination on the full matrix.
    """
    if not any(upper):
        return 0
    if n <= 3:
        return 2
    if n == 4:
        u = upper
        return 4 if u[0] * u[5] - u[1] * u[4] + u[2] * u[3] else 2
    if n == 5:
        for c in combinations(range(5), 4):
            if _pf4(upper, 5, *c):
                return 4
        return 2
    if n == 6:
        if pfaffian(AlternatingMatrix(6, tuple(upper))):
            return 6
        for c in combinations(range(6), 4):
            if _pf4(upper, 6, *c):
                return 4
        return 2
    flat = [0] * (n * n)
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            v = upper[idx]
            idx += 1
            flat[i * n + j] = v
            flat[j * n + i] = -v
    rows = [flat[i * n : (i + 1) * n] for i in range(n)]
    return _rank_rows(rows, n, n)


# ---------------------------------------------------------------------------
# Smith normal form


def _smith_core(rows, m: int, n: int, track: bool):
    """Reduce `rows` in place to Smith form.

    Returns (divisors, U_rows, V_rows); the transform rows are None when
    track is False.  Pivoting always picks the entry of least magnitude
    to limit coefficient growth.
    """
    U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if track else None
    mn = min(m, n)
    t = 0
    while t < mn:
        # locate the smallest nonzero entry of the trailing block
        best = 0
        bi = bj = -1
        for i in range(t, m):
            ri = rows[i]
            for j in range(t, n):
                v = ri[j]
                if v:
                    av = -v if v < 0 else v
                    if bi < 0 or av < best:
                        best, bi, bj = av, i, j
                        if av == 1:
                            break
            if best == 1:
                break
        if bi < 0:
            break
        if bi != t:
            rows[bi], rows[t] = rows[t], rows[bi]
            if track:
                U[bi], U[t] = U[t], U[bi]
        if bj != t:
            for r in rows:
                r[bj], r[t] = r[t], r[bj]
            if track:
                for r in V:
                    r[bj], r[t] = r[t], r[bj]

        while True:
            # clear row t and column t; the pivot magnitude strictly
            # decreases every time a remainder is swapped in, so this
            # terminates
            while True:
                if rows[t][t] < 0:
                    rows[t] = [-v for v in rows[t]]
                    if track:
                        U[t] = [-v for v in U[t]]
                p = rows[t][t]
                moved = False
                for i in range(t + 1, m):
                    v = rows[i][t]
                    if v:
                        q = v // p
                        if q:
                            ri, rt = rows[i], rows[t]
                            for jj in range(t, n):
                                ri[jj] -= q * rt[jj]
                            if track:
                                ui, ut = U[i], U[t]
                                for jj in range(m):
                                    ui[jj] -= q * ut[jj]
                        if rows[i][t]:
                            rows[i], rows[t] = rows[t], rows[i]
                            if track:
                                U[i], U[t] = U[t], U[i]
                            moved = True
                            break
                if moved:
                    continue
                for j in range(t + 1, n):
                    v = rows[t][j]
                    if v:
                        q = v // p
                        if q:
                            for r in rows:
                                r[j] -= q * r[t]
                            if track:
                                for r in V:
                                    r[j] -= q * r[t]
                        if rows[t][j]:
                            for r in rows:
                                r[j], r[t] = r[t], r[j]
                            if track:
                                for r in V:
                                    r[j], r[t] = r[t], r[j]
                            moved = True
                            break
                if not moved:
                    break

            # divisor-chain repair: every trailing entry must be a
            # multiple of the pivot
            p = rows[t][t]
            if p == 1:
                break
            carrier = -1
            for i in range(t + 1, m):
                ri = rows[i]
                for j in range(t + 1, n):
                    if ri[j] % p:
                        carrier = i
                        break
                if carrier >= 0:
                    break
            if carrier < 0:
                break
            rt, rc = rows[t], rows[carrier]
            for jj in range(t, n):
                rt[jj] += rc[jj]
            if track:
                ut, uc = U[t], U[carrier]
                for jj in range(m):
                    ut[jj] += uc[jj]
        t += 1

    divisors = tuple(rows[i][i] for i in range(mn))
    return divisors, U, V


def _as_rows(m) -> tuple:
    if isinstance(m, AlternatingMatrix):
        m = m.to_integer_matrix()
    return m.to_rows(), m.n_rows, m.n_cols


def smith_normal_form(m) -> SmithDecomposition:
    """Smith decomposition of an IntegerMatrix or AlternatingMatrix.

    divisors d_1 | d_2 | ... are nonnegative with zeros trailing; the
    returned transforms satisfy U @ A @ V == diag(divisors) exactly.
    """
    rows, nr, nc = _as_rows(m)
    divisors, U, V = _smith_core(rows, nr, nc, track=True)
    return SmithDecomposition(
        U=IntegerMatrix.from_rows(U) if U else IntegerMatrix(0, 0, ()),
        V=IntegerMatrix.from_rows(V) if V else IntegerMatrix(0, 0, ()),
        divisors=divisors,
    )


def smith_divisors(m) -> tuple:
    """Divisor chain only; skips transform bookkeeping."""
    rows, nr, nc = _as_rows(m)
    return _smith_core(rows, nr, nc, track=False)[0]


def divisors_from_minors(m) -> tuple:
    """Invariant factors via gcds of k x k minors.

    Independent slow route used to cross-check the elimination-based
    Smith form; only sensible for small matrices.
    """
    import math as _math

    rows, nr, nc = _as_rows(m)
    mn = min(nr, nc)
    prev = 1
    out = []
    for k in range(1, mn + 1):
        g = 0
        for rsel in combinations(range(nr), k):
            for csel in combinations(range(nc), k):
                sub = IntegerMatrix.from_rows(
                    [[rows[i][j] for j in csel] for i in rsel]
                )
                g = _math.gcd(g, determinant(sub))
                if g == 1:
                    break
            if g == 1:
                break
        if g == 0:
            out.extend([0] * (mn - len(out)))
            break
        out.append(g // prev)
        prev = g
    return tuple(out)


# ---------------------------------------------------------------------------
# cokernels


def cokernel(a: AlternatingMatrix) -> CokernelStructure:
    """Structure of Z^n / (column space of a).

    The torsion of an alternating cokernel carries a nondegenerate
    alternating pairing, so its invariant factors pair up; that is
    asserted on every call.
    """
    divisors = smith_divisors(a)
    nonzero = sum(1 for d in divisors if d)
    free_rank = a.n - nonzero
    torsion = tuple(d for d in divisors if d > 1)
    if len(torsion) % 2 or any(
        torsion[i] != torsion[i + 1] for i in range(0, len(torsion), 2)
    ):
        raise AssertionError(
            f"alternating cokernel torsion failed to pair up: {torsion}"
        )
    return CokernelStructure(free_rank=free_rank, torsion=torsion)


def _p_valuation(d: int, p: int) -> int:
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v


def cokernel_p_part(a: AlternatingMatrix, p: int) -> AbelianPGroup:
    """p-primary part of the cokernel torsion, as an exponent partition."""
    from .primes import is_prime

    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    divisors = smith_divisors(a)
    vals = [_p_valuation(d, p) for d in divisors if d > 1]
    return AbelianPGroup.from_valuations(p, vals)


def _balanced(v: int, q: int, half: int) -> int:
    v %= q
    return v - q if v > half else v


def diag_valuations_mod(rows, n: int, p: int, prec: int):
    """p-adic valuations of a diagonal form, computed modulo p**prec.

    Works on any integer matrix congruent to `rows` mod p**prec, using
    balanced residues so intermediate entries stay below p**prec / 2 in
    magnitude.  Diagonal entries that vanish at this precision come back
    as None (valuation not determined).  Returns valuations sorted
    ascending with Nones last.  Mutates `rows`.

    Certification rule: if every returned valuation is an int <= prec-2,
    the values equal the exact invariant-factor valuations of the input,
    because a perturbation by p**prec cannot disturb pivots of smaller
    valuation.
    """
    q = p**prec
    half = q >> 1
    for r in rows:
        for j in range(n):
            r[j] = _balanced(r[j], q, half)
    t = 0
    while t < n:
        best = 0
        bi = bj = -1
        for i in range(t, n):
            ri = rows[i]
            for j in range(t, n):
                v = ri[j]
                if v:
                    av = -v if v < 0 else v
                    if bi < 0 or av < best:
                        best, bi, bj = av, i, j
                        if av == 1:
                            break
            if best == 1:
                break
        if bi < 0:
            break
        if bi != t:
            rows[bi], rows[t] = rows[t], rows[bi]
        if bj != t:
            for r in rows:
                r[bj], r[t] = r[t], r[bj]
        while True:
            if rows[t][t] < 0:
                rows[t] = [-v for v in rows[t]]
            piv = rows[t][t]
            moved = False
            for i in range(t + 1, n):
                v = rows[i][t]
                if v:
                    qq = v // piv
                    if qq:
                        ri, rt = rows[i], rows[t]
                        for jj in range(t, n):
                            ri[jj] = _balanced(ri[jj] - qq * rt[jj], q, half)
                    if rows[i][t]:
                        rows[i], rows[t] = rows[t], rows[i]
                        moved = True
                        break
            if moved:
                continue
            for j in range(t + 1, n):
                v = rows[t][j]
                if v:
                    qq = v // piv
                    if qq:
                        for r in rows:
                            r[j] = _balanced(r[j] - qq * r[t], q, half)
                    if rows[t][j]:
                        for r in rows:
                            r[j], r[t] = r[t], r[j]
                        moved = True
                        break
            if not moved:
                break
        t += 1
    vals = []
    for i in range(n):
        d = rows[i][i] if i < t else 0
        vals.append(_p_valuation(abs(d), p) if d else None)
    vals.sort(key=lambda v: (v is None, v))
    return vals
