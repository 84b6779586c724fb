"""Exact integer-lattice linear algebra: Smith normal form, saturated kernels,
invariant sublattices, and Z[1/n]-invertibility certificates.

Everything here works with arbitrary-precision Python ints (or Fractions at
the boundaries); no floating point ever enters a verification path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .exact import is_n_local, prime_factors, support_divides

Matrix = list[list[int]]


@dataclass
class LatticeMap:
    """Matrix of a homomorphism between free modules, row-major.

    Entries are ints or Fractions whose denominators are n-smooth for the
    ambient localization; `domain_rank` counts columns, `codomain_rank` rows.
    """

    matrix: list[list]
    domain_rank: int = field(default=-1)
    codomain_rank: int = field(default=-1)

    def __post_init__(self):
        rows = len(self.matrix)
        cols = len(self.matrix[0]) if rows else 0
        if any(len(r) != cols for r in self.matrix):
            raise ValueError("ragged matrix")
        if self.codomain_rank < 0:
            self.codomain_rank = rows
        if self.domain_rank < 0:
            self.domain_rank = cols
        if (rows, cols) != (self.codomain_rank, self.domain_rank):
            raise ValueError("matrix shape disagrees with declared ranks")


def identity_matrix(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k = len(a), len(a[0]) if a else 0
    m = len(b[0]) if b else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            c = ai[t]
            if c:
                bt = b[t]
                for j in range(m):
                    if bt[j]:
                        oi[j] += c * bt[j]
    return out


def mat_vec(a, v):
    return [sum(c * x for c, x in zip(row, v) if c) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return (D, U, V) with U*M*V = D, U and V unimodular, and D diagonal
    with d1 | d2 | ... (nonnegative diagonal, zeros last)."""
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    u = identity_matrix(rows)
    v = identity_matrix(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):
        # row[dst] += c * row[src]
        arow, urow = a[src], u[src]
        adst, udst = a[dst], u[dst]
        for j in range(cols):
            adst[j] += c * arow[j]
        for j in range(rows):
            udst[j] += c * urow[j]

    def add_col(src, dst, c):
        for r in a:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # locate a pivot of minimal absolute value in the trailing block
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = a[i][j]
                if x and (best is None or abs(x) < best):
                    best = abs(x)
                    pivot = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        clean = False
        while not clean:
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    add_row(t, i, -q)
                    if a[i][t]:
                        swap_rows(t, i)
                        clean = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    add_col(t, j, -q)
                    if a[t][j]:
                        swap_cols(t, j)
                        clean = False
        # divisibility: pivot must divide the rest of the block
        p = a[t][t]
        fixed = True
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % p:
                    add_row(i, t, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            t += 1
    # sign normalization
    for i in range(min(rows, cols)):
        if a[i][i] < 0:
            for j in range(cols):
                a[i][j] = -a[i][j]
            for j in range(rows):
                u[i][j] = -u[i][j]
    return a, u, v


def snf_diagonal(m: Matrix) -> list[int]:
    d, _, _ = smith_normal_form(m)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def det_bareiss(m: Matrix) -> int:
    """Exact determinant by fraction-free Gaussian elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [list(row) for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(m: Matrix) -> bool:
    return len(m) == len(m[0]) and abs(det_bareiss(m)) == 1


def _to_integer_matrix(m, n: int | None = None):
    """Clear denominators; returns (int matrix, common denominator).

    If n is given, every denominator must be n-smooth (Z[1/n] entries).
    """
    denom = 1
    for row in m:
        for x in row:
            if isinstance(x, Fraction):
                denom = denom * x.denominator // gcd(denom, x.denominator)
    if n is not None and denom != 1 and not support_divides(denom, n):
        raise ValueError(f"matrix entries are not in Z[1/{n}]")
    out = []
    for row in m:
        out.append([int(x * denom) if isinstance(x, Fraction) else x * denom
                    for x in row])
    return out, denom


def is_iso_over_localization(m: LatticeMap | Matrix, n: int) -> bool:
    """Certificate that a square matrix is invertible over Z[1/n].

    True iff the matrix is square with Z[1/n] entries and every Smith normal
    form diagonal entry is nonzero with prime support dividing n.
    """
    matrix = m.matrix if isinstance(m, LatticeMap) else m
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if rows != cols:
        return False
    if rows == 0:
        return True
    imat, _ = _to_integer_matrix(matrix, n)
    diag = snf_diagonal(imat)
    if len(diag) < rows:
        return False
    return all(d != 0 and support_divides(d, n) for d in diag)


def hnf_rows(m: Matrix) -> Matrix:
    """Row-style Hermite normal form (canonical basis of the row lattice).

    Pivots positive, entries above each pivot reduced to [0, pivot); zero rows
    dropped.
    """
    a = [list(r) for r in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    r = 0
    for c in range(cols):
        # gcd-reduce column c below row r
        piv = None
        for i in range(r, rows):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, rows):
            while a[i][c]:
                q = a[r][c] // a[i][c] if abs(a[i][c]) <= abs(a[r][c]) else 0
                if q and a[i][c]:
                    a[r] = [x - q * y for x, y in zip(a[r], a[i])]
                a[r], a[i] = a[i], a[r]
                if not a[i][c]:
                    break
                q = a[i][c] // a[r][c]
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
        for i in range(r):
            q = a[i][c] // a[r][c]
            if q:
                a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return [row for row in a[:r] if any(row)]


def kernel_basis(m: Matrix) -> list[list[int]]:
    """Saturated basis of the integer kernel {x : M x = 0}, as rows, in HNF."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if rows == 0:
        return [row[:] for row in identity_matrix(cols)]
    d, _, v = smith_normal_form(m)
    rank = 0
    for i in range(min(rows, cols)):
        if d[i][i] != 0:
            rank += 1
    basis = []
    for j in range(rank, cols):
        basis.append([v[i][j] for i in range(cols)])
    return hnf_rows(basis)


def solve_rational(m, b):
    """Solve M x = b exactly over Q; returns Fraction list or None."""
    rows = len(m)
    cols = len(m[0]) if rows else 0
    aug = [[Fraction(m[i][j]) for j in range(cols)] + [Fraction(b[i])]
           for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if aug[i][c]:
                piv = i
                break
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if aug[i][cols]:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = aug[i][cols]
    return x


def solve_in_lattice(basis_rows: list[list[int]], vector) -> list[Fraction] | None:
    """Coordinates of `vector` in the given lattice basis (rows), or None."""
    cols = [[basis_rows[i][j] for i in range(len(basis_rows))]
            for j in range(len(basis_rows[0]))] if basis_rows else []
    if not basis_rows:
        return [] if all(x == 0 for x in vector) else None
    return solve_rational(cols, list(vector))


def invariant_sublattice(action: list[Matrix]) -> list[list[int]]:
    """Saturated Z-basis (rows, HNF) of {v : A v = v for all A in action}."""
    if not action:
        raise ValueError("need at least one action matrix")
    size = len(action[0])
    stacked = []
    for a in action:
        if len(a) != size or any(len(r) != size for r in a):
            raise ValueError("action matrices must be square of equal size")
        for i in range(size):
            stacked.append([a[i][j] - (1 if i == j else 0) for j in range(size)])
    return kernel_basis(stacked)


def saturation_certificate(basis_rows: list[list[int]]) -> bool:
    """True iff the lattice spanned by the rows is saturated (quotient
    torsion-free): all SNF invariant factors are 1."""
    if not basis_rows:
        return True
    diag = snf_diagonal(basis_rows)
    rank = sum(1 for d in diag if d != 0)
    return all(d == 1 for d in diag[:rank]) and rank == len(basis_rows)


def merge_invariant_factors(blocks: list[list[int]], n: int) -> list[int]:
    """Invariant factors of a block-diagonal matrix from per-block factors.

    Valid when every factor is n-smooth (the only case we certify); factors
    with primes outside n are rejected by the caller beforehand.
    """
    entries = [d for blk in blocks for d in blk]
    if any(d == 0 for d in entries):
        raise ValueError("zero invariant factor cannot be merged")
    total = len(entries)
    exps: dict[int, list[int]] = {}
    for d in entries:
        v = abs(d)
        for p in prime_factors(n):
            e = 0
            while v % p == 0:
                v //= p
                e += 1
            if e:
                exps.setdefault(p, []).append(e)
        if v != 1:
            raise ValueError(f"invariant factor {d} has support outside {n}")
    merged = [1] * total
    for p, es in exps.items():
        es.sort()
        # largest exponents go to the last invariant factors
        for offset, e in enumerate(reversed(es)):
            merged[total - 1 - offset] *= p**e
    return merged


def check_n_local_matrix(m, n: int) -> bool:
    for row in m:
        for x in row:
            if isinstance(x, Fraction) and not is_n_local(x, n):
                return False
    return True
