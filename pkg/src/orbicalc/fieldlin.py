"""Generic exact linear algebra over Q or over cyclotomic fields.

Matrices are lists of lists whose entries are Fractions, ints, or Cyclotomic
values; the helpers only use +, -, *, inversion, and zero tests, so the two
scalar kinds can be mixed freely (ints/Fractions coerce into Cyclotomic).
"""

from __future__ import annotations

from fractions import Fraction

from .exact import Cyclotomic


def _is_zero(x) -> bool:
    if isinstance(x, Cyclotomic):
        return x.is_zero()
    return x == 0


def _inv(x):
    if isinstance(x, Cyclotomic):
        return x.inverse()
    return Fraction(1) / Fraction(x)


def rref(matrix):
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    a = [list(r) for r in matrix]
    n = len(a)
    m = len(a[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        piv = None
        for i in range(r, n):
            if not _is_zero(a[i][c]):
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = _inv(a[r][c])
        a[r] = [x * inv for x in a[r]]
        for i in range(n):
            if i != r and not _is_zero(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return a, pivots


def rank(matrix) -> int:
    return len(rref(matrix)[1])


def nullspace(matrix):
    """Basis (rows) of the right kernel over the scalar field."""
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    a, pivots = rref(matrix)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -a[i][fc]
        basis.append(vec)
    return basis


def solve(matrix, rhs):
    """One solution of matrix @ x = rhs, or None if inconsistent."""
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    aug = [list(matrix[i]) + [rhs[i]] for i in range(n)]
    a, pivots = rref(aug)
    for row in a:
        if all(_is_zero(x) for x in row[:m]) and not _is_zero(row[m]):
            return None
    x = [Fraction(0)] * m
    for i, c in enumerate(pivots):
        if c < m:
            x[c] = a[i][m]
        elif not _is_zero(a[i][m]):
            return None
    return x


def inverse_matrix(matrix):
    n = len(matrix)
    aug = [list(matrix[i]) + [Fraction(1) if i == j else Fraction(0)
                              for j in range(n)] for i in range(n)]
    a, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in a]


class SpanTracker:
    """Incremental row-space tracker for rank computations over exact fields.

    Rows are reduced against the current echelon basis as they arrive; this
    keeps large spanning-set rank computations (commutator spans, image
    lattices) at echelon size instead of input size.
    """

    def __init__(self, width: int):
        self.width = width
        self.rows = []          # echelon rows, pivot-normalized
        self.pivots = []        # pivot column per row

    def add(self, row) -> bool:
        """Reduce and insert; returns True if the row increased the rank."""
        v = list(row)
        for r, c in zip(self.rows, self.pivots):
            if not _is_zero(v[c]):
                f = v[c]
                v = [x - f * y for x, y in zip(v, r)]
        for c in range(self.width):
            if not _is_zero(v[c]):
                inv = _inv(v[c])
                v = [x * inv for x in v]
                self.rows.append(v)
                self.pivots.append(c)
                return True
        return False

    def contains(self, row) -> bool:
        v = list(row)
        for r, c in zip(self.rows, self.pivots):
            if not _is_zero(v[c]):
                f = v[c]
                v = [x - f * y for x, y in zip(v, r)]
        return all(_is_zero(x) for x in v)

    @property
    def rank(self) -> int:
        return len(self.rows)
