"""Exact integer and rational linear algebra on small dense matrices.

Everything here works with arbitrary-precision Python ints and
``fractions.Fraction``; no floating point.  Determinants of the replicated
K-matrices grow like |det K|^(2n), so fixed-width arithmetic would be a
silent correctness bug.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class SingularMatrix(Exception):
    """Raised when an exact inverse of a singular matrix is requested."""


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    assert len(a[0]) == inner
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(rows)]


def mat_vec(a, v):
    return [sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a))]


def mat_neg(a):
    return [[-x for x in row] for row in a]


def block_diag(blocks):
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[off + i][off + j] = x
        off += len(b)
    return out


def det(m) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        d *= a[col][col]
        inv = a[col][col]
        for i in range(col + 1, n):
            f = a[i][col] / inv
            if f:
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return sign * d


@dataclass(frozen=True)
class SmithDecomposition:
    """U * M * V = D with U, V unimodular and D diagonal, d1 | d2 | ..."""

    U: list
    D: list
    V: list

    @property
    def diagonal(self) -> list[int]:
        n = min(len(self.D), len(self.D[0]))
        return [self.D[i][i] for i in range(n)]


def _swap_rows(a, i, j):
    a[i], a[j] = a[j], a[i]


def _swap_cols(a, i, j):
    for row in a:
        row[i], row[j] = row[j], row[i]


def smith_normal_form(m) -> SmithDecomposition:
    """Smith normal form of an integer matrix.

    Pivot choice is the smallest nonzero absolute value in the remaining
    block, ties broken by lowest row then column index, so the output is
    deterministic for a given input.
    """
    r, c = len(m), len(m[0])
    a = [list(row) for row in m]
    u = identity(r)
    v = identity(c)
    t = 0
    while t < min(r, c):
        # locate pivot
        best = None
        for i in range(t, r):
            for j in range(t, c):
                x = abs(a[i][j])
                if x and (best is None or x < best[0]):
                    best = (x, i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            _swap_rows(a, pi, t)
            _swap_rows(u, pi, t)
        if pj != t:
            _swap_cols(a, pj, t)
            _swap_cols(v, pj, t)
        while True:
            _clear_cross(a, u, v, t, r, c)
            # enforce divisibility of the remaining block by the pivot
            viol = None
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if a[i][j] % a[t][t]:
                        viol = i
                        break
                if viol is not None:
                    break
            if viol is None:
                break
            a[t] = [x + y for x, y in zip(a[t], a[viol])]
            u[t] = [x + y for x, y in zip(u[t], u[viol])]
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return SmithDecomposition(U=u, D=a, V=v)


def _clear_cross(a, u, v, t, r, c):
    """Zero out column t below the pivot and row t right of it."""
    while True:
        dirty = False
        for i in range(t + 1, r):
            if a[i][t]:
                q = a[i][t] // a[t][t]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
                if a[i][t]:
                    _swap_rows(a, i, t)
                    _swap_rows(u, i, t)
                    dirty = True
        for j in range(t + 1, c):
            if a[t][j]:
                q = a[t][j] // a[t][t]
                if q:
                    for i in range(r):
                        a[i][j] -= q * a[i][t]
                    for i in range(c):
                        v[i][j] -= q * v[i][t]
                if a[t][j]:
                    _swap_cols(a, j, t)
                    _swap_cols(v, j, t)
                    dirty = True
        if not dirty:
            return


def rational_inverse(m) -> list[list[Fraction]]:
    """Exact inverse; raises SingularMatrix when det = 0."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            raise SingularMatrix("matrix has zero determinant")
        a[col], a[piv] = a[piv], a[col]
        inv = a[col][col]
        a[col] = [x / inv for x in a[col]]
        for i in range(n):
            if i != col and a[i][col]:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [row[n:] for row in a]


def integer_solve(a, b):
    """Solve A x = b over the integers via Smith normal form.

    Returns an integer solution vector, or None when no integer solution
    exists (absence of a solution is a value, not an error).
    """
    snf = smith_normal_form(a)
    r, c = len(a), len(a[0])
    ub = mat_vec(snf.U, list(b))
    y = [0] * c
    for i in range(r):
        d = snf.D[i][i] if i < c else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            y[i] = ub[i] // d
    x = mat_vec(snf.V, y)
    assert mat_vec(a, x) == list(b)
    return x
