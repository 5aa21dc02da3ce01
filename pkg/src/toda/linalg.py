"""Fraction-free determinant, adjugate and inverse for small symbolic matrices.

Entries may be :class:`~toda.expr.Expr` or :class:`~toda.expr.RationalExpr`.
The determinant is a Laplace expansion memoized over column subsets, so an
``m x m`` matrix costs ``O(m 2^m)`` ring products and zero entries are skipped.
Division happens once, when the adjugate is divided by the determinant.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import SingularStructureError
from .expr import Expr, RationalExpr


def _is_zero(v) -> bool:
    return v.is_zero()


def _zero_like(v):
    return Expr(v.n)


def det(rows) -> Expr | RationalExpr:
    m = len(rows)
    if m == 0:
        raise ValueError("empty matrix")
    if any(len(r) != m for r in rows):
        raise ValueError("matrix is not square")
    proto = rows[0][0]

    @lru_cache(maxsize=None)
    def minor(cols: frozenset):
        r = m - len(cols)
        if not cols:
            return Expr.const(proto.n, 1)
        acc = _zero_like(proto)
        for pos, c in enumerate(sorted(cols)):
            a = rows[r][c]
            if _is_zero(a):
                continue
            sub = minor(cols - {c})
            if _is_zero(sub):
                continue
            term = a * sub
            acc = acc - term if pos % 2 else acc + term
        return acc

    return minor(frozenset(range(m)))


def _drop(rows, i, j):
    return [[v for c, v in enumerate(row) if c != j] for r, row in enumerate(rows) if r != i]


def adjugate(rows):
    m = len(rows)
    if m == 1:
        return [[Expr.const(rows[0][0].n, 1)]]
    adj = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            c = det(_drop(rows, i, j))
            adj[j][i] = -c if (i + j) % 2 else c
    return adj


def inverse(rows):
    """Exact inverse as a list of rows of :class:`RationalExpr` (polynomials where possible)."""
    d = det(rows)
    if d.is_zero():
        raise SingularStructureError("matrix has zero determinant")
    adj = adjugate(rows)
    return [[RationalExpr.of(a) / RationalExpr.of(d) for a in row] for row in adj]


def matmul(A, B):
    m, k, p = len(A), len(B), len(B[0])
    if any(len(r) != k for r in A):
        raise ValueError("inner dimensions differ")
    out = []
    for i in range(m):
        row = []
        for j in range(p):
            acc = None
            for s in range(k):
                a, b = A[i][s], B[s][j]
                if a.is_zero() or b.is_zero():
                    continue
                acc = a * b if acc is None else acc + a * b
            row.append(acc if acc is not None else _zero_like(A[i][0]))
        out.append(row)
    return out


def matvec(A, v):
    out = []
    for row in A:
        acc = None
        for a, b in zip(row, v):
            if a.is_zero() or b.is_zero():
                continue
            acc = a * b if acc is None else acc + a * b
        out.append(acc if acc is not None else _zero_like(row[0]))
    return out
