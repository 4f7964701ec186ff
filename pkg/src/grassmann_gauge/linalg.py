"""Dense exact linear algebra over Q(i) on nested lists."""

from __future__ import annotations

from typing import List, Sequence

from .scalars import Q, inverse

Matrix = List[List[object]]


def zeros(rows: int, cols: int) -> Matrix:
    return [[Q(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Q(1)
    return out


def as_matrix(rows: Sequence[Sequence[object]]) -> Matrix:
    from .scalars import as_scalar

    out = [[as_scalar(v) for v in row] for row in rows]
    width = {len(r) for r in out}
    if len(width) > 1:
        raise ValueError("ragged matrix")
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    out = []
    for row in a:
        out_row = []
        for col in bt:
            s = Q(0)
            for x, y in zip(row, col):
                if x != 0 and y != 0:
                    s = s + x * y
            out_row.append(s)
        out.append(out_row)
    return out


def matvec(a: Matrix, v: Sequence[object]) -> list:
    out = []
    for row in a:
        s = Q(0)
        for x, y in zip(row, v):
            if x != 0 and y != 0:
                s = s + x * y
        out.append(s)
    return out


def scale(a: Matrix, c) -> Matrix:
    return [[c * x for x in row] for row in a]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def kron(a: Matrix, b: Matrix) -> Matrix:
    rb, cb = len(b), len(b[0])
    out = zeros(len(a) * rb, len(a[0]) * cb)
    for i, row in enumerate(a):
        for j, x in enumerate(row):
            if x == 0:
                continue
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k][j * cb + l] = x * b[k][l]
    return out


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def _echelon(a: Matrix):
    """Reduced row echelon form; returns (rref, pivot columns)."""
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = inverse(m[r][c])
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(_echelon(a)[1])


def nullspace(a: Matrix) -> List[list]:
    """Basis of {v : a v = 0}."""
    cols = len(a[0])
    rref, pivots = _echelon(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Q(0)] * cols
        v[f] = Q(1)
        for row, pc in zip(rref, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def det(a: Matrix):
    n = len(a)
    m = [list(r) for r in a]
    d = Q(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Q(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d = d * m[c][c]
        inv = inverse(m[c][c])
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def inv(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    rref, pivots = _echelon(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in rref]


def solve(a: Matrix, b: Sequence[object]) -> list:
    """Solve a x = b for square nonsingular a."""
    return matvec(inv(a), b)


def in_span(vectors: List[list], v: Sequence[object]) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    return rank(vectors + [list(v)]) == rank(vectors)
