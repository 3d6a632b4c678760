"""Exact Gauss-Jordan elimination over any field whose elements support + - * /."""

from __future__ import annotations


def rref(rows, ncols):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows, ncols, one=1):
    """Basis of {v : rows @ v = 0}, in reduced echelon form (pivot entry 1, ascending pivots)."""
    red, pivots = rref(rows, ncols)
    zero = one - one
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    if not basis:
        return []
    out, _ = rref(basis, ncols)
    return out


def rank(rows, ncols) -> int:
    return len(rref(rows, ncols)[1])
