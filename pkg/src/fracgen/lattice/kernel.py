"""Integer kernel bases with an identity block on a set of free columns."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def _hnf_kernel(M: np.ndarray) -> list[list[int]]:
    """Z-basis of ``{x : M x = 0}`` by unimodular row reduction of ``[M^T | I]``."""
    r, n = M.shape
    rows = [[int(M[i, k]) for i in range(r)] + [int(k == j) for j in range(n)] for k in range(n)]
    top = 0
    for col in range(r):
        while True:
            nz = [i for i in range(top, n) if rows[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(rows[i][col]))
            rows[top], rows[piv] = rows[piv], rows[top]
            done = True
            for i in range(top + 1, n):
                q = rows[i][col] // rows[top][col]
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[top])]
                if rows[i][col]:
                    done = False
            if done:
                top += 1
                break
    return [row[r:] for row in rows[top:]]


def unit_kernel_basis(M: np.ndarray) -> tuple[np.ndarray, list[int]] | None:
    """Kernel basis ``B`` and free columns ``F`` with ``B[:, F] = I``.

    Pivots are chosen among entries of absolute value 1 so the elimination stays
    integral; such a basis is a Z-basis of the kernel lattice. Returns None when
    the greedy pivot search finds no unit pivot.
    """
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    # pivot on a Z-basis of the saturated row space: the rows of M themselves
    # may span a sublattice of finite index that has no unimodular minor
    K = _hnf_kernel(M)
    if not K:
        return np.zeros((0, n), dtype=np.int64), []
    R = _hnf_kernel(np.array(K, dtype=object)) if len(K) < n else []
    r = len(R)
    A = [[Fraction(int(v)) for v in row] for row in R]
    pivots: list[int] = []
    used_rows = 0
    while used_rows < r:
        choice = None
        for i in range(used_rows, r):
            for k in range(n):
                if k not in pivots and abs(A[i][k]) == 1:
                    choice = (i, k)
                    break
            if choice:
                break
        if choice is None:
            if all(A[i][k] == 0 for i in range(used_rows, r) for k in range(n)):
                break
            return None
        i, k = choice
        A[used_rows], A[i] = A[i], A[used_rows]
        p = A[used_rows][k]
        A[used_rows] = [v / p for v in A[used_rows]]
        for t in range(r):
            if t != used_rows and A[t][k] != 0:
                f = A[t][k]
                A[t] = [a - f * b for a, b in zip(A[t], A[used_rows])]
        pivots.append(k)
        used_rows += 1
    free = [k for k in range(n) if k not in pivots]
    B = np.zeros((len(free), n), dtype=np.int64)
    for bi, fcol in enumerate(free):
        B[bi, fcol] = 1
        for ri, pcol in enumerate(pivots):
            v = -A[ri][fcol]
            if v.denominator != 1:
                return None
            B[bi, pcol] = int(v)
    return B, free


def kernel_basis(M: np.ndarray) -> np.ndarray:
    """Any Z-basis of the integer kernel."""
    M = np.asarray(M, dtype=np.int64)
    got = unit_kernel_basis(M)
    if got is not None:
        return got[0]
    return np.array(_hnf_kernel(M), dtype=np.int64).reshape(-1, M.shape[1])
