"""Strata of interaction terms and their integer centering conditions.

For a nonzero exponent ``alpha`` of order ``s`` the full design splits into ``s``
strata ``D_h = {zeta : conj(X^alpha(zeta)) = omega_h}`` of equal size. With
``n_h`` the mass a counting function puts on ``D_h``, the term ``X^alpha`` is
centered iff ``sum_h n_h z^h`` vanishes modulo the cyclotomic polynomial
``Phi_s`` (for prime ``s`` this is the same as ``n_0 = ... = n_{s-1}``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .design import DesignError, DesignSpec, Exponent, term_order, term_residues, weight

Encoding = Literal["cyclotomic", "lambda"]


@dataclass(frozen=True)
class StrataTable:
    alpha: Exponent
    s: int
    cells: tuple[tuple[int, ...], ...]

    @property
    def labels(self) -> np.ndarray:
        """Cell number of every point, canonical point order."""
        out = np.empty(sum(len(c) for c in self.cells), dtype=np.int64)
        for h, cell in enumerate(self.cells):
            out[list(cell)] = h
        return out

    def partition(self) -> frozenset[tuple[int, ...]]:
        """The cells as an unlabelled set."""
        return frozenset(self.cells)


@dataclass(frozen=True)
class CycloPoly:
    s: int
    coeffs: tuple[int, ...]  # constant term first

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def stratum_labels(alpha: Sequence[int], spec: DesignSpec) -> np.ndarray:
    """Label ``h`` with ``conj(X^alpha(zeta)) = omega_h`` for each point."""
    s = term_order(alpha, spec)
    return (-term_residues(alpha, spec)) % s


def build_strata(alpha: Sequence[int], spec: DesignSpec) -> StrataTable:
    alpha = spec.check(alpha)
    if weight(alpha) == 0:
        raise DesignError("the zero exponent has a single stratum, D itself")
    s = term_order(alpha, spec)
    labels = stratum_labels(alpha, spec)
    cells = tuple(tuple(int(i) for i in np.flatnonzero(labels == h)) for h in range(s))
    return StrataTable(alpha, s, cells)


def strata_counts(table: StrataTable, y: Sequence[int]) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    n = sum(len(c) for c in table.cells)
    if y.shape != (n,):
        raise DesignError(f"counting function has length {y.shape[0]}, expected {n}")
    return np.array([int(y[list(cell)].sum()) for cell in table.cells], dtype=np.int64)


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Exact division by a monic integer polynomial; coefficients low to high."""
    num = list(num)
    dd = len(den) - 1
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    quot = [0] * max(len(num) - dd, 1)
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k]
        if c:
            quot[k - dd] = c
            for i, d in enumerate(den):
                num[k - dd + i] -= c * d
    rem = num[:dd] if dd else []
    return quot, rem


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def cyclotomic(s: int) -> CycloPoly:
    """Phi_s with exact integer coefficients, via (z^s - 1) / prod_{d | s, d < s} Phi_d."""
    if s < 1:
        raise ValueError("s must be positive")
    num = [-1] + [0] * (s - 1) + [1]
    for d in range(1, s):
        if s % d == 0:
            num, rem = _poly_divmod(num, list(cyclotomic(d).coeffs))
            assert not any(rem)
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return CycloPoly(s, tuple(num))


def poly_product(polys: Sequence[CycloPoly]) -> list[int]:
    out = [1]
    for p in polys:
        out = _poly_mul(out, p.coeffs)
    return out


@lru_cache(maxsize=None)
def reduction_matrix(s: int) -> np.ndarray:
    """``R[k, h]`` = coefficient of z^k in ``z^h mod Phi_s``; shape ``(phi(s), s)``."""
    phi = cyclotomic(s)
    deg = phi.degree
    out = np.zeros((deg, s), dtype=np.int64)
    for h in range(s):
        mono = [0] * h + [1]
        _, rem = _poly_divmod(mono, list(phi.coeffs)) if h >= deg else (None, mono)
        for k, c in enumerate(rem):
            out[k, h] = c
    return out


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n**0.5) + 1))


def centering_rows(alpha: Sequence[int], spec: DesignSpec, encoding: Encoding = "cyclotomic") -> np.ndarray:
    """Integer rows over the strata counts ``(n_0, ..., n_{s-1})`` expressing ``c_alpha = 0``.

    ``cyclotomic`` gives ``phi(s)`` rows with ``s`` columns. ``lambda`` (prime
    ``s`` only) gives ``s`` rows ``n_h - lambda = 0`` with ``s + 1`` columns, the
    last one for lambda.
    """
    alpha = spec.check(alpha)
    if weight(alpha) == 0:
        raise DesignError("the zero exponent has no centering condition")
    s = term_order(alpha, spec)
    if encoding == "cyclotomic":
        return reduction_matrix(s).copy()
    if encoding == "lambda":
        if not is_prime(s):
            raise DesignError(f"lambda encoding needs a prime order, got s={s} for {alpha}")
        return np.hstack([np.eye(s, dtype=np.int64), -np.ones((s, 1), dtype=np.int64)])
    raise ValueError(f"unknown encoding {encoding!r}")


def remainder_vanishes(counts: Sequence[int]) -> bool:
    """Exact centering test on strata counts of a term of order ``len(counts)``."""
    counts = np.asarray(counts, dtype=np.int64)
    return not np.any(reduction_matrix(len(counts)) @ counts)
