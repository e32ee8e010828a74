"""Full factorial designs with integer coding.

Points and exponents share the index set ``L = Z_{n_1} x ... x Z_{n_m}`` and are
plain tuples of residues. Roots of unity are never materialised as complex
numbers here: a value ``exp(2*pi*i*h/s)`` is carried as ``Omega(h, s)``.

Canonical order of ``L`` is first-coordinate-fastest::

    index(z) = z_1 + n_1 * (z_2 + n_2 * (z_3 + ...))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

MAX_POINTS = 2**31

Point = tuple[int, ...]
Exponent = tuple[int, ...]


class DesignError(ValueError):
    pass


class Omega(NamedTuple):
    """The root of unity ``exp(2*pi*i*h/s)``, stored exactly."""

    h: int
    s: int

    def __mul__(self, other):  # type: ignore[override]
        s = math.lcm(self.s, other.s)
        return Omega((self.h * (s // self.s) + other.h * (s // other.s)) % s, s).reduced()

    def conj(self) -> "Omega":
        return Omega((-self.h) % self.s, self.s)

    def reduced(self) -> "Omega":
        """Same value expressed in the smallest group Omega_s containing it."""
        g = math.gcd(self.h, self.s)
        return Omega(self.h // g, self.s // g)

    def to_complex(self) -> complex:
        return complex(np.exp(2j * np.pi * self.h / self.s))


@dataclass(frozen=True)
class DesignSpec:
    """Level vector ``(n_1, ..., n_m)`` of a full factorial design."""

    levels: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(n) for n in self.levels)
        if not levels:
            raise DesignError("a design needs at least one factor")
        if any(n < 2 for n in levels):
            raise DesignError(f"every factor needs at least 2 levels, got {levels}")
        if math.prod(levels) > MAX_POINTS:
            raise DesignError(f"#D = {math.prod(levels)} exceeds the 2**31 point cap")
        object.__setattr__(self, "levels", levels)

    @cached_property
    def _radix(self) -> tuple[int, ...]:
        radix = [1]
        for n in self.levels[:-1]:
            radix.append(radix[-1] * n)
        return tuple(radix)

    @property
    def m(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        """#D"""
        return math.prod(self.levels)

    @property
    def lcm(self) -> int:
        return math.lcm(*self.levels)

    @property
    def equal_levels(self) -> int | None:
        """The common number of levels, or None for mixed designs."""
        return self.levels[0] if len(set(self.levels)) == 1 else None

    def check(self, coords: Sequence[int]) -> tuple[int, ...]:
        coords = tuple(int(c) for c in coords)
        if len(coords) != self.m:
            raise DesignError(f"expected {self.m} coordinates, got {len(coords)}")
        for c, n in zip(coords, self.levels):
            if not 0 <= c < n:
                raise DesignError(f"coordinate {c} out of range for a {n}-level factor")
        return coords

    def index(self, coords: Sequence[int]) -> int:
        coords = self.check(coords)
        return sum(c * r for c, r in zip(coords, self._radix))

    def point(self, index: int) -> Point:
        if not 0 <= index < self.size:
            raise DesignError(f"point index {index} out of range")
        out = []
        for n in self.levels:
            index, c = divmod(index, n)
            out.append(c)
        return tuple(out)

    @cached_property
    def points(self) -> np.ndarray:
        """All points as an ``(#D, m)`` integer array in canonical order."""
        grids = np.indices(self.levels[::-1]).reshape(self.m, -1)[::-1]
        return np.ascontiguousarray(grids.T, dtype=np.int64)

    def __str__(self) -> str:
        return "x".join(map(str, self.levels))


def enumerate_points(spec: DesignSpec) -> list[Point]:
    return [tuple(int(c) for c in row) for row in spec.points]


def weight(alpha: Sequence[int]) -> int:
    """Hamming weight: number of nonzero coordinates."""
    return sum(1 for a in alpha if a)


def residue_diff(a: Sequence[int], b: Sequence[int], spec: DesignSpec) -> Exponent:
    """Componentwise ``[a - b]`` with coordinate j computed modulo n_j."""
    a, b = spec.check(a), spec.check(b)
    return tuple((x - y) % n for x, y, n in zip(a, b, spec.levels))


def residue_scale(k: int, alpha: Sequence[int], spec: DesignSpec) -> Exponent:
    """``[k * alpha]``"""
    return tuple((k * a) % n for a, n in zip(spec.check(alpha), spec.levels))


def factor_orders(alpha: Sequence[int], spec: DesignSpec) -> tuple[int, ...]:
    return tuple(1 if a == 0 else n // math.gcd(a, n) for a, n in zip(alpha, spec.levels))


def term_order(alpha: Sequence[int], spec: DesignSpec) -> int:
    """Order s of the root-of-unity values taken by X^alpha over D."""
    return math.lcm(*factor_orders(spec.check(alpha), spec))


def eval_term(alpha: Sequence[int], zeta: Sequence[int], spec: DesignSpec) -> Omega:
    """Exact value of ``X^alpha(zeta)`` as an element of Omega_s, s = term_order(alpha)."""
    alpha, zeta = spec.check(alpha), spec.check(zeta)
    s = term_order(alpha, spec)
    h = 0
    for a, z, n in zip(alpha, zeta, spec.levels):
        if a == 0:
            continue
        g = math.gcd(a, n)
        sj = n // g
        h += (s // sj) * (((a // g) * z) % sj)
    return Omega(h % s, s)


def term_residues(alpha: Sequence[int], spec: DesignSpec) -> np.ndarray:
    """``h`` of ``X^alpha(zeta) = omega_h`` in Omega_s for every point, canonical order."""
    alpha = spec.check(alpha)
    s = term_order(alpha, spec)
    h = np.zeros(spec.size, dtype=np.int64)
    pts = spec.points
    for j, (a, n) in enumerate(zip(alpha, spec.levels)):
        if a == 0:
            continue
        g = math.gcd(a, n)
        sj = n // g
        h += (s // sj) * (((a // g) * pts[:, j]) % sj)
    return h % s


def regular_fraction(spec: DesignSpec, words: Sequence[tuple[Sequence[int], int]]) -> np.ndarray:
    """0/1 counting function of the points where ``X^alpha = omega_h`` for every ``(alpha, h)``.

    ``h`` is taken modulo the order of the term, so ``(alpha, 0)`` asks for
    the value 1 and, on a two-level term, ``(alpha, 1)`` for -1.
    """
    y = np.ones(spec.size, dtype=np.int64)
    for alpha, h in words:
        s = term_order(alpha, spec)
        y &= term_residues(alpha, spec) == h % s
    return y


def exponents(spec: DesignSpec, max_weight: int | None = None, nonzero: bool = False) -> list[Exponent]:
    """Elements of L in canonical order, optionally filtered by weight."""
    out = []
    for row in spec.points:
        alpha = tuple(int(a) for a in row)
        w = weight(alpha)
        if nonzero and w == 0:
            continue
        if max_weight is not None and w > max_weight:
            continue
        out.append(alpha)
    return out
