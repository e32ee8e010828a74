"""Diagnostics for counting functions: coefficients, strength, aberration, regularity.

Decisions are made on integer strata counts. Complex coefficients are only
computed as a cross-check.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .design import DesignError, DesignSpec, Exponent, exponents, residue_scale, term_order, weight
from .strata import is_prime, remainder_vanishes, stratum_labels

TOL = 1e-9


def _as_counts(y: Sequence[int], spec: DesignSpec) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (spec.size,):
        raise DesignError(f"counting function has length {y.shape[0]}, expected {spec.size}")
    if np.any(y < 0):
        raise DesignError("counting functions are nonnegative")
    return y


def coeff_oracle(y: Sequence[int], alpha: Sequence[int], spec: DesignSpec) -> complex:
    """``c_alpha = (1/#D) sum_zeta y_zeta conj(X^alpha(zeta))`` evaluated in floating point."""
    y = _as_counts(y, spec)
    alpha = spec.check(alpha)
    pts = spec.points
    phase = sum(a * pts[:, j] / n for j, (a, n) in enumerate(zip(alpha, spec.levels)))
    return complex(np.sum(y * np.exp(-2j * np.pi * phase)) / spec.size)


def coefficient_table(y: Sequence[int], spec: DesignSpec) -> np.ndarray:
    """All ``c_alpha`` at once, as an array indexed by ``alpha`` (shape = levels)."""
    y = _as_counts(y, spec)
    grid = y.reshape(spec.levels, order="F")  # canonical order has factor 1 fastest
    return np.fft.fftn(grid) / spec.size


def strata_vector(y: Sequence[int], alpha: Sequence[int], spec: DesignSpec) -> np.ndarray:
    """``n_{alpha,h}``: mass of ``y`` on each stratum of ``X^alpha`` (``alpha = 0`` gives one stratum)."""
    y = _as_counts(y, spec)
    alpha = spec.check(alpha)
    if weight(alpha) == 0:
        return np.array([int(y.sum())], dtype=np.int64)
    s = term_order(alpha, spec)
    return np.bincount(stratum_labels(alpha, spec), weights=y, minlength=s).astype(np.int64)


@dataclass(frozen=True)
class StrataCoefficient:
    alpha: Exponent
    counts: np.ndarray
    value: complex
    centered: bool


def coeff_from_strata(y: Sequence[int], alpha: Sequence[int], spec: DesignSpec, check: bool = True) -> StrataCoefficient:
    """Coefficient of ``X^alpha`` from strata counts, ``(1/#D) sum_h n_h omega_h``.

    ``centered`` is decided exactly by the cyclotomic remainder of the counts.
    With ``check`` the value is compared with ``coeff_oracle``.
    """
    alpha = spec.check(alpha)
    n = strata_vector(y, alpha, spec)
    s = len(n)
    value = sum(int(c) * cmath.exp(2j * cmath.pi * h / s) for h, c in enumerate(n)) / spec.size
    centered = s > 1 and remainder_vanishes(n)
    if check:
        ref = coeff_oracle(y, alpha, spec)
        if abs(ref - value) > TOL:
            raise AssertionError(f"strata coefficient {value} disagrees with oracle {ref} for {alpha}")
        if centered != (abs(ref) < TOL):
            raise AssertionError(f"exact centering test disagrees with oracle for {alpha}")
    return StrataCoefficient(alpha, n, complex(value), bool(centered))


def strata_from_coefficients(table: np.ndarray, alpha: Sequence[int], spec: DesignSpec) -> np.ndarray:
    """Inverse map: ``n_h = (#D/s) sum_k c_{-k alpha} omega^{hk}``, rounded to integers."""
    alpha = spec.check(alpha)
    s = term_order(alpha, spec)
    out = np.zeros(s)
    for h in range(s):
        acc = 0j
        for k in range(s):
            idx = tuple((-k * a) % n for a, n in zip(alpha, spec.levels))
            acc += table[idx] * cmath.exp(2j * cmath.pi * h * k / s)
        out[h] = (spec.size / s * acc).real
    return np.rint(out).astype(np.int64)


def _require_prime_levels(spec: DesignSpec) -> int:
    s = spec.equal_levels
    if s is None or not is_prime(s):
        raise DesignError(f"needs equal prime levels, got {spec.levels}")
    return s


def squared_modulus(counts: Sequence[int], gamma: int = 1) -> int:
    """``sum_h n_h^2 - n_h n_{h-gamma}`` over the strata counts of a term of prime order.

    For ``s <= 3`` this is ``#D^2 |c_alpha|^2`` and does not depend on ``gamma``.
    For larger primes single terms can have an irrational modulus, and only the
    sum over the multiples ``k alpha`` (``k = 1..s-1``) is exact; that sum is
    what the wordlength pattern needs.
    """
    n = [int(v) for v in counts]
    s = len(n)
    if not 1 <= gamma < s:
        raise DesignError(f"gamma must lie in 1..{s - 1}")
    return sum(n[h] * n[h] - n[h] * n[(h - gamma) % s] for h in range(s))


def squared_modulus_by_variance(counts: Sequence[int]) -> Fraction:
    """``s^2/(s-1)`` times the population variance of the counts.

    Equals the average of ``#D^2 |c_{k alpha}|^2`` over ``k = 1..s-1``, hence
    ``#D^2 |c_alpha|^2`` itself when ``s <= 3``.
    """
    n = [int(v) for v in counts]
    s = len(n)
    mean = Fraction(sum(n), s)
    var = sum((Fraction(v) - mean) ** 2 for v in n) / s
    return Fraction(s * s, s - 1) * var


def orbit_squared_modulus(counts: Sequence[int]) -> int:
    """``#D^2 sum_{k=1}^{s-1} |c_{k alpha}|^2`` from the counts of ``alpha`` (prime ``s``), exact."""
    n = [int(v) for v in counts]
    s = len(n)
    return s * sum(v * v for v in n) - sum(n) ** 2


def wordlength_pattern(y: Sequence[int], spec: DesignSpec, check: bool = True) -> tuple[Fraction, ...]:
    """``(A_1, ..., A_m)`` with ``A_j = (#D/#F)^2 sum_{wt(alpha)=j} |c_alpha|^2``, exact.

    Terms are grouped in orbits ``{k alpha}``, which share a weight. Each orbit
    contributes the sum of ``squared_modulus`` over its members. With ``check``
    that sum must match the variance form and the floating coefficient table.
    """
    s = _require_prime_levels(spec)
    y = _as_counts(y, spec)
    size = int(y.sum())
    if size == 0:
        raise DesignError("empty fraction has no wordlength pattern")
    sums = [0] * (spec.m + 1)
    done: set[Exponent] = set()
    for alpha in exponents(spec, nonzero=True):
        if alpha in done:
            continue
        orbit = [residue_scale(k, alpha, spec) for k in range(1, s)]
        done.update(orbit)
        total = sum(squared_modulus(strata_vector(y, a, spec)) for a in orbit)
        if check:
            n = strata_vector(y, alpha, spec)
            if total != orbit_squared_modulus(n) or Fraction(total) != (s - 1) * squared_modulus_by_variance(n):
                raise AssertionError(f"orbit identity fails for {alpha}")
        sums[weight(alpha)] += total
    wlp = tuple(Fraction(sums[j], size * size) for j in range(1, spec.m + 1))
    if check:
        table = coefficient_table(y, spec)
        w = np.zeros(spec.m + 1)
        for alpha in itertools.product(*(range(n) for n in spec.levels)):
            w[weight(alpha)] += abs(table[alpha]) ** 2
        ref = (spec.size / size) ** 2 * w[1:]
        if np.max(np.abs(ref - np.array([float(a) for a in wlp]))) > 1e-6:
            raise AssertionError("wordlength pattern disagrees with the coefficient table")
    return wlp


def oa_strength(y: Sequence[int], spec: DesignSpec) -> int:
    """Largest ``t`` such that every nonzero term of weight ``<= t`` is centered (exact)."""
    y = _as_counts(y, spec)
    worst = spec.m + 1
    for alpha in exponents(spec, nonzero=True):
        w = weight(alpha)
        if w < worst and not remainder_vanishes(strata_vector(y, alpha, spec)):
            worst = w
    return worst - 1


def margins(y: Sequence[int], spec: DesignSpec, factors: Sequence[int]) -> np.ndarray:
    """Projection counts on the given factors, indexed by their levels."""
    y = _as_counts(y, spec)
    factors = tuple(factors)
    if len(set(factors)) != len(factors) or any(not 0 <= j < spec.m for j in factors):
        raise DesignError(f"invalid factor subset {factors}")
    grid = y.reshape(spec.levels, order="F")
    drop = tuple(j for j in range(spec.m) if j not in factors)
    out = grid.sum(axis=drop) if drop else grid
    # summing keeps the remaining axes in increasing order; reorder to ``factors``
    kept = [j for j in range(spec.m) if j in factors]
    return np.transpose(out, [kept.index(j) for j in factors]) if factors else np.asarray(out)


def fully_projects(y: Sequence[int], spec: DesignSpec, factors: Sequence[int]) -> bool:
    tab = margins(y, spec, factors)
    return bool(np.all(tab == tab.flat[0]))


def is_indicator(y: Sequence[int], spec: DesignSpec, certificate: bool = False) -> bool:
    """True iff every value is 0 or 1.

    With ``certificate`` the coefficient table is also checked against
    ``c = c * c`` (cyclic convolution over the exponent group), the
    coefficient form of ``y^2 = y``.
    """
    y = _as_counts(y, spec)
    flag = bool(np.all(y <= 1))
    if certificate:
        c = coefficient_table(y, spec)
        conv = np.fft.ifftn(np.fft.fftn(c) ** 2)
        holds = bool(np.max(np.abs(conv - c)) < TOL)
        if holds != flag:
            raise AssertionError("convolution certificate disagrees with the 0/1 test")
    return flag


def is_regular(y: Sequence[int], spec: DesignSpec) -> bool:
    """Every term is either balanced over its strata or constant on the fraction."""
    _require_prime_levels(spec)
    y = _as_counts(y, spec)
    if np.any(y > 1):
        raise DesignError("regularity is defined for single-replicate fractions")
    size = int(y.sum())
    for alpha in exponents(spec, nonzero=True):
        n = strata_vector(y, alpha, spec)
        balanced = np.all(n * len(n) == size)
        concentrated = np.count_nonzero(n) == 1
        if not (balanced or concentrated):
            return False
    return True


def report(y: Sequence[int], spec: DesignSpec) -> dict[str, object]:
    """Key/value summary of a counting function."""
    y = _as_counts(y, spec)
    out: dict[str, object] = {
        "size": int(y.sum()),
        "support": int(np.count_nonzero(y)),
        "max_replicate": int(y.max()) if y.size else 0,
        "indicator": is_indicator(y, spec),
        "strength": oa_strength(y, spec),
    }
    s = spec.equal_levels
    if s is not None and is_prime(s) and out["size"]:
        out["wlp"] = wordlength_pattern(y, spec, check=False)
        out["regular"] = is_regular(y, spec) if out["indicator"] else None
    return out


def format_report(rep: dict[str, object]) -> str:
    lines = []
    for key, val in rep.items():
        if isinstance(val, tuple):
            val = " ".join(str(v) for v in val)
        elif val is None:
            val = "n/a"
        elif isinstance(val, bool):
            val = str(val).lower()
        lines.append(f"{key}: {val}")
    return "\n".join(lines)


def centered_terms(y: Sequence[int], spec: DesignSpec) -> list[Exponent]:
    """Nonzero exponents whose term is centered on ``y``."""
    return [a for a in exponents(spec, nonzero=True) if remainder_vanishes(strata_vector(y, a, spec))]


__all__ = [
    "StrataCoefficient",
    "centered_terms",
    "coeff_from_strata",
    "coeff_oracle",
    "coefficient_table",
    "format_report",
    "fully_projects",
    "is_indicator",
    "is_regular",
    "margins",
    "oa_strength",
    "orbit_squared_modulus",
    "report",
    "squared_modulus",
    "squared_modulus_by_variance",
    "strata_from_coefficients",
    "strata_vector",
    "wordlength_pattern",
]
