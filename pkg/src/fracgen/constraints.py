"""Compilation of orthogonality constraints into homogeneous integer systems.

A ``ConstraintSystem`` has one column per design point (canonical order) and
optionally a trailing auxiliary column: lambda (common stratum mass) for the
strata encoding, rho (common margin value) for the margin encoding. A
nonnegative integer vector ``(y, aux)`` is a compatible counting function iff
``matrix @ (y, aux) == 0``.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence, TextIO

import numpy as np

from .design import DesignError, DesignSpec, Exponent, exponents, term_order, weight
from .strata import build_strata, centering_rows, is_prime, stratum_labels

StrataEncoding = Literal["auto", "lambda", "cyclotomic"]

SUDOKU_GROUPS = ((0, 1, 2, 3), (0, 1, 4, 5), (2, 3, 4, 5), (0, 2, 4, 5))
"""Factor groups (R1 R2 C1 C2 S1 S2 numbering) on which a sudoku fully projects."""


@dataclass(frozen=True)
class StrataRow:
    alpha: Exponent
    kind: Literal["lambda", "cyclotomic"]
    index: int  # stratum h, or power k of the remainder coefficient

    def __str__(self) -> str:
        return f"strata {''.join(map(str, self.alpha))} {self.kind} {self.index}"


@dataclass(frozen=True)
class MarginRow:
    factors: tuple[int, ...]
    levels: tuple[int, ...]

    def __str__(self) -> str:
        return f"margin {','.join(map(str, self.factors))} {','.join(map(str, self.levels))}"


@dataclass(frozen=True)
class ConstraintSystem:
    matrix: np.ndarray
    spec: DesignSpec
    encoding: Literal["strata", "margins"]
    aux: Literal["lambda", "rho"] | None
    rows: tuple[StrataRow | MarginRow, ...] = field(default=())

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        want = self.spec.size + (self.aux is not None)
        if m.ndim != 2 or m.shape[1] != want:
            raise DesignError(f"matrix shape {m.shape} does not match {want} columns")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape  # type: ignore[return-value]

    @property
    def n_points(self) -> int:
        return self.spec.size

    @property
    def point_matrix(self) -> np.ndarray:
        """The matrix restricted to point columns (the fixed-size system A)."""
        return self.matrix[:, : self.n_points]

    def residual(self, x: Sequence[int]) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=np.int64)

    def is_solution(self, x: Sequence[int]) -> bool:
        x = np.asarray(x, dtype=np.int64)
        return x.shape == (self.shape[1],) and bool(np.all(x >= 0)) and not np.any(self.matrix @ x)

    def extend(self, y: Sequence[int]) -> np.ndarray:
        """Append the auxiliary value implied by a counting function ``y``.

        Raises if ``y`` admits no consistent auxiliary value.
        """
        y = np.asarray(y, dtype=np.int64)
        if y.shape != (self.n_points,):
            raise DesignError(f"counting function has length {y.shape[0]}, expected {self.n_points}")
        if self.aux is None:
            return y.copy()
        r = self.point_matrix @ y
        vals = set(r[self.matrix[:, -1] == -1].tolist())
        if len(vals) > 1:
            raise DesignError("counting function has no consistent auxiliary value")
        return np.append(y, vals.pop() if vals else 0)

    def digest(self) -> str:
        return matrix_digest(self.matrix)


def matrix_digest(matrix: np.ndarray) -> str:
    return hashlib.sha256(format_matrix(matrix).encode()).hexdigest()[:16]


def _strata_partition_key(alpha: Exponent, spec: DesignSpec) -> tuple[int, ...]:
    # canonical relabelling: cells numbered by first appearance in point order
    labels = stratum_labels(alpha, spec)
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(h), len(seen)) for h in labels)


def dedup_by_strata(alphas: Iterable[Exponent], spec: DesignSpec) -> list[Exponent]:
    """Keep the first exponent of every group that induces the same strata partition."""
    seen: set[tuple[int, ...]] = set()
    out = []
    for alpha in alphas:
        key = _strata_partition_key(alpha, spec)
        if key not in seen:
            seen.add(key)
            out.append(alpha)
    return out


def oa_constraints(spec: DesignSpec, t: int, dedup: bool = True) -> list[Exponent]:
    """Nonzero exponents of weight at most ``t`` (orthogonal array of strength t)."""
    if not 1 <= t <= spec.m:
        raise DesignError(f"strength must be in 1..{spec.m}, got {t}")
    alphas = exponents(spec, max_weight=t, nonzero=True)
    return dedup_by_strata(alphas, spec) if dedup else alphas


def sudoku_spec(p: int) -> DesignSpec:
    if not is_prime(p):
        raise DesignError(f"sudoku designs need a prime p, got {p}")
    return DesignSpec((p,) * 6)


def sudoku_constraints(p: int, groups: Sequence[Sequence[int]] = SUDOKU_GROUPS, dedup: bool = False) -> list[Exponent]:
    """Union of the exponents supported inside each sudoku projection group."""
    spec = sudoku_spec(p)
    out = []
    for alpha in exponents(spec, nonzero=True):
        support = {j for j, a in enumerate(alpha) if a}
        if any(support <= set(g) for g in groups):
            out.append(alpha)
    return dedup_by_strata(out, spec) if dedup else out


def resolve_encoding(alphas: Sequence[Exponent], spec: DesignSpec, encoding: StrataEncoding) -> str:
    orders = {term_order(a, spec) for a in alphas}
    if encoding == "auto":
        if len(orders) == 1 and is_prime(next(iter(orders))):
            return "lambda"
        return "cyclotomic"
    if encoding == "lambda" and (len(orders) != 1 or not is_prime(next(iter(orders)))):
        raise DesignError(f"lambda encoding needs one common prime order, got orders {sorted(orders)}")
    return encoding


def build_strata_system(spec: DesignSpec, alphas: Sequence[Exponent], encoding: StrataEncoding = "auto") -> ConstraintSystem:
    """Stack the centering rows of every exponent in ``alphas`` (kept in the given order)."""
    alphas = [spec.check(a) for a in alphas]
    if not alphas:
        raise DesignError("empty constraint set")
    if any(weight(a) == 0 for a in alphas):
        raise DesignError("the zero exponent cannot be constrained")
    enc = resolve_encoding(alphas, spec, encoding)
    blocks = []
    rows: list[StrataRow] = []
    for alpha in alphas:
        table = build_strata(alpha, spec)
        labels = table.labels
        rr = centering_rows(alpha, spec, enc)  # type: ignore[arg-type]
        if enc == "lambda":
            block = np.zeros((table.s, spec.size + 1), dtype=np.int64)
            block[labels, np.arange(spec.size)] = 1
            block[:, -1] = -1
        else:
            block = rr[:, labels]
        blocks.append(block)
        rows.extend(StrataRow(alpha, enc, k) for k in range(block.shape[0]))  # type: ignore[arg-type]
    return ConstraintSystem(np.vstack(blocks), spec, "strata", "lambda" if enc == "lambda" else None, tuple(rows))


def build_margin_system(spec: DesignSpec, t: int | None = None, groups: Sequence[Sequence[int]] | None = None) -> ConstraintSystem:
    """Constant-margin rows ``R_I(z_I) - rho = 0``.

    With ``t`` the rows cover every factor subset of size ``t``; lower margins
    follow by summation. ``groups`` names the subsets explicitly instead.
    """
    if spec.equal_levels is None:
        raise DesignError(f"margin encoding needs equal levels on every factor, got {spec.levels}")
    if groups is None:
        if t is None or not 1 <= t <= spec.m:
            raise DesignError(f"strength must be in 1..{spec.m}, got {t}")
        groups = list(itertools.combinations(range(spec.m), t))
    sizes = {len(g) for g in groups}
    if len(sizes) != 1:
        raise DesignError("margin groups must all have the same size")
    pts = spec.points
    blocks = []
    rows: list[MarginRow] = []
    for g in groups:
        g = tuple(g)
        sub = DesignSpec(tuple(spec.levels[j] for j in g))
        code = np.zeros(spec.size, dtype=np.int64)
        radix = 1
        for j in g:
            code += radix * pts[:, j]
            radix *= spec.levels[j]
        block = np.zeros((sub.size, spec.size + 1), dtype=np.int64)
        block[code, np.arange(spec.size)] = 1
        block[:, -1] = -1
        blocks.append(block)
        rows.extend(MarginRow(g, sub.point(k)) for k in range(sub.size))
    return ConstraintSystem(np.vstack(blocks), spec, "margins", "rho", tuple(rows))


# -- matrix text format -------------------------------------------------------

def format_matrix(matrix: np.ndarray) -> str:
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-d array")
    lines = [f"{matrix.shape[0]} {matrix.shape[1]}"]
    lines += [" ".join(str(int(v)) for v in row) for row in matrix]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    try:
        r, c = (int(v) for v in lines[0].split())
        body = [[int(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed matrix file: {exc}") from None
    if len(body) != r or any(len(row) != c for row in body):
        raise ValueError(f"matrix file declares {r} x {c} but body does not match")
    return np.array(body, dtype=np.int64).reshape(r, c)


def write_matrix(matrix: np.ndarray, dest: str | Path | TextIO) -> None:
    text = format_matrix(matrix)
    if hasattr(dest, "write"):
        dest.write(text)  # type: ignore[union-attr]
    else:
        Path(dest).write_text(text)


def read_matrix(src: str | Path) -> np.ndarray:
    return parse_matrix(Path(src).read_text())
