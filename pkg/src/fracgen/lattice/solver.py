"""Hilbert bases, Graver-type move sets and bounded enumeration for ``M x = 0``.

Both basis computations use project-and-lift: start from a lattice basis that
is the identity on some columns, then add the remaining columns one at a time,
each time completing the vector set so that it again contains every minimal
lattice vector for the columns lifted so far. Minimality is conformal
(``u <= v`` iff ``u_i v_i >= 0`` and ``|u_i| <= |v_i|``); on sign-restricted
columns this is the componentwise order on nonnegative vectors.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .kernel import _hnf_kernel, unit_kernel_basis

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class BudgetExhausted(RuntimeError):
    """Raised when a computation runs out of work budget; carries a resumable checkpoint."""

    def __init__(self, message: str, checkpoint: "LiftState", path: Path | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.path = path


@dataclass
class LiftState:
    """Resumable project-and-lift state.

    ``vectors`` are in internal column order ``perm``; the first ``lifted``
    columns are done. ``level`` is the last completed norm level of the step
    lifting column ``lifted`` (-1 if that step has not started).
    """

    digest: str
    restricted: bool
    perm: np.ndarray
    lifted: int
    level: int
    vectors: np.ndarray
    upper: np.ndarray
    max_norm: int
    work: int = 0
    stats: list = field(default_factory=list)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("wb") as fh:
            np.savez_compressed(
                fh,
                version=CHECKPOINT_VERSION,
                digest=self.digest,
                restricted=self.restricted,
                perm=self.perm,
                lifted=self.lifted,
                level=self.level,
                vectors=self.vectors,
                upper=self.upper,
                max_norm=self.max_norm,
                work=self.work,
            )
        return path

    @classmethod
    def load(cls, path: str | Path) -> "LiftState":
        with np.load(Path(path), allow_pickle=False) as z:
            if int(z["version"]) != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {int(z['version'])}")
            return cls(
                digest=str(z["digest"]),
                restricted=bool(z["restricted"]),
                perm=z["perm"].astype(np.int64),
                lifted=int(z["lifted"]),
                level=int(z["level"]),
                vectors=z["vectors"].astype(np.int64),
                upper=z["upper"].astype(np.int64),
                max_norm=int(z["max_norm"]),
                work=int(z["work"]),
            )


def _digest(M: np.ndarray) -> str:
    M = np.ascontiguousarray(M, dtype=np.int64)
    return hashlib.sha256(repr(M.shape).encode() + M.tobytes()).hexdigest()[:16]


def canonical_sort(X: np.ndarray) -> np.ndarray:
    """Rows in lexicographic order."""
    X = np.asarray(X, dtype=np.int64)
    if X.shape[0] == 0:
        return X
    return X[np.lexsort(X.T[::-1])]


def _conformal_leq(u: Sequence[int], v: Sequence[int]) -> bool:
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(u, v))


def _graver_by_completion(B: np.ndarray, cols: list[int]) -> np.ndarray:
    """Minimal vectors of the lattice spanned by ``B`` w.r.t. columns ``cols``.

    Generic completion with normal-form reduction; used only when the lattice
    has no basis with an identity block. Projection onto ``cols`` must be injective.
    """
    G = [tuple(int(v) for v in row) for row in B] + [tuple(-int(v) for v in row) for row in B]
    proj = lambda v: [v[k] for k in cols]  # noqa: E731
    pending = [(i, j) for i in range(len(G)) for j in range(i + 1, len(G))]
    while pending:
        i, j = pending.pop()
        s = [a + b for a, b in zip(G[i], G[j])]
        reduced = True
        while reduced and any(proj(s)):
            reduced = False
            for g in G:
                if _conformal_leq(proj(g), proj(s)):
                    s = [a - b for a, b in zip(s, g)]
                    reduced = True
                    break
        if any(proj(s)):
            G.append(tuple(s))
            pending.extend((k, len(G) - 1) for k in range(len(G) - 1))
    keep = []
    for g in set(G):
        if not any(h != g and _conformal_leq(proj(h), proj(g)) for h in G):
            keep.append(g)
    return np.array(sorted(keep), dtype=np.int64).reshape(-1, B.shape[1])


def _initial_state(M: np.ndarray, restricted: bool, upper: np.ndarray, max_norm: int) -> LiftState:
    n = M.shape[1]
    got = unit_kernel_basis(M)
    if got is not None:
        B, free = got
        if restricted:
            vectors = B
        else:
            vectors = np.vstack([B, -B])
    else:
        B = np.array(_hnf_kernel(M), dtype=np.int64).reshape(-1, n)
        # greedy column choice with full rank gives an injective projection
        free = []
        for k in range(n):
            if np.linalg.matrix_rank(B[:, free + [k]].astype(float)) > len(free):
                free.append(k)
        vectors = _graver_by_completion(B, free)
        if restricted:
            vectors = vectors[np.all(vectors[:, free] >= 0, axis=1)]
    rest = [k for k in range(n) if k not in free]
    perm = np.array(list(free) + rest, dtype=np.int64)
    return LiftState(
        digest=_digest(M),
        restricted=restricted,
        perm=perm,
        lifted=len(free),
        level=-1,
        vectors=np.ascontiguousarray(vectors[:, perm]),
        upper=upper,
        max_norm=max_norm,
    )


def _choose_next(V: np.ndarray, lifted: int) -> int:
    """Unlifted internal column with the fewest critical pairs (#positive * #negative)."""
    tail = V[:, lifted:]
    cost = (tail > 0).sum(axis=0).astype(np.int64) * (tail < 0).sum(axis=0)
    return lifted + int(np.argmin(cost))


def project_and_lift(
    M: np.ndarray,
    restricted: bool,
    upper: Sequence[int] | None = None,
    max_norm: int | None = None,
    budget: int | None = None,
    resume: LiftState | str | Path | None = None,
    checkpoint_path: str | Path | None = None,
    progress: Callable[[LiftState], None] | None = None,
) -> np.ndarray:
    """Minimal nonzero vectors of ``{x in Z^n : M x = 0}`` (``x >= 0`` if ``restricted``).

    ``upper`` (per column, -1 = none) and ``max_norm`` (1-norm, -1 = none)
    truncate the result to vectors inside those bounds. ``budget`` caps the
    number of critical pairs examined in this call; when exceeded a
    ``BudgetExhausted`` carrying a resumable state is raised (and written to
    ``checkpoint_path`` if given).
    """
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    up = np.full(n, -1, dtype=np.int64) if upper is None else np.asarray(upper, dtype=np.int64)
    if up.shape != (n,):
        raise ValueError(f"bound vector has length {up.shape[0]}, expected {n}")
    mn = -1 if max_norm is None else int(max_norm)

    if resume is not None:
        state = LiftState.load(resume) if isinstance(resume, (str, Path)) else resume
        if state.digest != _digest(M) or state.restricted != restricted:
            raise ValueError("checkpoint does not belong to this system")
        if not np.array_equal(state.upper, up) or state.max_norm != mn:
            raise ValueError("checkpoint was computed with different bounds")
    else:
        if n == 0:
            return np.zeros((0, 0), dtype=np.int64)
        state = _initial_state(M, restricted, up, mn)

    spent = 0
    while state.lifted < n:
        V = state.vectors
        c = state.lifted
        if state.level < 0:
            nxt = _choose_next(V, c)
            if nxt != c:
                V[:, [c, nxt]] = V[:, [nxt, c]]
                state.perm[[c, nxt]] = state.perm[[nxt, c]]
            V = _truncate(V, up[state.perm], mn, c)
        col_up = up[state.perm]
        remaining = -1 if budget is None else max(budget - spent, 0)
        t0 = time.perf_counter()
        cap = max(16, 2 * V.shape[0])
        buf = np.zeros((cap, n), dtype=np.int64)
        buf[: V.shape[0]] = V
        buf, cnt, status, last, work = _kernels.lift_step(
            buf, V.shape[0], c, restricted, col_up, mn, state.level + 1, remaining
        )
        spent += work
        state.work += work
        state.vectors = np.ascontiguousarray(buf[:cnt])
        if status == _kernels.OUT_OF_BUDGET:
            state.level = last
            path = state.save(checkpoint_path) if checkpoint_path else None
            raise BudgetExhausted(
                f"work budget exhausted while lifting column {c + 1}/{n} (level {last})", state, path
            )
        state.stats.append((int(state.perm[c]), int(cnt), int(work), time.perf_counter() - t0))
        log.debug("lifted column %d: %d vectors, %d pairs", state.perm[c], cnt, work)
        state.lifted += 1
        state.level = -1
        if checkpoint_path:
            state.save(checkpoint_path)
        if progress is not None:
            progress(state)

    out = np.empty_like(state.vectors)
    out[:, state.perm] = state.vectors
    return out


def _truncate(V: np.ndarray, col_up: np.ndarray, max_norm: int, lifted: int) -> np.ndarray:
    keep = np.ones(V.shape[0], dtype=bool)
    head = np.abs(V[:, :lifted])
    bounded = col_up[:lifted] >= 0
    if bounded.any():
        keep &= np.all(head[:, bounded] <= col_up[:lifted][bounded], axis=1)
    if max_norm >= 0:
        keep &= head.sum(axis=1) <= max_norm
    return np.ascontiguousarray(V[keep])


def hilbert_basis(
    M: np.ndarray,
    budget: int | None = None,
    resume: LiftState | str | Path | None = None,
    checkpoint_path: str | Path | None = None,
    progress: Callable[[LiftState], None] | None = None,
) -> np.ndarray:
    """Hilbert basis of the monoid ``{x in Z^n_{>=0} : M x = 0}``, rows sorted lexicographically."""
    H = project_and_lift(M, True, budget=budget, resume=resume, checkpoint_path=checkpoint_path, progress=progress)
    return canonical_sort(H)


def graver_basis(
    M: np.ndarray,
    upper: Sequence[int] | None = None,
    max_norm: int | None = None,
    budget: int | None = None,
    resume: LiftState | str | Path | None = None,
    checkpoint_path: str | Path | None = None,
) -> np.ndarray:
    """Conformally minimal kernel vectors, one per ``+-`` pair (first nonzero entry positive)."""
    G = project_and_lift(
        M, False, upper=upper, max_norm=max_norm, budget=budget, resume=resume, checkpoint_path=checkpoint_path
    )
    if G.shape[0] == 0:
        return G
    first = G[np.arange(G.shape[0]), np.argmax(G != 0, axis=1)]
    return canonical_sort(G[first > 0])


def fiber_graver(
    M: np.ndarray,
    rhs: Sequence[int],
    upper: Sequence[int],
    node_limit: int | None = None,
) -> np.ndarray:
    """Conformally minimal kernel vectors usable inside one bounded fiber.

    For ``M >= 0`` entrywise and a fiber ``{x : M x = rhs, 0 <= x <= upper}``,
    every conformal summand ``g`` of a difference ``x - x'`` of fiber points
    has ``g+ <= x`` and ``g- <= x'``, so ``M g+ <= rhs``, ``M g- <= rhs`` and
    ``g+ + g- <= upper``. This enumerates those pairs ``(g+, g-)`` with equal
    image and keeps the minimal ones, one per ``+-`` pair.
    """
    M = np.asarray(M, dtype=np.int64)
    if np.any(M < 0):
        raise ValueError("fiber truncation needs a nonnegative matrix")
    r, n = M.shape
    b = np.asarray(rhs, dtype=np.int64)
    up = np.asarray(upper, dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    rows = np.vstack([np.hstack([M, -M]), np.hstack([M, np.zeros_like(M)]), np.hstack([eye, eye])])
    lo = np.zeros(2 * r + n, dtype=np.int64)
    hi = np.concatenate([np.zeros(r, dtype=np.int64), b, up])
    limit = -1 if node_limit is None else node_limit
    pairs, truncated, _ = _kernels.branch_and_prune(rows, lo, hi, np.concatenate([up, up]), _branch_order(rows), limit)
    if truncated:
        raise BudgetExhausted(f"node limit {node_limit} reached during move enumeration", None)  # type: ignore[arg-type]
    pairs = minimal_elements(pairs[np.any(pairs != 0, axis=1)])
    G = pairs[:, :n] - pairs[:, n:]
    if G.shape[0] == 0:
        return G
    first = G[np.arange(G.shape[0]), np.argmax(G != 0, axis=1)]
    return canonical_sort(G[first > 0])


def enumerate_bounded(
    M: np.ndarray,
    upper: Sequence[int],
    include_zero: bool = False,
    node_limit: int | None = None,
    minimal: bool = False,
) -> np.ndarray:
    """Every ``x`` with ``M x = 0`` and ``0 <= x <= upper``, rows sorted lexicographically.

    With ``minimal`` only the nonzero solutions that are not componentwise
    above another nonzero solution are kept, i.e. those that do not split as a
    sum of two nonzero bounded solutions (the Hilbert basis of the box-bounded
    system).

    When the kernel lattice has a basis ``B`` that is the identity on a set of
    free columns, solutions are ``x = z B`` with integer ``z`` and the search
    branches on ``z`` only, checking ``0 <= (z B)_p <= upper_p`` on the other
    columns. Otherwise it branches on ``x`` directly against ``M x = 0``.
    """
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[1]
    up = np.asarray(upper, dtype=np.int64)
    if up.shape != (n,):
        raise ValueError(f"bound vector has length {up.shape[0]}, expected {n}")
    if np.any(up < 0):
        raise ValueError("upper bounds must be nonnegative")
    limit = -1 if node_limit is None else node_limit
    got = unit_kernel_basis(M)
    if got is not None:
        B, free = got
        if B.shape[0] == 0:
            sols, truncated = np.zeros((1, n), dtype=np.int64), False
        else:
            bound = [k for k in range(n) if k not in free]
            A = np.ascontiguousarray(B[:, bound].T)
            zs, truncated, _ = _kernels.branch_and_prune(
                A, np.zeros(len(bound), dtype=np.int64), up[bound], up[free], _branch_order(A), limit
            )
            sols = zs @ B
    else:
        r = M.shape[0]
        zero = np.zeros(r, dtype=np.int64)
        sols, truncated, _ = _kernels.branch_and_prune(M, zero, zero, up, _branch_order(M), limit)
    if truncated:
        raise BudgetExhausted(f"node limit {node_limit} reached during enumeration", None)  # type: ignore[arg-type]
    if not include_zero or minimal:
        sols = sols[np.any(sols != 0, axis=1)]
    if minimal:
        sols = minimal_elements(sols)
    return canonical_sort(sols)


def minimal_elements(X: np.ndarray) -> np.ndarray:
    """Rows of a nonnegative array that have no other row componentwise below them."""
    X = np.asarray(X, dtype=np.int64)
    if X.shape[0] == 0:
        return X
    X = np.unique(X, axis=0)
    sizes = X.sum(axis=1)
    order = np.argsort(sizes, kind="stable")
    X, sizes = X[order], sizes[order]
    return canonical_sort(X[_kernels.minimal_mask(X, sizes)])


def _branch_order(A: np.ndarray) -> np.ndarray:
    """Greedy variable order: next is the variable that completes the most rows,
    ties broken by the number of rows it touches."""
    nz = A != 0
    open_count = nz.sum(axis=1)
    left = list(range(A.shape[1]))
    order = []
    while left:
        closes = ((nz[:, left]) & (open_count[:, None] == 1)).sum(axis=0)
        touches = nz[:, left].sum(axis=0)
        best = left[int(np.lexsort((touches * -1, closes * -1))[0])]
        order.append(best)
        left.remove(best)
        open_count -= nz[:, best]
    return np.array(order, dtype=np.int64)
