"""Move sets for fixed-size fibers and seeded random walks over them.

A move is an integer vector ``m`` with ``A m = 0`` where ``A`` is the point
part of a constraint system; adding it to a solution keeps every row image,
so the size of the fraction and the strata masses stay fixed. Moves here are
conformally minimal kernel vectors (a Graver-type basis), optionally limited
to those a given fiber can use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numba import njit
from scipy.optimize import linprog

from .constraints import ConstraintSystem
from .design import DesignError
from .lattice import fiber_graver, graver_basis

RNG_NAME = f"numpy.random.PCG64 (numpy {np.__version__})"
NO_BOUND = np.iinfo(np.int64).max // 4


def fiber_matrix(system: ConstraintSystem) -> np.ndarray:
    """Point rows whose image a fixed-size walk preserves.

    Systems without an auxiliary column do not fix the size, so a row of ones
    is appended for them.
    """
    A = system.point_matrix
    if system.aux is None:
        A = np.vstack([A, np.ones((1, A.shape[1]), dtype=np.int64)])
    return np.ascontiguousarray(A)


def fiber_bounds(system: ConstraintSystem, y: Sequence[int], upper: Sequence[int] | int | None = None) -> np.ndarray:
    """Entrywise upper bounds valid on the whole fiber of ``y``.

    Entry ``i`` gets the floor of the LP optimum of ``max x_i`` subject to
    ``A x = A y`` and ``0 <= x (<= upper)``; every integer point of the fiber obeys it.
    """
    A = fiber_matrix(system).astype(float)
    y = np.asarray(y, dtype=np.int64)
    b = A @ y
    n = A.shape[1]
    ub = None if upper is None else np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    bounds = [(0, None if ub is None else ub[i]) for i in range(n)]
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        c = np.zeros(n)
        c[i] = -1.0
        res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
        if res.status != 0:
            raise DesignError(f"bound LP for entry {i} failed: {res.message}")
        out[i] = int(np.floor(-res.fun + 1e-7))
    return out


def move_basis(
    system: ConstraintSystem,
    start: Sequence[int] | None = None,
    upper: Sequence[int] | int | None = None,
    method: Literal["graver", "fiber"] = "graver",
    budget: int | None = None,
) -> np.ndarray:
    """Moves connecting the fiber of ``start`` (every fiber when ``start`` is None).

    ``graver``: Graver elements with ``|m_i| <= u_i`` and 1-norm at most twice
    the size of ``start``, where ``u`` are the fiber bounds. The conformal
    summands of a difference of two fiber points obey both limits.

    ``fiber``: additionally requires ``A m+ <= A start`` and ``A m- <= A start``
    (needs ``A >= 0``), which is much tighter when the rows are small cells.

    Without ``start`` the untruncated Graver basis is returned.
    """
    A = fiber_matrix(system)
    n = A.shape[1]
    if start is None:
        if method != "graver":
            raise DesignError("the fiber method needs a start point")
        return graver_basis(A, budget=budget)
    y = np.asarray(start, dtype=np.int64)
    if y.shape != (n,):
        raise DesignError(f"start has length {y.shape[0]}, expected {n}")
    up = fiber_bounds(system, y, upper)
    if method == "graver":
        return graver_basis(A, upper=up, max_norm=2 * int(y.sum()), budget=budget)
    if method == "fiber":
        if np.any(A < 0):
            raise DesignError("the fiber method needs a system with nonnegative point rows")
        return fiber_graver(A, A @ y, up, node_limit=budget)
    raise DesignError(f"unknown move method {method!r}")


@njit(cache=True)
def _feasible(y, signed, upper, out):
    k = 0
    for i in range(signed.shape[0]):
        ok = True
        for j in range(y.shape[0]):
            v = y[j] + signed[i, j]
            if v < 0 or v > upper[j]:
                ok = False
                break
        if ok:
            out[k] = i
            k += 1
    return k


def _signed(basis: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.vstack([basis, -basis]))


def _bounds(upper: Sequence[int] | int | None, n: int) -> np.ndarray:
    if upper is None:
        return np.full(n, NO_BOUND, dtype=np.int64)
    return np.broadcast_to(np.asarray(upper, dtype=np.int64), (n,)).copy()


def feasible_moves(y: Sequence[int], basis: np.ndarray, upper: Sequence[int] | int | None = None) -> np.ndarray:
    """Signed moves keeping ``y`` inside the box: feasible ``+M`` first, then feasible ``-M``."""
    y = np.asarray(y, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64).reshape(-1, y.shape[0])
    signed = _signed(basis)
    idx = np.empty(signed.shape[0], dtype=np.int64)
    k = _feasible(y, signed, _bounds(upper, y.shape[0]), idx)
    return signed[idx[:k]]


@dataclass
class WalkState:
    start: np.ndarray
    current: np.ndarray
    seed: int
    steps: int = 0
    self_loops: int = 0
    visited: dict[bytes, np.ndarray] = field(default_factory=dict)
    rng_name: str = RNG_NAME
    path: list[np.ndarray] | None = None

    def visit(self, y: np.ndarray) -> None:
        key = y.tobytes()
        if key not in self.visited:
            self.visited[key] = y.copy()

    @property
    def distinct(self) -> int:
        return len(self.visited)

    def visited_array(self) -> np.ndarray:
        """Distinct states in first-visit order."""
        if not self.visited:
            return np.zeros((0, self.start.shape[0]), dtype=np.int64)
        return np.vstack(list(self.visited.values()))


def walk(
    system: ConstraintSystem,
    start: Sequence[int],
    basis: np.ndarray,
    steps: int,
    seed: int,
    upper: Sequence[int] | int | None = None,
    record: bool = False,
) -> WalkState:
    """Random walk on the fiber of ``start``.

    Each step draws uniformly among the currently feasible signed moves; with
    none available the step stays put. Reproducible from the arguments alone.
    With ``record`` every state, repeats included, is kept in ``path``.
    """
    if steps < 0:
        raise DesignError(f"steps must be nonnegative, got {steps}")
    y = np.asarray(start, dtype=np.int64).copy()
    if not system.is_solution(system.extend(y)):
        raise DesignError("start is not a solution of the system")
    up = _bounds(upper, y.shape[0])
    if np.any(y > up):
        raise DesignError("start exceeds the upper bounds")
    rng = np.random.Generator(np.random.PCG64(seed))
    signed = _signed(np.asarray(basis, dtype=np.int64).reshape(-1, y.shape[0]))
    idx = np.empty(signed.shape[0], dtype=np.int64)
    state = WalkState(start=y.copy(), current=y, seed=seed, path=[y.copy()] if record else None)
    state.visit(y)
    for _ in range(steps):
        k = _feasible(y, signed, up, idx)
        if k == 0:
            state.self_loops += 1
        else:
            y = y + signed[idx[rng.integers(k)]]
            state.visit(y)
        if state.path is not None:
            state.path.append(y.copy())
        state.steps += 1
    state.current = y
    return state
