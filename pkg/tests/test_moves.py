import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import as_set
from fracgen.constraints import build_margin_system, build_strata_system, oa_constraints
from fracgen.design import DesignError, DesignSpec, regular_fraction
from fracgen.moves import RNG_NAME, feasible_moves, fiber_bounds, fiber_matrix, move_basis, walk


def _fiber(system, y0):
    """Brute-force fiber of y0: every y >= 0 with the same image under the fiber rows."""
    A = fiber_matrix(system)
    b = A @ y0
    up = fiber_bounds(system, y0)
    grid = np.array(list(itertools.product(*(range(u + 1) for u in up))), dtype=np.int64)
    return grid[np.all(grid @ A.T == b, axis=1)]


def _reachable(y0, basis):
    seen = {tuple(y0)}
    queue = deque([np.asarray(y0)])
    while queue:
        y = queue.popleft()
        for m in feasible_moves(y, basis):
            z = y + m
            if tuple(z) not in seen:
                seen.add(tuple(z))
                queue.append(z)
    return seen


def _perm(n):
    return np.eye(n, dtype=np.int64).reshape(-1, order="F")


CASES = [
    ("margins 3x3", lambda: build_margin_system(DesignSpec((3, 3)), 1), lambda: _perm(3)),
    ("strata 4x4", lambda: build_strata_system(DesignSpec((4, 4)), oa_constraints(DesignSpec((4, 4)), 1), "cyclotomic"), lambda: _perm(4)),
    ("margins 2^3", lambda: build_margin_system(DesignSpec((2, 2, 2)), 1), lambda: np.array([1, 0, 0, 1, 0, 1, 1, 0])),
    ("strata 2^4 t=2", lambda: build_strata_system(DesignSpec((2,) * 4), oa_constraints(DesignSpec((2,) * 4), 2)),
     lambda: regular_fraction(DesignSpec((2,) * 4), [((1, 1, 1, 1), 0)])),
    ("margins 2x2 doubled", lambda: build_margin_system(DesignSpec((2, 2)), 1), lambda: np.array([2, 0, 0, 2])),
]


# fiber truncation needs nonnegative rows, so the cyclotomic case runs with graver only
METHOD_CASES = [(c, m) for c in CASES for m in ("graver", "fiber") if not (m == "fiber" and c[0] == "strata 4x4")]


@pytest.mark.parametrize("case, method", METHOD_CASES, ids=[f"{c[0]}-{m}" for c, m in METHOD_CASES])
def test_move_graph_connects_brute_force_fiber(case, method):
    _, make_system, make_start = case
    system, y0 = make_system(), make_start()
    basis = move_basis(system, y0, method=method)
    assert not np.any(fiber_matrix(system) @ basis.T)
    fiber = _fiber(system, y0)
    assert _reachable(y0, basis) == as_set(fiber)


def test_fiber_moves_are_graver_elements():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    y0 = _perm(3)
    fib = move_basis(system, y0, method="fiber")
    full = move_basis(system)
    assert as_set(fib) <= as_set(full) | as_set(-full)


def test_fiber_method_requires_nonnegative_rows():
    spec = DesignSpec((2,) * 3)
    system = build_strata_system(spec, oa_constraints(spec, 1), "cyclotomic")
    with pytest.raises(DesignError):
        move_basis(system, np.array([1, 0, 0, 1, 0, 1, 1, 0]), method="fiber")
    with pytest.raises(DesignError):
        move_basis(system, method="fiber")


def test_fiber_bounds_on_permutations():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    assert fiber_bounds(system, _perm(3)).tolist() == [1] * 9
    assert fiber_bounds(system, 2 * _perm(3)).tolist() == [2] * 9
    assert fiber_bounds(system, 2 * _perm(3), upper=1).tolist() == [1] * 9


def test_feasible_moves_definition():
    basis = np.array([[1, -1, 0], [0, 1, -1]])
    got = feasible_moves([0, 1, 0], basis)
    assert got.tolist() == [[1, -1, 0], [0, -1, 1]]
    assert feasible_moves([0, 1, 0], basis, upper=[0, 1, 1]).tolist() == [[0, -1, 1]]


def test_zero_state_has_no_feasible_margin_moves():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    basis = move_basis(system)
    assert len(basis)
    assert len(feasible_moves(np.zeros(9, dtype=np.int64), basis)) == 0


@given(st.integers(0, 2**32 - 1))
def test_reversibility(seed):
    system = build_margin_system(DesignSpec((3, 3)), 1)
    basis = move_basis(system, 2 * _perm(3))
    rng = np.random.default_rng(seed)
    y = 2 * _perm(3)
    for _ in range(20):
        moves = feasible_moves(y, basis)
        m = moves[rng.integers(len(moves))]
        z = y + m
        assert as_set((-m)[None]) <= as_set(feasible_moves(z, basis))
        y = z


@pytest.fixture(scope="module")
def regular_25():
    spec = DesignSpec((2,) * 5)
    system = build_strata_system(spec, oa_constraints(spec, 2))
    y0 = regular_fraction(spec, [((1, 1, 1, 0, 0), 0), ((1, 0, 0, 1, 1), 0)])
    return system, y0, move_basis(system, y0, upper=1)


def test_walk_conserves_rows_and_bounds(regular_25):
    system, y0, basis = regular_25
    state = walk(system, y0, basis, 300, seed=7, upper=1, record=True)
    assert len(state.path) == 301
    P = np.array(state.path)
    A = system.point_matrix
    assert np.all(P @ A.T == A @ y0)
    assert np.all(P >= 0) and np.all(P <= 1)
    assert np.all(P.sum(axis=1) == 8)
    assert as_set(P) == as_set(state.visited_array())


@given(st.integers(0, 2**63 - 1))
def test_walk_is_deterministic(seed):
    system = build_margin_system(DesignSpec((3, 3)), 1)
    y0 = 2 * _perm(3)
    basis = move_basis(system, y0)
    a = walk(system, y0, basis, 50, seed=seed, record=True)
    b = walk(system, y0, basis, 50, seed=seed, record=True)
    assert np.array_equal(np.array(a.path), np.array(b.path))
    assert np.array_equal(a.visited_array(), b.visited_array())
    assert a.rng_name == RNG_NAME


def test_dead_end_is_a_self_loop():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    y0 = _perm(3)
    state = walk(system, y0, np.zeros((0, 9), dtype=np.int64), 25, seed=1)
    assert state.self_loops == 25 and state.steps == 25 and state.distinct == 1
    assert np.array_equal(state.current, y0)


def test_walk_rejects_bad_starts():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    basis = move_basis(system)
    bad = _perm(3)
    bad[0] += 1
    with pytest.raises(DesignError):
        walk(system, bad, basis, 10, seed=0)
    with pytest.raises(DesignError):
        walk(system, 2 * _perm(3), basis, 10, seed=0, upper=1)
    with pytest.raises(DesignError):
        walk(system, _perm(3), basis, -1, seed=0)


def test_start_length_checked():
    system = build_margin_system(DesignSpec((3, 3)), 1)
    with pytest.raises(DesignError):
        move_basis(system, np.ones(4, dtype=np.int64))
