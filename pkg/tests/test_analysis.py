import cmath
import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracgen.analysis import (
    centered_terms,
    coeff_from_strata,
    coeff_oracle,
    coefficient_table,
    format_report,
    fully_projects,
    is_indicator,
    is_regular,
    margins,
    oa_strength,
    orbit_squared_modulus,
    report,
    squared_modulus,
    squared_modulus_by_variance,
    strata_from_coefficients,
    strata_vector,
    wordlength_pattern,
)
from fracgen.design import DesignError, DesignSpec, exponents, regular_fraction, residue_scale

SIGNED_RUNS = """
-1 -1 -1 -1 -1 1   -1 -1 -1 1 1 1   -1 -1 1 -1 -1 -1   -1 -1 1 1 1 -1
-1 1 -1 -1 -1 -1   -1 1 -1 1 1 -1   -1 1 1 -1 1 1     -1 1 1 1 -1 1
1 -1 -1 -1 1 1     1 -1 -1 1 -1 1   1 -1 1 -1 1 -1    1 -1 1 1 -1 -1
1 1 -1 -1 1 -1     1 1 -1 1 -1 -1   1 1 1 -1 -1 1     1 1 1 1 1 1
"""


def from_points(spec, pts):
    y = np.zeros(spec.size, dtype=np.int64)
    for p in pts:
        y[spec.index(p)] += 1
    return y


@pytest.fixture
def oa16():
    spec = DesignSpec((2,) * 6)
    signed = np.array(SIGNED_RUNS.split(), dtype=int).reshape(16, 6)
    return spec, from_points(spec, (signed == -1).astype(int))  # +1 codes level 0


@pytest.fixture
def regular32():
    spec = DesignSpec((2,) * 5)
    return spec, regular_fraction(spec, [((1, 1, 1, 0, 0), 0), ((1, 0, 0, 1, 1), 0)])


def random_case(draw_levels, data):
    levels = data.draw(draw_levels)
    spec = DesignSpec(levels)
    y = np.array(data.draw(st.lists(st.integers(0, 3), min_size=spec.size, max_size=spec.size)))
    alpha = tuple(data.draw(st.integers(0, n - 1)) for n in levels)
    return spec, y, alpha


levels_st = st.lists(st.integers(2, 6), min_size=1, max_size=3).map(tuple)
prime_levels_st = st.tuples(st.sampled_from([2, 3, 5]), st.integers(1, 3)).map(lambda t: (t[0],) * t[1])


def test_two_point_example():
    spec = DesignSpec((2, 2, 2))
    y = from_points(spec, [(1, 1, 0), (1, 0, 1)])
    table = coefficient_table(y, spec)
    expected = {(0, 0, 0): 0.25, (1, 1, 1): 0.25, (1, 0, 0): -0.25, (0, 1, 1): -0.25}
    for alpha in exponents(spec):
        assert cmath.isclose(table[alpha], expected.get(alpha, 0.0), abs_tol=1e-12)
        assert cmath.isclose(coeff_oracle(y, alpha, spec), expected.get(alpha, 0.0), abs_tol=1e-12)
    got = coeff_from_strata(y, (1, 0, 0), spec)
    assert got.counts.tolist() == [0, 2] and not got.centered
    assert is_indicator(y, spec, certificate=True)


def test_full_design_coefficients():
    spec = DesignSpec((3, 4))
    y = np.ones(spec.size, dtype=np.int64)
    table = coefficient_table(y, spec)
    assert cmath.isclose(table[0, 0], 1)
    table[0, 0] = 0
    assert np.max(np.abs(table)) < 1e-12
    assert oa_strength(y, spec) == 2
    assert all(coeff_from_strata(y, a, spec).centered for a in exponents(spec, nonzero=True))


def test_sixteen_run_array(oa16):
    spec, y = oa16
    assert y.sum() == 16 and y.max() == 1
    assert cmath.isclose(coeff_oracle(y, (0, 1, 1, 0, 0, 1), spec), 0.25, abs_tol=1e-12)
    assert cmath.isclose(coeff_oracle(y, (1, 0, 0, 1, 1, 0), spec), -0.125, abs_tol=1e-12)
    assert cmath.isclose(coeff_oracle(y, (1, 1, 1, 1, 1, 1), spec), -0.125, abs_tol=1e-12)
    assert oa_strength(y, spec) == 2
    assert not is_regular(y, spec)
    nonzero = [a for a in exponents(spec, nonzero=True) if abs(coeff_oracle(y, a, spec)) > 1e-9]
    assert len(nonzero) == 9 and min(sum(a) for a in nonzero) == 3


def test_five_level_pattern_matches_table():
    spec = DesignSpec((5, 5))
    y = np.zeros(25, dtype=np.int64)
    y[[0, 1, 7, 13, 24]] = 1
    wlp = wordlength_pattern(y, spec)
    table = coefficient_table(y, spec)
    ref = [sum(abs(table[a]) ** 2 for a in exponents(spec) if sum(v > 0 for v in a) == j) * 25 for j in (1, 2)]
    assert np.allclose([float(a) for a in wlp], ref)


def test_regular_fraction_pattern(regular32):
    spec, y = regular32
    assert wordlength_pattern(y, spec) == (0, 0, 2, 1, 0)
    assert is_regular(y, spec)
    assert oa_strength(y, spec) == 2
    assert len(centered_terms(y, spec)) == 31 - 3


def test_full_design_pattern_and_regularity():
    spec = DesignSpec((3, 3, 3))
    y = np.ones(27, dtype=np.int64)
    assert wordlength_pattern(y, spec) == (0, 0, 0)
    assert is_regular(y, spec)
    assert oa_strength(y, spec) == 3


def test_single_point_has_strength_zero():
    spec = DesignSpec((2, 3, 4))
    y = np.zeros(spec.size, dtype=np.int64)
    y[0] = 1
    assert oa_strength(y, spec) == 0


def test_zero_exponent_strata():
    spec = DesignSpec((3, 3))
    y = np.arange(9)
    assert strata_vector(y, (0, 0), spec).tolist() == [36]


def test_balanced_strata_center():
    spec = DesignSpec((3, 3))
    y = np.ones(9, dtype=np.int64) * 2
    got = coeff_from_strata(y, (1, 0), spec)
    assert got.counts.tolist() == [6, 6, 6] and got.centered and abs(got.value) < 1e-12


def test_pattern_needs_prime_equal_levels():
    with pytest.raises(DesignError):
        wordlength_pattern(np.ones(16, dtype=np.int64), DesignSpec((4, 4)))
    with pytest.raises(DesignError):
        wordlength_pattern(np.ones(6, dtype=np.int64), DesignSpec((2, 3)))
    with pytest.raises(DesignError):
        wordlength_pattern(np.zeros(8, dtype=np.int64), DesignSpec((2, 2, 2)))
    with pytest.raises(DesignError):
        is_regular(2 * np.ones(8, dtype=np.int64), DesignSpec((2, 2, 2)))


def test_two_level_squared_modulus():
    for n0, n1 in itertools.product(range(6), repeat=2):
        assert squared_modulus([n0, n1]) == (n0 - n1) ** 2


def _modulus_sq(counts, k=1):
    s = len(counts)
    return abs(sum(c * cmath.exp(2j * cmath.pi * k * h / s) for h, c in enumerate(counts))) ** 2


@given(st.sampled_from([2, 3]).flatmap(lambda s: st.lists(st.integers(0, 50), min_size=s, max_size=s)))
def test_squared_modulus_exact_for_two_and_three_levels(counts):
    s = len(counts)
    vals = {squared_modulus(counts, g) for g in range(1, s)}
    assert len(vals) == 1
    assert Fraction(vals.pop()) == squared_modulus_by_variance(counts)
    ref = _modulus_sq(counts)
    assert abs(squared_modulus(counts) - ref) < 1e-6 * max(1.0, ref)


def test_five_levels_modulus_can_be_irrational():
    counts = [0, 0, 0, 1, 1]
    assert cmath.isclose(_modulus_sq(counts), 2 + 2 * np.cos(2 * np.pi / 5))
    assert squared_modulus(counts, 1) == 1 and squared_modulus(counts, 2) == 2


@given(st.sampled_from([2, 3, 5, 7, 11]).flatmap(lambda s: st.lists(st.integers(0, 50), min_size=s, max_size=s)))
def test_orbit_sum_is_exact(counts):
    s = len(counts)
    ref = sum(_modulus_sq(counts, k) for k in range(1, s))
    total = orbit_squared_modulus(counts)
    assert abs(total - ref) < 1e-6 * max(1.0, ref)
    assert Fraction(total) == (s - 1) * squared_modulus_by_variance(counts)
    # the lag-gamma form summed over the orbit gives the same integer
    relabel = [[counts[(pow(k, -1, s) * h) % s] for h in range(s)] for k in range(1, s)]
    assert sum(squared_modulus(n) for n in relabel) == total


@given(st.data())
def test_strata_formula_matches_oracle(data):
    spec, y, alpha = random_case(levels_st, data)
    got = coeff_from_strata(y, alpha, spec, check=False)
    ref = coeff_oracle(y, alpha, spec)
    assert abs(got.value - ref) < 1e-9
    assert got.centered == (abs(ref) < 1e-9) or sum(alpha) == 0


@given(st.data())
def test_strata_recovered_from_coefficients(data):
    spec, y, alpha = random_case(levels_st, data)
    if not any(alpha):
        return
    table = coefficient_table(y, spec)
    assert np.array_equal(strata_from_coefficients(table, alpha, spec), strata_vector(y, alpha, spec))


@given(st.data())
def test_conjugate_symmetry(data):
    spec, y, alpha = random_case(levels_st, data)
    table = coefficient_table(y, spec)
    neg = residue_scale(-1, alpha, spec)
    assert abs(np.conj(table[alpha]) - table[neg]) < 1e-9
    assert cmath.isclose(table[(0,) * spec.m], y.sum() / spec.size, abs_tol=1e-12)


@given(st.data())
def test_pattern_is_label_invariant(data):
    spec, y, _ = random_case(prime_levels_st, data)
    if y.sum() == 0:
        return
    perm = data.draw(st.permutations(range(spec.m)))
    grid = y.reshape(spec.levels, order="F")
    z = np.transpose(grid, perm).reshape(-1, order="F")
    assert wordlength_pattern(z, spec) == wordlength_pattern(y, spec)


@given(st.data())
def test_strength_matches_constant_margins(data):
    levels = data.draw(st.sampled_from([(2, 2, 2), (3, 3), (2, 3, 2), (3, 3, 3)]))
    spec = DesignSpec(levels)
    # mixtures of regular pieces and noise reach every strength
    y = np.zeros(spec.size, dtype=np.int64)
    for alpha in data.draw(st.lists(st.sampled_from(exponents(spec, nonzero=True)), max_size=3)):
        y = y + regular_fraction(spec, [(alpha, data.draw(st.integers(0, 5)))])
    if data.draw(st.booleans()):
        y[data.draw(st.integers(0, spec.size - 1))] += 1
    t = oa_strength(y, spec)
    for k in range(spec.m + 1):
        const = all(fully_projects(y, spec, I) for I in itertools.combinations(range(spec.m), k))
        assert const == (k <= t)


def test_margins_edge_cases():
    spec = DesignSpec((2, 3))
    y = np.arange(6)
    assert margins(y, spec, ()).tolist() == 15
    assert np.array_equal(margins(y, spec, (0, 1)), y.reshape((2, 3), order="F"))
    assert margins(y, spec, (1,)).tolist() == [1, 5, 9]
    assert np.array_equal(margins(y, spec, (1, 0)), y.reshape((2, 3), order="F").T)
    with pytest.raises(DesignError):
        margins(y, spec, (0, 0))
    with pytest.raises(DesignError):
        margins(y, spec, (2,))


@given(st.lists(st.integers(0, 1), min_size=27, max_size=27))
def test_two_margins_imply_one_margins(bits):
    spec = DesignSpec((3, 3, 3))
    y = np.array(bits)
    if all(fully_projects(y, spec, I) for I in itertools.combinations(range(3), 2)):
        assert all(fully_projects(y, spec, (j,)) for j in range(3))


@given(st.lists(st.integers(0, 2), min_size=12, max_size=12))
def test_indicator_certificate(values):
    spec = DesignSpec((2, 6))
    y = np.array(values)
    assert is_indicator(y, spec, certificate=True) == bool(np.all(y <= 1))


def test_report(regular32):
    spec, y = regular32
    rep = report(y, spec)
    assert rep["size"] == 8 and rep["strength"] == 2 and rep["regular"] is True
    text = format_report(rep)
    assert "wlp: 0 0 2 1 0" in text and "indicator: true" in text
    assert "wlp" not in report(np.ones(16, dtype=np.int64), DesignSpec((4, 4)))
