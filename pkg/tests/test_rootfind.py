import cmath
import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pair_distance, unity_minus_one
from unitclust.errors import DidNotConverge, MismatchedDegree, NonFiniteCoefficient
from unitclust.poly import make_polynomial, reverse
from unitclust.rootfind import RootSet, SolveOptions, certify_roots, find_roots


def test_difference_of_squares():
    rs = find_roots(make_polynomial([-1, 0, 1]))
    assert rs.converged and rs.degree == 2
    assert pair_distance(rs.roots, [1, -1]) < 1e-15
    assert np.all(rs.residuals < 1e-15)


def test_quadratic_formula_oracle():
    a, b, c = 2.0, -3.0, 1.0
    disc = cmath.sqrt(b * b - 4 * a * c)
    expected = [(-b + disc) / (2 * a), (-b - disc) / (2 * a)]
    rs = find_roots(make_polynomial([c, b, a]))
    assert pair_distance(rs.roots, expected) < 1e-14
    assert pair_distance(rs.roots, [1.0, 0.5]) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 8, 64, 256])
def test_roots_of_unity(n):
    rs = find_roots(unity_minus_one(n))
    exact = np.exp(2j * np.pi * np.arange(n) / n)
    assert rs.converged
    assert pair_distance(rs.roots, exact) < 1e-12


@pytest.mark.parametrize("mode", ["cauchy-bound", "geometric-mean"])
def test_seed_modes_both_converge(mode):
    p = make_polynomial(np.random.default_rng(3).normal(size=51))
    rs = find_roots(p, SolveOptions(seed_radius_mode=mode))
    assert rs.converged


def test_certify_roots_examples():
    p = make_polynomial([-1, 0, 1])
    exact = RootSet(np.array([1.0, -1.0], complex), np.zeros(2), 0, True)
    assert certify_roots(p, exact).tolist() == [0.0, 0.0]
    d = 1e-6
    z = 1 + d
    # direct evaluation oracle: |z^2 - 1| / (2 * z^2)
    oracle = abs(z * z - 1) / (2 * z * z)
    res = certify_roots(p, RootSet(np.array([z, -1.0], complex), np.zeros(2), 0, True))
    assert res[0] == pytest.approx(oracle, rel=1e-9)
    assert res[0] == pytest.approx(1e-6, rel=1e-5)
    rs = find_roots(unity_minus_one(8))
    assert np.all(certify_roots(unity_minus_one(8), rs) < 1e-14)


def test_certify_roots_mismatch():
    with pytest.raises(MismatchedDegree):
        certify_roots(make_polynomial([1, 0, 1]), RootSet(np.array([1j]), np.zeros(1), 0, True))


def test_residuals_stored_match_certify():
    p = make_polynomial(np.random.default_rng(5).choice([-1.0, 1.0], 101))
    rs = find_roots(p)
    assert np.allclose(rs.residuals, certify_roots(p, rs), rtol=0, atol=1e-16)


def test_unconverged_returns_best_iterate():
    p = make_polynomial(np.random.default_rng(1).normal(size=200))
    with pytest.warns(DidNotConverge):
        rs = find_roots(p, SolveOptions(max_iterations=1))
    assert not rs.converged and rs.degree == 199


def test_dynamic_range_rejected():
    with pytest.raises(NonFiniteCoefficient):
        find_roots(make_polynomial([1e-200, 1, 1e200]))


def test_scaling_leaves_roots_unchanged():
    p = make_polynomial(np.random.default_rng(2).choice([-1.0, 1.0], 65))
    a = find_roots(p).roots
    b = find_roots(p.scaled(1e3)).roots
    assert pair_distance(a, b) < 1e-10


def test_high_degree_no_overflow():
    # |z|^N overflows for N = 2048 outside the disc unless the solver avoids it
    p = make_polynomial(np.random.default_rng(4).choice([-1.0, 1.0], 2049))
    rs = find_roots(p)
    assert rs.converged and np.all(np.isfinite(rs.roots))


def test_rootset_json_schema():
    d = json.loads(find_roots(make_polynomial([-1, 0, 1])).to_json())
    assert set(d) >= {"roots", "residuals", "converged"}
    assert all(len(pair) == 2 for pair in d["roots"])
    assert RootSet.from_dict(d).degree == 2


def vieta_errors(c, roots):
    c = np.asarray(c, complex)
    n = len(c) - 1
    s = roots.sum()
    s_exact = -c[n - 1] / c[n]
    prod = np.prod(roots)
    prod_exact = (-1) ** n * c[0] / c[n]
    return abs(s - s_exact) / max(1.0, abs(s_exact)), abs(prod - prod_exact) / abs(prod_exact)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 512), st.integers(0, 2**32 - 1))
def test_vieta_random_sign_polynomials(n, seed):
    c = np.random.default_rng(seed).choice([-1.0, 1.0], n + 1)
    rs = find_roots(make_polynomial(c))
    assert rs.converged and np.all(rs.residuals <= 1e-10)
    es, ep = vieta_errors(c, rs.roots)
    assert es < 1e-8 and ep < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 200), st.integers(0, 2**32 - 1))
def test_reversal_inverts_roots(n, seed):
    c = np.random.default_rng(seed).normal(size=n + 1)
    p = make_polynomial(c)
    rs = find_roots(p)
    if np.min(np.abs(rs.roots)) < 1e-3:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("error", DidNotConverge)
        rq = find_roots(reverse(p))
    assert pair_distance(rq.roots, 1 / rs.roots) < 1e-8
