import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from unitary_eis.reps import (
    HighestWeight,
    HomogPolynomial,
    TooManyParts,
    decompose_tau,
    graded_component,
    highest_weight_vector,
    monomial_basis,
    phi_kappa_eval,
    restrict_decompose,
    restriction_grading,
    tau_action,
    weyl_dimension,
)
from unitary_eis.rings import det, leading_minor, mat_mul


def z(r, s, i, j):
    return HomogPolynomial.variable(r, s, i, j)


def test_weyl_examples():
    assert weyl_dimension(HighestWeight((0, 0)), 2) == 1
    assert weyl_dimension(HighestWeight((1, 0)), 2) == 2
    assert weyl_dimension(HighestWeight((2, 1, 0)), 3) == 8
    assert weyl_dimension(HighestWeight((1,)), 4) == 4


def test_highest_weight_validation():
    with pytest.raises(ValueError):
        HighestWeight((1, 2))
    with pytest.raises(ValueError):
        HighestWeight((1, -1))
    assert HighestWeight((3, 1, 0)).exponents(3) == (2, 1, 0)


def test_monomial_basis_examples():
    assert monomial_basis(0, 2, 2) == [(0, 0, 0, 0)]
    assert len(monomial_basis(1, 2, 2)) == 4
    assert len(monomial_basis(2, 2, 2)) == 10
    for d in range(4):
        for r, s in [(1, 3), (2, 2), (3, 2)]:
            basis = monomial_basis(d, r, s)
            assert len(basis) == comb(r * s + d - 1, d) == len(set(basis))


def test_tau_examples():
    g = z(2, 2, 0, 0)
    ident = [[1, 0], [0, 1]]
    assert tau_action(g, ident, ident) == g
    assert tau_action(g, [[2, 0], [0, 1]], [[3, 0], [0, 1]]) == g * 6


def _rand_matrix(rng, n, upper=False):
    return [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) if (not upper or j >= i) else Fraction(0)
             for j in range(n)] for i in range(n)]


def _rand_poly(rng, r, s, d):
    basis = monomial_basis(d, r, s)
    terms = {m: Fraction(rng.randint(-3, 3)) for m in rng.sample(basis, min(3, len(basis)))}
    return HomogPolynomial(r, s, terms)


def test_tau_is_a_homomorphism():
    rng = random.Random(7)
    for _ in range(10):
        r, s = rng.choice([(1, 2), (2, 2), (2, 1)])
        g = _rand_poly(rng, r, s, rng.randint(1, 3))
        a1, a2 = _rand_matrix(rng, r), _rand_matrix(rng, r)
        b1, b2 = _rand_matrix(rng, s), _rand_matrix(rng, s)
        lhs = tau_action(g, mat_mul(a1, a2), mat_mul(b1, b2))
        # g(t(a1 a2) z b1 b2) = [tau(a2,b2) g](t a1 z b1)
        assert lhs == tau_action(tau_action(g, a2, b2), a1, b1)


def test_decompose_examples():
    t = decompose_tau(2, 2, 2)
    assert {(a.parts, b.parts) for a, b in t.constituents} == {((2, 0), (2, 0)), ((1, 1), (1, 1))}
    t = decompose_tau(1, 3, 2)
    assert [(a.parts, b.parts) for a, b in t.constituents] == [((1, 0, 0), (1, 0))]
    t = decompose_tau(0, 2, 3)
    assert [(a.parts, b.parts) for a, b in t.constituents] == [((0, 0), (0, 0, 0))]
    assert t.to_json()["check"] == "PASS"


def test_restrict_examples():
    assert len(restrict_decompose(1, 1, 1).constituents) == 4
    assert len(restrict_decompose(2, 1, 1).constituents) == 10
    assert restrict_decompose(0, 2, 1).constituents == ((0, 0, 0, 0),)


@pytest.mark.parametrize("d", range(5))
def test_dimension_identities(d):
    for q in range(1, 4):
        for s in range(1, 4):
            total, ambient = decompose_tau(d, q, s).dimension_check()
            assert total == ambient == comb(q * s + d - 1, d)
    for r in (1, 2):
        for s in (1, 2):
            total, ambient = restrict_decompose(d, r, s).dimension_check()
            assert total == ambient


def test_highest_weight_examples():
    assert highest_weight_vector(HighestWeight((3,)), 1, 1) == z(1, 1, 0, 0) ** 3
    z11, z12, z21, z22 = (z(2, 2, i, j) for i in (0, 1) for j in (0, 1))
    assert highest_weight_vector(HighestWeight((2, 1)), 2, 2) == z11 * (z11 * z22 - z12 * z21)
    assert highest_weight_vector(HighestWeight((1, 1)), 2, 2) == z11 * z22 - z12 * z21
    with pytest.raises(TooManyParts):
        highest_weight_vector(HighestWeight((1, 1)), 1, 3)


def test_phi_examples(gauss):
    i1 = gauss(1, 1)
    assert phi_kappa_eval(HighestWeight((1,)), [[i1]], gauss.one) == i1
    assert phi_kappa_eval(HighestWeight((2,)), [[i1]], gauss.one) == gauss(0, 2)
    assert phi_kappa_eval(HighestWeight((1, 1)), [[gauss(1), gauss(0)], [gauss(0), gauss(2)]], gauss.one) == 2
    with pytest.raises(TooManyParts):
        phi_kappa_eval(HighestWeight((1, 1)), [[i1]], gauss.one)


def test_phi_matches_polynomial_and_det_power(gauss):
    rng = random.Random(3)
    for _ in range(20):
        A = [[gauss(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(2)] for _ in range(2)]
        lam = HighestWeight(rng.choice([(2, 1), (3, 0), (1, 1), (2, 2)]))
        assert highest_weight_vector(lam, 2, 2).evaluate(A) == phi_kappa_eval(lam, A, gauss.one)
    A = [[gauss(1, 2), gauss(0, 1)], [gauss(3), gauss(-1, 1)]]
    assert phi_kappa_eval(HighestWeight((3, 3)), A, gauss.one) == det(A) ** 3


def _eigen_check(rng):
    r, s = rng.randint(1, 3), rng.randint(1, 3)
    mu = min(r, s)
    nparts = rng.randint(1, min(2, mu))
    parts = sorted((rng.randint(1, 3) for _ in range(nparts)), reverse=True)
    lam = HighestWeight(parts)
    P = highest_weight_vector(lam, r, s)
    u, v = _rand_matrix(rng, r, upper=True), _rand_matrix(rng, s, upper=True)
    factor = Fraction(1)
    for j, e in enumerate(lam.exponents(mu), start=1):
        factor *= (leading_minor(u, j) * leading_minor(v, j)) ** e
    return tau_action(P, u, v) == P * factor


def test_eigenvector_property():
    rng = random.Random(2024)
    assert all(_eigen_check(rng) for _ in range(60))


def test_restriction_grading_example():
    # n = 2, r = s = 1: z11 in X (d3), z12 in Y (d1), z21 in Z (d2), z22 in W (d4)
    assert restriction_grading((1, 0, 0, 0), 1, 1) == (0, 0, 1, 0)
    assert restriction_grading((0, 1, 0, 0), 1, 1) == (1, 0, 0, 0)
    assert restriction_grading((0, 0, 1, 0), 1, 1) == (0, 1, 0, 0)
    assert restriction_grading((0, 0, 0, 1), 1, 1) == (0, 0, 0, 1)


def _block_diag(a, b):
    n = len(a) + len(b)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i, row in enumerate(a):
        for j, c in enumerate(row):
            out[i][j] = c
    k = len(a)
    for i, row in enumerate(b):
        for j, c in enumerate(row):
            out[k + i][k + j] = c
    return out


@pytest.mark.parametrize("r,s", [(1, 1), (1, 2), (2, 1)])
def test_block_diagonal_preserves_grading(r, s):
    rng = random.Random(r * 10 + s)
    n = r + s
    for _ in range(8):
        d = rng.randint(1, 3)
        g = _rand_poly(rng, n, n, d)
        alpha = _block_diag(_rand_matrix(rng, r), _rand_matrix(rng, s))
        beta = _block_diag(_rand_matrix(rng, s), _rand_matrix(rng, r))
        image = tau_action(g, alpha, beta)
        for degs in restrict_decompose(d, r, s).constituents:
            assert tau_action(graded_component(g, r, s, degs), alpha, beta) == graded_component(image, r, s, degs)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(1, 3), st.integers(1, 3))
def test_decompose_multiplicity_free(d, q, s):
    t = decompose_tau(d, q, s)
    assert len(set(t.constituents)) == len(t.constituents)
    for a, b in t.constituents:
        assert a.degree == b.degree == d
        assert len(a.parts) == q and len(b.parts) == s
