from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from unitary_eis.arith import (
    BigRational,
    NoSquareRoot,
    NotAUnit,
    NotPIntegral,
    PadicTruncated,
    hensel_sqrt,
    padic_invert,
    padic_pow,
    valuation,
)


def P(r, p=5, j=3):
    return PadicTruncated(r, p, j)


def test_invert_examples():
    assert padic_invert(P(1)) == P(1)
    assert padic_invert(P(2)).residue == 63
    with pytest.raises(NotAUnit):
        padic_invert(P(5))


def test_pow_examples():
    assert padic_pow(P(2), 0) == P(1)
    assert padic_pow(P(2), -1).residue == 63
    assert padic_pow(P(3, j=2), 3).residue == 2


def test_hensel_examples():
    assert hensel_sqrt(-1, 5, 1).residue == 2
    assert hensel_sqrt(-1, 5, 3).residue == 57
    with pytest.raises(NoSquareRoot):
        hensel_sqrt(2, 5, 2)
    with pytest.raises(ValueError):
        hensel_sqrt(10, 5, 2)


def test_canonical_branch_is_small_root():
    for p in (5, 13, 17, 29, 37):
        r = hensel_sqrt(-1, p, 1).residue
        assert 0 < r < p / 2


def test_mixed_precision_truncates():
    x = P(57, j=3) + P(3, j=1)
    assert (x.j, x.residue) == (1, 0)
    with pytest.raises(ValueError):
        P(1, p=5) + P(1, p=7)


def test_from_rational():
    assert PadicTruncated.from_rational(Fraction(1, 2), 5, 3).residue == 63
    with pytest.raises(NotPIntegral):
        PadicTruncated.from_rational(Fraction(1, 5), 5, 3)


def test_valuation_and_json():
    assert valuation(250, 5) == 3
    assert P(25).valuation() == 2
    assert P(0).valuation() == 3
    x = P(99)
    assert PadicTruncated.from_json(x.to_json()) == x
    assert x.to_json() == {"residue": 99, "p": 5, "j": 3}


units = st.integers(min_value=1, max_value=5**6 - 1).filter(lambda r: r % 5)


@given(units, st.integers(min_value=1, max_value=6))
def test_invert_commutes_with_truncation(r, jj):
    x = PadicTruncated(r, 5, 6)
    assert padic_invert(x).truncate(jj) == padic_invert(x.truncate(jj))


@given(units, st.integers(-6, 6), st.integers(-6, 6))
def test_pow_additive(r, e1, e2):
    x = PadicTruncated(r, 5, 6)
    assert padic_pow(x, e1 + e2) == padic_pow(x, e1) * padic_pow(x, e2)


@given(st.integers(1, 10**6), st.sampled_from([5, 13, 17, 29]), st.integers(1, 8))
def test_hensel_squares_back(a, p, j):
    if a % p == 0 or pow(a, (p - 1) // 2, p) != 1:
        return
    r = hensel_sqrt(a, p, j)
    assert (r * r).residue == a % p**j


def _naive(op, a, b):
    # unreduced pairs (num, den)
    (an, ad), (bn, bd) = a, b
    if op == "+":
        return an * bd + bn * ad, ad * bd
    if op == "-":
        return an * bd - bn * ad, ad * bd
    if op == "*":
        return an * bn, ad * bd
    return an * bd, ad * bn


@given(
    st.integers(-10**6, 10**6), st.integers(1, 10**6),
    st.integers(-10**6, 10**6), st.integers(1, 10**6),
    st.sampled_from("+-*/"),
)
def test_bigrational_against_unreduced_oracle(an, ad, bn, bd, op):
    if op == "/" and bn == 0:
        return
    a, b = BigRational(an, ad), BigRational(bn, bd)
    got = {"+": a + b, "-": a - b, "*": a * b, "/": a / b if bn else None}[op]
    num, den = _naive(op, (an, ad), (bn, bd))
    assert got.numerator * den == num * got.denominator
    assert got.denominator > 0
