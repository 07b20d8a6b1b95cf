"""Polynomial representations of GL_r x GL_s on homogeneous polynomials of r x s matrices.

``tau^d(alpha, beta) g(z) = g(alpha^t z beta)``.  The highest weight vectors
are products of leading minors ``prod_j det_j(z)^{e_j}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from typing import Iterable, Iterator, Sequence

from .rings import det

__all__ = [
    "HighestWeight",
    "HomogPolynomial",
    "BranchingTable",
    "TooManyParts",
    "weyl_dimension",
    "monomial_basis",
    "tau_action",
    "decompose_tau",
    "restrict_decompose",
    "restriction_grading",
    "graded_component",
    "highest_weight_vector",
    "phi_kappa_eval",
    "partitions",
]


class TooManyParts(ValueError):
    pass


@dataclass(frozen=True)
class HighestWeight:
    parts: tuple[int, ...] = ()

    def __init__(self, parts: Iterable[int] = ()):
        parts = tuple(int(x) for x in parts)
        if any(x < 0 for x in parts):
            raise ValueError(f"highest weight {parts} has a negative entry")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"highest weight {parts} is not non-increasing")
        object.__setattr__(self, "parts", parts)

    @property
    def degree(self) -> int:
        return sum(self.parts)

    @property
    def nonzero_parts(self) -> int:
        return sum(1 for x in self.parts if x)

    def is_trivial(self) -> bool:
        return self.degree == 0

    def padded(self, length: int) -> tuple[int, ...]:
        if self.nonzero_parts > length:
            raise TooManyParts(f"{self.parts} has more than {length} nonzero parts")
        core = tuple(x for x in self.parts if x)
        return core + (0,) * (length - len(core))

    def exponents(self, length: int) -> tuple[int, ...]:
        """``e_j = r_j - r_{j+1}`` for ``j < length`` and ``e_length = r_length``."""
        r = self.padded(length)
        return tuple(r[i] - r[i + 1] for i in range(length - 1)) + ((r[-1],) if length else ())

    def __repr__(self):
        return f"HighestWeight{self.parts}"


def partitions(d: int, max_parts: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of ``d`` into at most ``max_parts`` parts, largest first, in reverse-lex order."""
    if max_part is None:
        max_part = d
    if d == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(d, max_part), 0, -1):
        for rest in partitions(d - first, max_parts - 1, first):
            yield (first,) + rest


def weyl_dimension(lam: HighestWeight | Sequence[int], l: int) -> int:
    parts = lam.parts if isinstance(lam, HighestWeight) else tuple(lam)
    if len(parts) > l:
        if any(parts[l:]):
            raise TooManyParts(f"{parts} does not fit GL_{l}")
        parts = parts[:l]
    parts = tuple(parts) + (0,) * (l - len(parts))
    num = 1
    den = 1
    for i in range(l):
        for j in range(i + 1, l):
            num *= parts[i] - parts[j] + j - i
            den *= j - i
    q, rem = divmod(num, den)
    assert rem == 0
    return q


# -- sparse homogeneous polynomials -------------------------------------------

def monomial_basis(d: int, r: int, s: int) -> list[tuple[int, ...]]:
    """Exponent matrices (flattened row-major) of total degree ``d``, in descending lex order."""
    nvars = r * s

    def rec(k: int, remaining: int):
        if k == nvars - 1:
            yield (remaining,)
            return
        for e in range(remaining, -1, -1):
            for rest in rec(k + 1, remaining - e):
                yield (e,) + rest

    if nvars == 0:
        return [()] if d == 0 else []
    return list(rec(0, d))


class HomogPolynomial:
    """A polynomial in the entries ``z_ij`` of an r x s matrix, stored sparsely.

    Keys are flattened row-major exponent tuples; zero coefficients are dropped.
    Coefficients may be any exact commutative ring values (Fraction, CMFieldElement, ...).
    """

    __slots__ = ("r", "s", "terms")

    def __init__(self, r: int, s: int, terms: dict | None = None):
        self.r = r
        self.s = s
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def constant(cls, r: int, s: int, c=1) -> "HomogPolynomial":
        return cls(r, s, {(0,) * (r * s): Fraction(c) if isinstance(c, int) else c})

    @classmethod
    def variable(cls, r: int, s: int, i: int, j: int) -> "HomogPolynomial":
        e = [0] * (r * s)
        e[i * s + j] = 1
        return cls(r, s, {tuple(e): Fraction(1)})

    @classmethod
    def linear_form(cls, r: int, s: int, coeffs: dict[tuple[int, int], object]) -> "HomogPolynomial":
        terms = {}
        for (i, j), c in coeffs.items():
            e = [0] * (r * s)
            e[i * s + j] = 1
            terms[tuple(e)] = c
        return cls(r, s, terms)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.r, self.s)

    def degrees(self) -> set[int]:
        return {sum(k) for k in self.terms}

    @property
    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError("polynomial is not homogeneous")
        return ds.pop() if ds else 0

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "HomogPolynomial") -> "HomogPolynomial":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return HomogPolynomial(self.r, self.s, out)

    def __neg__(self):
        return HomogPolynomial(self.r, self.s, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, HomogPolynomial):
            return HomogPolynomial(self.r, self.s, {k: v * other for k, v in self.terms.items()})
        out: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                c = v1 * v2
                out[k] = out[k] + c if k in out else c
        return HomogPolynomial(self.r, self.s, out)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, e: int) -> "HomogPolynomial":
        result = HomogPolynomial.constant(self.r, self.s)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, HomogPolynomial):
            return NotImplemented
        return self.shape == other.shape and self.terms == other.terms

    def evaluate(self, z: Sequence[Sequence]):
        """Evaluate at a matrix whose entries support ring arithmetic."""
        flat = [c for row in z for c in row]
        total = None
        for k, coeff in self.terms.items():
            term = coeff
            for x, e in zip(flat, k):
                if e:
                    term = term * x**e
            total = term if total is None else total + term
        if total is None:
            return 0
        return total

    def sorted_terms(self) -> list[tuple[tuple[int, ...], object]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in self.sorted_terms():
            mono = "*".join(
                f"z{i // self.s + 1}{i % self.s + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(k) if e
            )
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def tau_action(g: HomogPolynomial, alpha: Sequence[Sequence], beta: Sequence[Sequence]) -> HomogPolynomial:
    """The polynomial ``z -> g(alpha^t z beta)``."""
    r, s = g.shape
    # (alpha^t z beta)_ij = sum_{k,l} alpha[k][i] z_kl beta[l][j]
    subs = []
    for i in range(r):
        for j in range(s):
            coeffs = {}
            for k in range(r):
                if not alpha[k][i]:
                    continue
                for l in range(s):
                    if not beta[l][j]:
                        continue
                    coeffs[(k, l)] = alpha[k][i] * beta[l][j]
            subs.append(HomogPolynomial.linear_form(r, s, coeffs))
    powers: dict[tuple[int, int], HomogPolynomial] = {}

    def power(idx: int, e: int) -> HomogPolynomial:
        key = (idx, e)
        if key not in powers:
            powers[key] = subs[idx] if e == 1 else power(idx, e - 1) * subs[idx]
        return powers[key]

    out = HomogPolynomial(r, s)
    for k, coeff in g.terms.items():
        term = HomogPolynomial.constant(r, s, coeff)
        for idx, e in enumerate(k):
            if e:
                term = term * power(idx, e)
        out = out + term
    return out


# -- branching ----------------------------------------------------------------

@dataclass(frozen=True)
class BranchingTable:
    """Constituents of tau^d_{q,s} (pairs of weights) or of its block restriction (4-tuples)."""

    kind: str
    params: tuple[int, ...]
    constituents: tuple

    def dimension_check(self) -> tuple[int, int]:
        """(sum of constituent dimensions, dimension of the ambient space)."""
        if self.kind == "tau":
            d, q, s = self.params
            total = sum(weyl_dimension(a, q) * weyl_dimension(b, s) for a, b in self.constituents)
            return total, comb(q * s + d - 1, d)
        d, r, s = self.params
        n = r + s

        def sdim(a, b, k):
            return comb(a * b + k - 1, k)

        total = sum(
            sdim(r, r, d1) * sdim(s, s, d2) * sdim(r, s, d3) * sdim(s, r, d4)
            for d1, d2, d3, d4 in self.constituents
        )
        return total, comb(n * n + d - 1, d)

    def to_json(self) -> dict:
        if self.kind == "tau":
            rows = [{"left": list(a.parts), "right": list(b.parts)} for a, b in self.constituents]
        else:
            rows = [list(t) for t in self.constituents]
        total, expected = self.dimension_check()
        return {
            "kind": self.kind,
            "params": list(self.params),
            "constituents": rows,
            "dimension_sum": total,
            "ambient_dimension": expected,
            "check": "PASS" if total == expected else "FAIL",
        }


def decompose_tau(d: int, q: int, s: int) -> BranchingTable:
    """Irreducible constituents of tau^d_{q,s}, each of multiplicity one."""
    if d < 0 or q < 1 or s < 1:
        raise ValueError("need d >= 0 and q, s >= 1")
    mu = min(q, s)
    rows = []
    for part in partitions(d, mu):
        rows.append((HighestWeight(part + (0,) * (q - len(part))),
                     HighestWeight(part + (0,) * (s - len(part)))))
    return BranchingTable("tau", (d, q, s), tuple(rows))


def restrict_decompose(d: int, r: int, s: int) -> BranchingTable:
    """Summands tau^{d1}_{r,r} x tau^{d2}_{s,s} x tau^{d3}_{r,s} x tau^{d4}_{s,r} of the restriction."""
    if d < 0 or r < 1 or s < 1:
        raise ValueError("need d >= 0 and r, s >= 1")
    rows = tuple(t for t in product(range(d + 1), repeat=4) if sum(t) == d)
    return BranchingTable("restrict", (d, r, s), rows)


def restriction_grading(exponents: Sequence[int], r: int, s: int) -> tuple[int, int, int, int]:
    """Block degrees ``(d1, d2, d3, d4)`` of a monomial on an n x n matrix, n = r + s.

    Rows split as (r, s) and columns as (s, r), so ``z = [[X, Y], [Z, W]]`` with
    X r x s, Y r x r, Z s x s, W s x r, and the degrees are those in (Y, Z, X, W).
    """
    n = r + s
    d1 = d2 = d3 = d4 = 0
    for idx, e in enumerate(exponents):
        if not e:
            continue
        i, j = divmod(idx, n)
        top, left = i < r, j < s
        if top and left:
            d3 += e
        elif top:
            d1 += e
        elif left:
            d2 += e
        else:
            d4 += e
    return (d1, d2, d3, d4)


def graded_component(g: HomogPolynomial, r: int, s: int, degrees: tuple[int, int, int, int]) -> HomogPolynomial:
    return HomogPolynomial(g.r, g.s, {k: v for k, v in g.terms.items()
                                      if restriction_grading(k, r, s) == tuple(degrees)})


def highest_weight_vector(lam: HighestWeight, r: int, s: int) -> HomogPolynomial:
    """``prod_j det_j(z)^{e_j}`` over j <= min(r, s), expanded."""
    mu = min(r, s)
    exps = lam.exponents(mu)
    z = [[HomogPolynomial.variable(r, s, i, j) for j in range(s)] for i in range(r)]
    out = HomogPolynomial.constant(r, s)
    for j, e in enumerate(exps, start=1):
        if e:
            minor = det([row[:j] for row in z[:j]])
            out = out * minor**e
    return out


def phi_kappa_eval(lam: HighestWeight | None, A: Sequence[Sequence], one=1):
    """Value of the highest weight vector of ``lam`` at the square matrix ``A``.

    ``one`` is returned for the trivial weight.
    """
    if lam is None or lam.is_trivial():
        return one
    m = len(A)
    exps = lam.exponents(m)
    out = one
    for j, e in enumerate(exps, start=1):
        if e:
            out = out * det([list(row[:j]) for row in A[:j]]) ** e
    return out
