"""Exact rationals and truncated p-adic integers.

Rationals are stdlib :class:`fractions.Fraction` (always reduced, positive
denominator).  p-adic integers are residues mod ``p**j``; binary operations
between values of different precision truncate to the smaller one.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from sympy.ntheory import is_quad_residue, sqrt_mod

BigRational = Fraction

__all__ = [
    "BigRational",
    "NotAUnit",
    "NoSquareRoot",
    "NotPIntegral",
    "PadicTruncated",
    "padic_invert",
    "padic_pow",
    "hensel_sqrt",
    "valuation",
]


class NotAUnit(ArithmeticError):
    pass


class NoSquareRoot(ArithmeticError):
    pass


class NotPIntegral(ArithmeticError):
    pass


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicTruncated:
    """An element of ``Z/p^j``, viewed as a p-adic integer known mod ``p^j``."""

    __slots__ = ("p", "j", "residue", "modulus")

    def __init__(self, residue: int, p: int, j: int):
        if p < 2:
            raise ValueError(f"p must be >= 2, got {p}")
        if j < 1:
            raise ValueError(f"precision must be >= 1, got {j}")
        modulus = p**j
        self.p = p
        self.j = j
        self.modulus = modulus
        self.residue = residue % modulus

    @classmethod
    def _raw(cls, residue: int, p: int, j: int, modulus: int) -> "PadicTruncated":
        obj = object.__new__(cls)
        obj.p = p
        obj.j = j
        obj.modulus = modulus
        obj.residue = residue % modulus
        return obj

    @classmethod
    def from_rational(cls, q, p: int, j: int) -> "PadicTruncated":
        q = Fraction(q)
        if q.denominator % p == 0:
            raise NotPIntegral(f"{q} is not {p}-integral")
        m = p**j
        return cls._raw(q.numerator * pow(q.denominator, -1, m), p, j, m)

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other):
        """Return (residue_a, residue_b, j, modulus) at the common precision."""
        if isinstance(other, PadicTruncated):
            if other.p != self.p:
                raise ValueError(f"mixed primes {self.p} and {other.p}")
            if other.j < self.j:
                return self.residue % other.modulus, other.residue, other.j, other.modulus
            if other.j > self.j:
                return self.residue, other.residue % self.modulus, self.j, self.modulus
            return self.residue, other.residue, self.j, self.modulus
        if isinstance(other, int):
            return self.residue, other % self.modulus, self.j, self.modulus
        if isinstance(other, Rational):
            o = PadicTruncated.from_rational(other, self.p, self.j)
            return self.residue, o.residue, self.j, self.modulus
        return None

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, j, m = c
        return PadicTruncated._raw(a + b, self.p, j, m)

    __radd__ = __add__

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, j, m = c
        return PadicTruncated._raw(a - b, self.p, j, m)

    def __rsub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, j, m = c
        return PadicTruncated._raw(b - a, self.p, j, m)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, j, m = c
        return PadicTruncated._raw(a * b, self.p, j, m)

    __rmul__ = __mul__

    def __neg__(self):
        return PadicTruncated._raw(-self.residue, self.p, self.j, self.modulus)

    def __truediv__(self, other):
        if isinstance(other, PadicTruncated):
            return self * padic_invert(other)
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, j, m = c
        return self * padic_invert(PadicTruncated._raw(b, self.p, j, m))

    def __rtruediv__(self, other):
        return padic_invert(self) * other

    def __pow__(self, e: int):
        return padic_pow(self, e)

    # -- predicates -------------------------------------------------------

    def is_unit(self) -> bool:
        return self.residue % self.p != 0

    def is_zero(self) -> bool:
        return self.residue == 0

    def valuation(self) -> int:
        """Valuation of the residue, capped at ``j`` for zero."""
        if self.residue == 0:
            return self.j
        return valuation(self.residue, self.p)

    def truncate(self, j: int) -> "PadicTruncated":
        if j > self.j:
            raise ValueError(f"cannot raise precision from {self.j} to {j}")
        m = self.p**j
        return PadicTruncated._raw(self.residue, self.p, j, m)

    def __eq__(self, other):
        c = self._coerce(other) if isinstance(other, (PadicTruncated, int, Rational)) else None
        if c is None:
            return NotImplemented
        a, b, _, _ = c
        return a == b

    def __hash__(self):
        return hash((self.residue, self.p, self.j))

    def __bool__(self):
        return self.residue != 0

    def __repr__(self):
        return f"{self.residue} mod {self.p}^{self.j}"

    def to_json(self) -> dict:
        return {"residue": self.residue, "p": self.p, "j": self.j}

    @classmethod
    def from_json(cls, obj: dict) -> "PadicTruncated":
        return cls(int(obj["residue"]), int(obj["p"]), int(obj["j"]))


def padic_invert(x: PadicTruncated) -> PadicTruncated:
    if not x.is_unit():
        raise NotAUnit(f"{x} is not a unit")
    return PadicTruncated._raw(pow(x.residue, -1, x.modulus), x.p, x.j, x.modulus)


def padic_pow(x: PadicTruncated, e: int) -> PadicTruncated:
    if e < 0:
        x = padic_invert(x)
        e = -e
    return PadicTruncated._raw(pow(x.residue, e, x.modulus), x.p, x.j, x.modulus)


def hensel_sqrt(a: int, p: int, j: int) -> PadicTruncated:
    """Square root of ``a`` mod ``p**j``.

    The root is pinned by its least residue mod ``p`` lying in ``(0, p/2)``
    and then lifted by Newton iteration.
    """
    if p == 2:
        raise ValueError("hensel_sqrt requires an odd prime")
    if a % p == 0:
        raise ValueError(f"{p} divides {a}")
    if not is_quad_residue(a % p, p):
        raise NoSquareRoot(f"{a} is not a square mod {p}")
    r = min(sqrt_mod(a % p, p, all_roots=True))
    k = 1
    while k < j:
        k = min(2 * k, j)
        m = p**k
        r = (r - (r * r - a) * pow(2 * r, -1, m)) % m
    return PadicTruncated(r, p, j)
