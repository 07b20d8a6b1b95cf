"""Imaginary quadratic fields K = Q(sqrt(delta)) with a split prime p."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence

from sympy import factorint, isprime
from sympy.ntheory import is_quad_residue

from .arith import NotPIntegral, PadicTruncated, hensel_sqrt

__all__ = [
    "CMField",
    "CMFieldElement",
    "WeightTuple",
    "UnitGroup",
    "NotSplit",
    "ZeroArgument",
    "conj",
    "norm_KE",
    "norm_kv",
    "iota_p",
    "unit_group",
]


class NotSplit(ValueError):
    pass


class ZeroArgument(ZeroDivisionError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


class CMFieldElement:
    """``a + b*sqrt(delta)`` with rational coordinates."""

    __slots__ = ("a", "b", "delta", "_hash")

    def __init__(self, a, b=0, delta: int = -1):
        self.a = _frac(a)
        self.b = _frac(b)
        self.delta = delta
        self._hash = None

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, delta: int) -> "CMFieldElement":
        obj = object.__new__(cls)
        obj.a = a
        obj.b = b
        obj.delta = delta
        obj._hash = None
        return obj

    def _lift(self, other):
        if isinstance(other, CMFieldElement):
            if other.delta != self.delta:
                raise ValueError(f"elements of different fields ({self.delta}, {other.delta})")
            return other
        if isinstance(other, (int, Rational)):
            return CMFieldElement._raw(Fraction(other), Fraction(0), self.delta)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CMFieldElement._raw(self.a + o.a, self.b + o.b, self.delta)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CMFieldElement._raw(self.a - o.a, self.b - o.b, self.delta)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return CMFieldElement._raw(o.a - self.a, o.b - self.b, self.delta)

    def __neg__(self):
        return CMFieldElement._raw(-self.a, -self.b, self.delta)

    def __mul__(self, other):
        if isinstance(other, CMFieldElement):
            if other.delta != self.delta:
                raise ValueError(f"elements of different fields ({self.delta}, {other.delta})")
            a, b, c, d = self.a, self.b, other.a, other.b
            if not b and not d:
                return CMFieldElement._raw(a * c, b, self.delta)
            return CMFieldElement._raw(a * c + self.delta * b * d, a * d + b * c, self.delta)
        if isinstance(other, (int, Rational)):
            return CMFieldElement._raw(self.a * other, self.b * other, self.delta)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "CMFieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return CMFieldElement._raw(self.a / n, -self.b / n, self.delta)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = CMFieldElement._raw(Fraction(1), Fraction(0), self.delta)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def conj(self) -> "CMFieldElement":
        return CMFieldElement._raw(self.a, -self.b, self.delta)

    def norm(self) -> Fraction:
        return self.a * self.a - self.delta * self.b * self.b

    def is_rational(self) -> bool:
        return self.b == 0

    def is_p_integral(self, p: int) -> bool:
        return self.a.denominator % p != 0 and self.b.denominator % p != 0

    def __eq__(self, other):
        if isinstance(other, CMFieldElement):
            return self.a == other.a and self.b == other.b and self.delta == other.delta
        if isinstance(other, (int, Rational)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.a, self.b, self.delta)) if self.b else hash(self.a)
        return self._hash

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def sort_key(self):
        return (self.a, self.b)

    def __repr__(self):
        if not self.b:
            return str(self.a)
        root = f"sqrt({self.delta})"
        if not self.a:
            return f"{self.b}*{root}"
        sign = "+" if self.b > 0 else "-"
        return f"({self.a} {sign} {abs(self.b)}*{root})"

    def to_json(self) -> dict:
        return {"a": _rat_str(self.a), "b": _rat_str(self.b)}

    @classmethod
    def from_json(cls, obj, delta: int) -> "CMFieldElement":
        if isinstance(obj, Mapping):
            return cls(Fraction(obj["a"]), Fraction(obj.get("b", 0)), delta)
        return cls(Fraction(obj), 0, delta)


def _rat_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class WeightTuple:
    """Weight ``(k, nu)``; ``nu`` is indexed by the CM type (one place here)."""

    k: int
    nu: tuple[int, ...] = (0,)

    def __init__(self, k: int, nu: int | Sequence[int] = 0):
        object.__setattr__(self, "k", int(k))
        if isinstance(nu, int):
            nu = (nu,)
        object.__setattr__(self, "nu", tuple(int(v) for v in nu))

    @property
    def nu0(self) -> int:
        if len(self.nu) != 1:
            raise NotImplementedError("only one archimedean place is supported")
        return self.nu[0]

    def __repr__(self):
        return f"({self.k}, {self.nu0})"


@dataclass(frozen=True)
class UnitGroup:
    elements: tuple[CMFieldElement, ...]

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self.elements


@dataclass(eq=False)
class CMField:
    """K = Q(sqrt(delta)) over E = Q, with p split in K and a fixed p-adic embedding.

    The embedding sends ``sqrt(delta)`` to the Hensel lift of the square
    root of delta mod p whose least residue lies in ``(0, p/2)``.
    """

    delta: int
    p: int
    _roots: dict = dc_field(default_factory=dict, repr=False)
    _iota_cache: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        d, p = self.delta, self.p
        if d >= 0:
            raise ValueError(f"delta must be negative, got {d}")
        if d != -1 and any(e > 1 for e in factorint(-d).values()):
            raise ValueError(f"delta {d} is not squarefree")
        if p == 2 or not isprime(p):
            raise NotSplit(f"p = {p} must be an odd prime")
        if d % p == 0 or not is_quad_residue(d % p, p):
            raise NotSplit(f"prime not split: {p} does not split in Q(sqrt({d}))")

    def __eq__(self, other):
        return isinstance(other, CMField) and (self.delta, self.p) == (other.delta, other.p)

    def __hash__(self):
        return hash((self.delta, self.p))

    # -- elements ---------------------------------------------------------

    def __call__(self, a, b=0) -> CMFieldElement:
        return CMFieldElement(a, b, self.delta)

    @property
    def one(self) -> CMFieldElement:
        return CMFieldElement(1, 0, self.delta)

    @property
    def zero(self) -> CMFieldElement:
        return CMFieldElement(0, 0, self.delta)

    @property
    def sqrt_delta(self) -> CMFieldElement:
        return CMFieldElement(0, 1, self.delta)

    def lift(self, x) -> CMFieldElement:
        if isinstance(x, CMFieldElement):
            if x.delta != self.delta:
                raise ValueError("element belongs to another field")
            return x
        return CMFieldElement(x, 0, self.delta)

    @property
    def half_integral(self) -> bool:
        """Whether the ring of integers is Z[(1+sqrt(delta))/2]."""
        return self.delta % 4 == 1

    def is_integral(self, x: CMFieldElement) -> bool:
        if self.half_integral:
            u, v = 2 * x.a, 2 * x.b
            return (u.denominator == 1 and v.denominator == 1
                    and (u.numerator - v.numerator) % 2 == 0)
        return x.a.denominator == 1 and x.b.denominator == 1

    def from_coords(self, u: int, v: int, scale: int = 1) -> CMFieldElement:
        """The lattice point with integer coordinates ``(u, v)``.

        For delta = 1 mod 4 the element is ``(u + v sqrt(delta)) / (2 scale)``
        and callers keep ``u = v mod 2``; otherwise it is ``(u + v sqrt(delta)) / scale``.
        """
        den = 2 * scale if self.half_integral else scale
        return CMFieldElement._raw(Fraction(u, den), Fraction(v, den), self.delta)

    # -- p-adic embedding -------------------------------------------------

    def canonical_root(self, j: int) -> PadicTruncated:
        r = self._roots.get(j)
        if r is None:
            r = hensel_sqrt(self.delta, self.p, j)
            self._roots[j] = r
        return r

    def iota_p(self, x, j: int) -> PadicTruncated:
        key = (x, j)
        hit = self._iota_cache.get(key)
        if hit is not None:
            return hit
        x = self.lift(x)
        p = self.p
        if not x.is_p_integral(p):
            raise NotPIntegral(f"{x} is not {p}-integral")
        a = PadicTruncated.from_rational(x.a, p, j)
        if x.b:
            a = a + PadicTruncated.from_rational(x.b, p, j) * self.canonical_root(j)
        if len(self._iota_cache) > 200_000:
            self._iota_cache.clear()
        self._iota_cache[key] = a
        return a

    def is_p_unit(self, x) -> bool:
        """Whether ``x`` is a p-adic unit at both places above p."""
        x = self.lift(x)
        if not x.is_p_integral(self.p):
            return False
        return x.norm().numerator % self.p != 0

    # -- units ------------------------------------------------------------

    def unit_group(self) -> UnitGroup:
        return unit_group(self)


def conj(x: CMFieldElement) -> CMFieldElement:
    return x.conj()


def norm_KE(x: CMFieldElement) -> Fraction:
    return x.norm()


def norm_kv(b, w: WeightTuple):
    """``b^(k + 2 nu) * N(b)^(-nu)``, the weight character evaluated exactly in K."""
    if isinstance(b, CMFieldElement):
        if not b:
            raise ZeroArgument("N_{k,nu} is undefined at 0")
        nu = w.nu0
        out = b ** (w.k + 2 * nu)
        if nu:
            out = out * (b.norm() ** (-nu))
        return out
    b = Fraction(b)
    if b == 0:
        raise ZeroArgument("N_{k,nu} is undefined at 0")
    return b ** w.k


def iota_p(field: CMField, x, j: int) -> PadicTruncated:
    return field.iota_p(x, j)


def unit_group(field: CMField) -> UnitGroup:
    """All roots of unity of O_K, listed as powers of a generator of least argument."""
    d = field.delta
    found = []
    if field.half_integral:
        # (u + v sqrt d)/2 with u^2 - d v^2 = 4
        vmax = math.isqrt(4 // (-d))
        for v in range(-vmax, vmax + 1):
            rest = 4 + d * v * v
            if rest < 0:
                continue
            u = math.isqrt(rest)
            if u * u == rest:
                for uu in {u, -u}:
                    found.append(CMFieldElement(Fraction(uu, 2), Fraction(v, 2), d))
    else:
        vmax = math.isqrt(1 // (-d))
        for v in range(-vmax, vmax + 1):
            rest = 1 + d * v * v
            if rest < 0:
                continue
            u = math.isqrt(rest)
            if u * u == rest:
                for uu in {u, -u}:
                    found.append(CMFieldElement(uu, v, d))
    order = len(found)
    gen = min(
        (z for z in found if z != 1 and all(z**k != 1 for k in range(1, order))),
        key=lambda z: math.atan2(float(z.b) * math.sqrt(-d), float(z.a)) % (2 * math.pi),
    )
    return UnitGroup(tuple(gen**k for k in range(order)))
