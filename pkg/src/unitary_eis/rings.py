"""Coefficient rings: exact evaluation in K, or p-adic evaluation mod p^j.

Functions on ``(O_K (x) Z_p) x M_n(Z_p)`` are written once against a ring
object.  Two kinds of element circulate:

* *values* (coefficients, matrix entries, determinants): a
  :class:`CMFieldElement` in exact mode, a :class:`PadicTruncated` in
  p-adic mode (the image under the fixed embedding).
* *points* of ``O_K (x) Z_p``: a :class:`CMFieldElement` in exact mode,
  a :class:`SplitPair` ``(iota_p(x), iota_p(conj x))`` in p-adic mode.

An exact K-matrix ``y`` stands for its entrywise embedding, so both modes
agree after applying ``iota_p``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Sequence

from .arith import PadicTruncated
from .cmfield import CMField, CMFieldElement, WeightTuple, norm_kv

__all__ = [
    "SplitPair",
    "ExactRing",
    "PadicRing",
    "det",
    "leading_minor",
    "mat_inverse",
    "mat_mul",
    "ring_from_descriptor",
    "all_residue_matrices",
]


class SplitPair:
    """An element of ``O_K (x) Z_p = Z_p x Z_p`` (Sigma_p place first)."""

    __slots__ = ("first", "second")

    def __init__(self, first: PadicTruncated, second: PadicTruncated):
        self.first = first
        self.second = second

    def __mul__(self, other):
        if isinstance(other, SplitPair):
            return SplitPair(self.first * other.first, self.second * other.second)
        return SplitPair(self.first * other, self.second * other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return SplitPair(self.first**e, self.second**e)

    def inverse(self):
        return SplitPair(self.first**-1, self.second**-1)

    def conj(self):
        return SplitPair(self.second, self.first)

    def is_unit(self) -> bool:
        return self.first.is_unit() and self.second.is_unit()

    def __eq__(self, other):
        return (isinstance(other, SplitPair) and self.first == other.first
                and self.second == other.second)

    def __hash__(self):
        return hash((self.first, self.second))

    def __repr__(self):
        return f"SplitPair({self.first!r}, {self.second!r})"


# -- generic matrix helpers (any commutative ring of values) ----------------

def det(m: Sequence[Sequence]):
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for c in range(n):
        entry = m[0][c]
        if not entry:
            continue
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        term = entry * det(minor)
        if c % 2:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return m[0][0] * 0
    return total


def leading_minor(m, j: int):
    return det([list(row[:j]) for row in m[:j]])


def mat_mul(a, b):
    n, k, l = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for c in range(l):
            s = a[i][0] * b[0][c]
            for t in range(1, k):
                s = s + a[i][t] * b[t][c]
            row.append(s)
        out.append(row)
    return out


def mat_inverse(m):
    """Adjugate inverse; the determinant must be invertible in the value ring."""
    n = len(m)
    d = det(m)
    dinv = d**-1
    if n == 1:
        return [[dinv]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for c in range(n):
            minor = [row[:c] + row[c + 1:] for k, row in enumerate(m) if k != i]
            cof = det(minor)
            if (i + c) % 2:
                cof = -cof
            out[c][i] = cof * dinv
    return out


class ExactRing:
    """Values in K; points of ``O_K (x) Z_p`` are elements of K itself."""

    mode = "exact"

    def __init__(self, field: CMField):
        self.field = field
        self.zero = field.zero
        self.one = field.one

    def __eq__(self, other):
        return isinstance(other, ExactRing) and other.field == self.field

    def __hash__(self):
        return hash(("exact", self.field))

    def __repr__(self):
        return f"ExactRing(delta={self.field.delta}, p={self.field.p})"

    def descriptor(self):
        return "exact"

    def embed(self, c) -> CMFieldElement:
        return self.field.lift(c)

    def point(self, a) -> CMFieldElement:
        return self.field.lift(a)

    def matrix(self, rows) -> list[list[CMFieldElement]]:
        lift = self.field.lift
        return [[lift(c) for c in row] for row in rows]

    def diag(self, s):
        return s

    def sigma(self, x):
        return x

    def norm(self, x):
        return self.field.lift(x.norm())

    def act(self, e: CMFieldElement, x):
        return e * x

    def kv(self, b, w: WeightTuple):
        return _norm_kv_cached(b, w)

    def is_unit(self, v) -> bool:
        return self.field.is_p_unit(v) if v.b else _rational_unit(v.a, self.field.p)

    def is_invertible(self, y) -> bool:
        p = self.field.p
        if not all(c.is_p_integral(p) for row in y for c in row):
            return False
        return self.is_unit(det(y))

    def value_residue(self, v, r: int) -> int:
        return self.field.iota_p(v, r).residue

    def x_residues(self, x, r: int) -> tuple[int, int]:
        f = self.field
        return (f.iota_p(x, r).residue, f.iota_p(x.conj(), r).residue)

    def y_residues(self, y, r: int) -> tuple[int, ...]:
        f = self.field
        return tuple(f.iota_p(c, r).residue for row in y for c in row)

    def coerce_value(self, v):
        return self.field.lift(v)


_norm_kv_cached = lru_cache(maxsize=1 << 16)(norm_kv)


def _rational_unit(q, p: int) -> bool:
    return q != 0 and q.numerator % p != 0 and q.denominator % p != 0


class PadicRing:
    """Values in ``Z/p^j`` via the fixed embedding; points are :class:`SplitPair`."""

    mode = "padic"

    def __init__(self, field: CMField, j: int):
        if j < 1:
            raise ValueError("precision must be >= 1")
        self.field = field
        self.j = j
        self.p = field.p
        self.zero = PadicTruncated(0, field.p, j)
        self.one = PadicTruncated(1, field.p, j)

    def __eq__(self, other):
        return isinstance(other, PadicRing) and other.field == self.field and other.j == self.j

    def __hash__(self):
        return hash(("padic", self.field, self.j))

    def __repr__(self):
        return f"PadicRing(delta={self.field.delta}, p={self.p}, j={self.j})"

    def descriptor(self):
        return {"padic": {"p": self.p, "j": self.j}}

    def embed(self, c) -> PadicTruncated:
        if isinstance(c, PadicTruncated):
            return c.truncate(self.j) if c.j > self.j else c
        return self.field.iota_p(c, self.j)

    def point(self, a) -> SplitPair:
        if isinstance(a, SplitPair):
            return a
        if isinstance(a, tuple):
            return SplitPair(self._as_padic(a[0]), self._as_padic(a[1]))
        a = self.field.lift(a)
        return SplitPair(self.field.iota_p(a, self.j), self.field.iota_p(a.conj(), self.j))

    def _as_padic(self, v):
        if isinstance(v, PadicTruncated):
            return v
        return PadicTruncated(v, self.p, self.j) if isinstance(v, int) else self.embed(v)

    def matrix(self, rows) -> list[list[PadicTruncated]]:
        return [[self._as_padic(c) for c in row] for row in rows]

    def diag(self, s: PadicTruncated) -> SplitPair:
        return SplitPair(s, s)

    def sigma(self, x: SplitPair):
        return x.first

    def norm(self, x: SplitPair):
        return x.first * x.second

    def act(self, e: CMFieldElement, x: SplitPair):
        f = self.field
        return SplitPair(f.iota_p(e, self.j) * x.first, f.iota_p(e.conj(), self.j) * x.second)

    def kv(self, b: SplitPair, w: WeightTuple):
        nu = w.nu0
        out = b.first ** (w.k + nu)
        if nu:
            out = out * b.second ** (-nu)
        return out

    def is_unit(self, v: PadicTruncated) -> bool:
        return v.is_unit()

    def is_invertible(self, y) -> bool:
        return det(y).is_unit()

    def value_residue(self, v, r: int) -> int:
        if r > v.j:
            raise ValueError(f"level {r} exceeds precision {v.j}")
        return v.residue % self.p**r

    def x_residues(self, x: SplitPair, r: int) -> tuple[int, int]:
        m = self.p**r
        if r > min(x.first.j, x.second.j):
            raise ValueError(f"level {r} exceeds precision")
        return (x.first.residue % m, x.second.residue % m)

    def y_residues(self, y, r: int) -> tuple[int, ...]:
        m = self.p**r
        return tuple(c.residue % m for row in y for c in row)

    def coerce_value(self, v):
        return self.embed(v)


def ring_from_descriptor(field: CMField, desc):
    if desc == "exact":
        return ExactRing(field)
    if isinstance(desc, dict) and "padic" in desc:
        spec = desc["padic"]
        if int(spec["p"]) != field.p:
            raise ValueError(f"mode prime {spec['p']} does not match field prime {field.p}")
        return PadicRing(field, int(spec["j"]))
    raise ValueError(f"unknown mode {desc!r}")


def all_residue_matrices(p: int, r: int, n: int):
    """Every n x n matrix over Z/p^r as a flat row-major tuple."""
    return product(range(p**r), repeat=n * n)

