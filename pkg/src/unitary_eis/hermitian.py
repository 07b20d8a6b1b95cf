"""Hermitian matrices over O_K: positivity, minors, blocks, lattice enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .arith import PadicTruncated
from .cmfield import CMField, CMFieldElement
from .rings import det

__all__ = [
    "HermitianMatrix",
    "BlockSplit",
    "NotHermitian",
    "NotPositive",
    "OddSize",
    "leading_minor",
    "is_positive_definite",
    "enumerate_positive",
    "enumerate_offdiag",
    "block_split",
    "assemble_blocks",
    "swap_permute",
    "project_sigma_p",
    "conj_transpose",
]


class NotHermitian(ValueError):
    pass


class NotPositive(ValueError):
    pass


class OddSize(ValueError):
    pass


def conj_transpose(m: Sequence[Sequence[CMFieldElement]]) -> list[list[CMFieldElement]]:
    rows, cols = len(m), len(m[0]) if m else 0
    return [[m[i][j].conj() for i in range(rows)] for j in range(cols)]


class HermitianMatrix:
    """An immutable n x n Hermitian matrix over K, hashable so it can key a q-expansion."""

    __slots__ = ("entries", "n", "delta", "_hash", "_det")

    def __init__(self, entries: Sequence[Sequence], delta: int = -1, *, check: bool = True):
        rows = tuple(
            tuple(c if isinstance(c, CMFieldElement) else CMFieldElement(c, 0, delta) for c in row)
            for row in entries
        )
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if check:
            for i in range(n):
                if rows[i][i].b != 0:
                    raise NotHermitian(f"diagonal entry {rows[i][i]} is not in E")
                for j in range(i + 1, n):
                    if rows[j][i] != rows[i][j].conj():
                        raise NotHermitian(f"entry ({j},{i}) is not the conjugate of ({i},{j})")
        self.entries = rows
        self.n = n
        self.delta = delta
        self._hash = None
        self._det = None

    @classmethod
    def from_upper(cls, diag: Sequence, upper: Sequence, delta: int) -> "HermitianMatrix":
        """Build from the diagonal and the strict upper triangle (row-major)."""
        n = len(diag)
        rows = [[None] * n for _ in range(n)]
        it = iter(upper)
        for i in range(n):
            rows[i][i] = CMFieldElement(diag[i], 0, delta)
            for j in range(i + 1, n):
                c = next(it)
                rows[i][j] = c
                rows[j][i] = c.conj()
        return cls(rows, delta, check=False)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self) -> list[list[CMFieldElement]]:
        return [list(r) for r in self.entries]

    def trace(self) -> Fraction:
        return sum((self.entries[i][i].a for i in range(self.n)), Fraction(0))

    def det(self) -> Fraction:
        if self._det is None:
            d = det(self.entries) if self.n else CMFieldElement(1, 0, self.delta)
            self._det = d.a
        return self._det

    def diagonal(self) -> tuple[Fraction, ...]:
        return tuple(self.entries[i][i].a for i in range(self.n))

    def upper(self) -> tuple[CMFieldElement, ...]:
        return tuple(self.entries[i][j] for i in range(self.n) for j in range(i + 1, self.n))

    def sort_key(self):
        """Diagonal first, then off-diagonal real/imaginary parts (row-major upper triangle)."""
        return (self.diagonal(), tuple(c.sort_key() for c in self.upper()))

    def qexp_key(self):
        return (self.trace(),) + self.sort_key()

    def scale(self, s) -> "HermitianMatrix":
        """Multiply by a rational scalar."""
        s = Fraction(s)
        return HermitianMatrix([[c * s for c in row] for row in self.entries], self.delta, check=False)

    def __eq__(self, other):
        return isinstance(other, HermitianMatrix) and self.entries == other.entries

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def __repr__(self):
        return "H" + repr([list(r) for r in self.entries])

    def to_json(self) -> list:
        return [[c.to_json() for c in row] for row in self.entries]

    @classmethod
    def from_json(cls, obj, delta: int) -> "HermitianMatrix":
        return cls([[CMFieldElement.from_json(c, delta) for c in row] for row in obj], delta)


@dataclass(frozen=True)
class BlockSplit:
    m: int
    A11: HermitianMatrix
    A22: HermitianMatrix
    A21: tuple[tuple[CMFieldElement, ...], ...]

    def assemble(self) -> HermitianMatrix:
        return assemble_blocks(self.A11, self.A22, self.A21)


def leading_minor(beta: HermitianMatrix, j: int) -> Fraction:
    if not 1 <= j <= beta.n:
        raise IndexError(f"minor index {j} out of range 1..{beta.n}")
    return det([row[:j] for row in beta.entries[:j]]).a


def is_positive_definite(beta: HermitianMatrix) -> bool:
    return all(leading_minor(beta, j) > 0 for j in range(1, beta.n + 1))


def block_split(beta: HermitianMatrix, m: int | None = None) -> BlockSplit:
    n = beta.n
    if m is None:
        m = n // 2
    if n != 2 * m:
        raise OddSize(f"cannot split a {n}x{n} matrix into {m}x{m} blocks")
    e = beta.entries
    A11 = HermitianMatrix([row[:m] for row in e[:m]], beta.delta, check=False)
    A22 = HermitianMatrix([row[m:] for row in e[m:]], beta.delta, check=False)
    A21 = tuple(tuple(row[:m]) for row in e[m:])
    return BlockSplit(m, A11, A22, A21)


def assemble_blocks(A11: HermitianMatrix, A22: HermitianMatrix, A21) -> HermitianMatrix:
    """``[[A11, A21^*], [A21, A22]]``."""
    m = A11.n
    A12 = conj_transpose(A21)
    rows = [list(A11.entries[i]) + list(A12[i]) for i in range(m)]
    rows += [list(A21[i]) + list(A22.entries[i]) for i in range(m)]
    return HermitianMatrix(rows, A11.delta, check=False)


def swap_permute(beta: HermitianMatrix) -> HermitianMatrix:
    """``P beta P^t`` for the permutation exchanging the two diagonal blocks."""
    s = block_split(beta)
    return assemble_blocks(s.A22, s.A11, conj_transpose(s.A21))


def _offdiag_candidates(field: CMField, bound: int, scale: int) -> list[CMFieldElement]:
    """Lattice points c in (1/scale) O_K with N(c) * den^2 < bound (den the coordinate denominator).

    ``bound`` is already expressed in the scaled coordinates.
    """
    d = -field.delta
    umax = math.isqrt(max(bound - 1, 0))
    vmax = math.isqrt(max(bound - 1, 0) // d)
    out = []
    for u in range(-umax, umax + 1):
        for v in range(-vmax, vmax + 1):
            if field.half_integral and (u - v) % 2:
                continue
            if u * u + d * v * v < bound:
                out.append(field.from_coords(u, v, scale))
    out.sort(key=CMFieldElement.sort_key)
    return out


def _coord_factor(field: CMField) -> int:
    return 4 if field.half_integral else 1


def enumerate_positive(n: int, B, field: CMField, scale: int = 1) -> list[HermitianMatrix]:
    """All positive definite lattice matrices of trace at most ``B``.

    Entries lie in ``(1/scale) O_K`` with diagonal in ``(1/scale) Z``.  Output is
    sorted by :meth:`HermitianMatrix.sort_key`.
    """
    if B < 1:
        raise ValueError("trace bound must be >= 1")
    total = math.floor(Fraction(B) * scale)
    cf = _coord_factor(field)
    out = []
    cand_cache: dict[int, list[CMFieldElement]] = {}

    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for diag in sorted(set(compositions_upto(n, total))):
        choices = []
        for i, j in pairs:
            bound = cf * diag[i] * diag[j]
            if bound not in cand_cache:
                cand_cache[bound] = _offdiag_candidates(field, bound, scale)
            choices.append(cand_cache[bound])
        dvals = [Fraction(d, scale) for d in diag]
        for upper in product(*choices):
            beta = HermitianMatrix.from_upper(dvals, upper, field.delta)
            if n <= 2 or is_positive_definite(beta):
                out.append(beta)
    out.sort(key=HermitianMatrix.sort_key)
    return out


def compositions_upto(n: int, total: int) -> Iterable[tuple[int, ...]]:
    """Tuples of ``n`` positive integers with sum at most ``total``."""
    if n == 0:
        yield ()
        return
    for first in range(1, total - (n - 1) + 1):
        for rest in compositions_upto(n - 1, total - first):
            yield (first,) + rest


def enumerate_offdiag(A11: HermitianMatrix, A22: HermitianMatrix, field: CMField,
                      scale: int = 1) -> list[tuple[tuple[CMFieldElement, ...], ...]]:
    """All lower-left blocks A21 making ``[[A11, A21^*], [A21, A22]]`` positive definite."""
    if not is_positive_definite(A11) or not is_positive_definite(A22):
        raise NotPositive("diagonal blocks must be positive definite")
    m = A11.n
    cf = _coord_factor(field)
    choices = []
    for i in range(m):
        for j in range(m):
            # 2x2 principal minor on rows (j, m+i) forces N(A21[i][j]) < A22[i][i] * A11[j][j]
            prod_diag = A22.entries[i][i].a * A11.entries[j][j].a * scale * scale
            bound = math.ceil(prod_diag * cf)
            cands = [c for c in _offdiag_candidates(field, bound, scale)
                     if c.norm() < prod_diag / (scale * scale)]
            choices.append(cands)
    out = []
    for flat in product(*choices):
        A21 = tuple(tuple(flat[i * m:(i + 1) * m]) for i in range(m))
        if m == 1 or is_positive_definite(assemble_blocks(A11, A22, A21)):
            out.append(A21)
    return out


def project_sigma_p(beta, field: CMField, j: int) -> list[list[PadicTruncated]]:
    """Entrywise image under the fixed p-adic embedding."""
    rows = beta.entries if isinstance(beta, HermitianMatrix) else beta
    return [[field.iota_p(c, j) for c in row] for row in rows]
