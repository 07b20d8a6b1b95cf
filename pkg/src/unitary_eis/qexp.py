"""Truncated q-expansions on U(n,n) and their pullbacks to the block-diagonal subgroup."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Mapping

from .arith import PadicTruncated
from .cmfield import CMField, CMFieldElement
from .hermitian import (
    HermitianMatrix,
    OddSize,
    block_split,
    conj_transpose,
    swap_permute,
)
from .reps import HighestWeight, phi_kappa_eval
from .rings import ExactRing, PadicRing, ring_from_descriptor

__all__ = [
    "QExpansion",
    "PulledBackQExpansion",
    "MalformedInput",
    "reduce_mod",
    "theta_pullback",
    "pullback_weighted",
    "swap_blocks",
    "permute_blocks",
    "serialize",
    "deserialize",
]


class MalformedInput(ValueError):
    pass


def _clean(coeffs: Mapping) -> dict:
    return {k: v for k, v in coeffs.items() if v}


@dataclass(eq=False)
class QExpansion:
    """``sum c(beta) q^beta`` over positive lattice matrices of trace <= bound.

    Absent keys are zero coefficients.
    """

    n: int
    bound: Fraction
    ring: ExactRing | PadicRing
    coeffs: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.bound = Fraction(self.bound)
        self.coeffs = _clean(self.coeffs)

    @property
    def field(self) -> CMField:
        return self.ring.field

    def __getitem__(self, beta: HermitianMatrix):
        return self.coeffs.get(beta, self.ring.zero)

    def keys(self) -> list[HermitianMatrix]:
        return sorted(self.coeffs, key=HermitianMatrix.qexp_key)

    def items(self):
        return [(k, self.coeffs[k]) for k in self.keys()]

    def _compatible(self, other: "QExpansion"):
        if self.n != other.n or self.ring != other.ring:
            raise ValueError("q-expansions live in different spaces")

    def __add__(self, other: "QExpansion") -> "QExpansion":
        self._compatible(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return QExpansion(self.n, min(self.bound, other.bound), self.ring, out)

    def __neg__(self):
        return QExpansion(self.n, self.bound, self.ring, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "QExpansion":
        c = self.ring.embed(c)
        return QExpansion(self.n, self.bound, self.ring, {k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return (self.n == other.n and self.ring == other.ring and self.bound == other.bound
                and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"QExpansion(n={self.n}, bound={self.bound}, {self.ring!r}, {len(self.coeffs)} terms)"


def _pair_key(pair):
    A11, A22 = pair
    return (A11.trace() + A22.trace(), A11.sort_key(), A22.sort_key())


@dataclass(eq=False)
class PulledBackQExpansion:
    """``sum c'(A11, A22) q11^A11 q22^A22`` with tr A11 + tr A22 <= bound."""

    m: int
    bound: Fraction
    ring: ExactRing | PadicRing
    coeffs: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.bound = Fraction(self.bound)
        self.coeffs = _clean(self.coeffs)

    @property
    def field(self) -> CMField:
        return self.ring.field

    def __getitem__(self, pair):
        return self.coeffs.get(tuple(pair), self.ring.zero)

    def keys(self):
        return sorted(self.coeffs, key=_pair_key)

    def items(self):
        return [(k, self.coeffs[k]) for k in self.keys()]

    def __add__(self, other: "PulledBackQExpansion") -> "PulledBackQExpansion":
        if self.m != other.m or self.ring != other.ring:
            raise ValueError("pulled-back expansions live in different spaces")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return PulledBackQExpansion(self.m, min(self.bound, other.bound), self.ring, out)

    def __neg__(self):
        return PulledBackQExpansion(self.m, self.bound, self.ring, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PulledBackQExpansion":
        c = self.ring.embed(c)
        return PulledBackQExpansion(self.m, self.bound, self.ring,
                                    {k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, PulledBackQExpansion):
            return NotImplemented
        return (self.m == other.m and self.ring == other.ring and self.bound == other.bound
                and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"PulledBackQExpansion(m={self.m}, bound={self.bound}, {self.ring!r}, {len(self.coeffs)} terms)"


def reduce_mod(f, j: int):
    """Coefficientwise image in ``Z/p^j``."""
    ring = f.ring
    if isinstance(ring, PadicRing) and ring.j < j:
        raise ValueError(f"cannot reduce precision {ring.j} to {j}")
    target = PadicRing(ring.field, j)
    coeffs = {k: target.embed(v) for k, v in f.coeffs.items()}
    if isinstance(f, QExpansion):
        return QExpansion(f.n, f.bound, target, coeffs)
    return PulledBackQExpansion(f.m, f.bound, target, coeffs)


def pullback_weighted(f: QExpansion, weight: Callable) -> PulledBackQExpansion:
    """Regroup ``f`` by diagonal blocks, weighting ``c(beta)`` by ``weight(A21)``.

    ``weight`` receives the exact lower-left block and returns an element of K
    (or an integer); p-adic expansions map it through the fixed embedding.
    """
    if f.n % 2:
        raise OddSize(f"pullback needs even n, got {f.n}")
    m = f.n // 2
    ring = f.ring
    out: dict = {}
    for beta, c in f.coeffs.items():
        s = block_split(beta, m)
        w = weight(s.A21)
        if not w:
            continue
        key = (s.A11, s.A22)
        term = ring.embed(w) * c
        out[key] = out[key] + term if key in out else term
    return PulledBackQExpansion(m, f.bound, ring, out)


def theta_pullback(f: QExpansion, lam: HighestWeight | None = None) -> PulledBackQExpansion:
    """q-expansion of the differential operator attached to ``lam``, followed by pullback.

    ``c'(A11, A22) = sum_{A21} phi_lam(A21) c([[A11, A21^*], [A21, A22]])``; the
    trivial weight gives the plain pullback.
    """
    one = f.field.one
    if lam is None or lam.is_trivial():
        return pullback_weighted(f, lambda A21: one)
    return pullback_weighted(f, lambda A21: phi_kappa_eval(lam, A21, one))


def swap_blocks(g: PulledBackQExpansion) -> PulledBackQExpansion:
    return PulledBackQExpansion(g.m, g.bound, g.ring,
                                {(A22, A11): c for (A11, A22), c in g.coeffs.items()})


def permute_blocks(f: QExpansion) -> QExpansion:
    """The expansion ``beta -> c(P beta P^t)`` for the block-swap permutation P."""
    if f.n % 2:
        raise OddSize(f"block permutation needs even n, got {f.n}")
    return QExpansion(f.n, f.bound, f.ring, {swap_permute(b): c for b, c in f.coeffs.items()})


# -- serialization ------------------------------------------------------------

def _value_to_json(v):
    return v.to_json()


def _value_from_json(obj, ring):
    if isinstance(ring, PadicRing):
        v = PadicTruncated.from_json(obj)
        if v.p != ring.p or v.j != ring.j:
            raise MalformedInput(f"coefficient {obj} does not match mode {ring.descriptor()}")
        return v
    return CMFieldElement.from_json(obj, ring.field.delta)


def _bound_json(b: Fraction):
    return b.numerator if b.denominator == 1 else f"{b.numerator}/{b.denominator}"


def to_document(f) -> dict:
    base = {
        "field": {"delta": f.field.delta, "p": f.field.p},
        "bound": _bound_json(f.bound),
        "mode": f.ring.descriptor(),
    }
    if isinstance(f, QExpansion):
        base["n"] = f.n
        base["terms"] = [{"beta": k.to_json(), "c": _value_to_json(v)} for k, v in f.items()]
    else:
        base["m"] = f.m
        base["terms"] = [
            {"A11": A11.to_json(), "A22": A22.to_json(), "c": _value_to_json(v)}
            for (A11, A22), v in f.items()
        ]
    return base


def serialize(f) -> bytes:
    return json.dumps(to_document(f), sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize(data: bytes | str):
    try:
        doc = json.loads(data)
        fld = CMField(int(doc["field"]["delta"]), int(doc["field"]["p"]))
        ring = ring_from_descriptor(fld, doc["mode"])
        bound = Fraction(doc["bound"])
        d = fld.delta
        if "n" in doc:
            coeffs = {}
            for t in doc["terms"]:
                beta = HermitianMatrix.from_json(t["beta"], d)
                if beta.n != int(doc["n"]):
                    raise MalformedInput(f"term of size {beta.n} in an n={doc['n']} expansion")
                coeffs[beta] = _value_from_json(t["c"], ring)
            return QExpansion(int(doc["n"]), bound, ring, coeffs)
        if "m" in doc:
            coeffs = {}
            for t in doc["terms"]:
                key = (HermitianMatrix.from_json(t["A11"], d), HermitianMatrix.from_json(t["A22"], d))
                coeffs[key] = _value_from_json(t["c"], ring)
            return PulledBackQExpansion(int(doc["m"]), bound, ring, coeffs)
        raise MalformedInput("document has neither 'n' nor 'm'")
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
        raise MalformedInput(str(exc)) from exc


def conj_transpose_weight(lam: HighestWeight | None):
    """Weight ``A21 -> phi_lam(A21^*)`` used by the block-swap relation."""
    def weight(A21):
        one = A21[0][0] * 0 + 1
        return phi_kappa_eval(lam, conj_transpose(A21), one)
    return weight


__all__.append("conj_transpose_weight")
__all__.append("to_document")
