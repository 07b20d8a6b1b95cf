"""Equivariant input functions, Eisenstein q-expansions, the Eisenstein measure and identity checks.

Functions live on ``(O_K (x) Z_p) x M_n(Z_p)``.  An :class:`EquivariantFunction`
is evaluated against a ring from :mod:`unitary_eis.rings`, so one definition
serves both the exact oracle and the p-adic computation.  Locally constant
functions carry an exact residue table; their values are elements of K that
the p-adic ring maps through the fixed embedding.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Sequence

from .arith import PadicTruncated
from .cmfield import CMField, CMFieldElement, WeightTuple, norm_kv
from .hermitian import (
    HermitianMatrix,
    assemble_blocks,
    conj_transpose,
    enumerate_offdiag,
    enumerate_positive,
)
from .qexp import (
    PulledBackQExpansion,
    QExpansion,
    conj_transpose_weight,
    swap_blocks,
    theta_pullback,
)
from .reps import HighestWeight, HomogPolynomial, phi_kappa_eval
from .rings import ExactRing, PadicRing, SplitPair, det, mat_inverse

__all__ = [
    "EquivariantFunction",
    "CuspDatum",
    "MeasureDomain",
    "IdentityReport",
    "WeightTooSmall",
    "NotInvertible",
    "make_ring",
    "locally_constant",
    "constant_function",
    "character_polynomial",
    "random_locally_constant",
    "perturb",
    "symmetrize",
    "validate_equivariance",
    "hf_transform",
    "weight_shift_function",
    "standard_cusp",
    "unit_cusp",
    "explicit_cusp",
    "eisenstein_qexp",
    "integrate_measure",
    "theta_integrand",
    "verify_identity",
    "function_from_spec",
    "cusp_from_spec",
]


class WeightTooSmall(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


def make_ring(field: CMField, precision: int | None):
    """Exact ring when ``precision`` is None, otherwise ``Z/p^precision``."""
    return ExactRing(field) if precision is None else PadicRing(field, precision)


# -- functions ---------------------------------------------------------------

ResidueKey = tuple  # ((x1, x2), flat y residues)


class EquivariantFunction:
    """A function of ``(x, y)`` with an F-side or H-side equivariance contract.

    ``evaluator(ring, x, y)`` returns a ring value.  Locally constant functions
    additionally expose ``residue_value(xres, yres)``, an exact value that
    depends only on residues mod ``p^level``.
    """

    def __init__(self, field: CMField, n: int, evaluator: Callable, *, side: str = "F",
                 weight: WeightTuple | None = None, level: int | None = None,
                 residue_value: Callable | None = None, name: str = ""):
        if side not in ("F", "H"):
            raise ValueError(f"side must be 'F' or 'H', got {side!r}")
        self.field = field
        self.n = n
        self.side = side
        self.weight = weight if weight is not None else WeightTuple(n, 0)
        self.level = level
        self.residue_value = residue_value
        self.name = name
        self._evaluator = evaluator

    @property
    def locally_constant(self) -> bool:
        return self.residue_value is not None

    def evaluate(self, ring, x, y):
        return self._evaluator(ring, x, y)

    def __call__(self, x, y, ring=None):
        """Evaluate with the ring inferred from ``x`` when not given.

        A K element means exact mode; a pair of p-adic values means p-adic mode
        at the smaller precision.
        """
        if ring is None:
            if isinstance(x, (SplitPair, tuple)):
                first, second = (x.first, x.second) if isinstance(x, SplitPair) else x
                j = min(v.j for v in (first, second) if isinstance(v, PadicTruncated))
                ring = PadicRing(self.field, j)
            else:
                ring = ExactRing(self.field)
        return self.evaluate(ring, ring.point(x), ring.matrix(y))

    def _with(self, evaluator, residue_value, level, name):
        return EquivariantFunction(self.field, self.n, evaluator, side=self.side, weight=self.weight,
                                   level=level, residue_value=residue_value, name=name)

    def __add__(self, other: "EquivariantFunction") -> "EquivariantFunction":
        f, g = self, other
        name = f"({f.name}+{g.name})"
        if f.locally_constant and g.locally_constant:
            level = max(f.level, g.level)
            p = f.field.p

            def rv(xres, yres):
                return (f.residue_value(*_reduce_residues(xres, yres, p, level, f.level))
                        + g.residue_value(*_reduce_residues(xres, yres, p, level, g.level)))
            return self._with(_table_evaluator(f.field, level, rv), rv, level, name)

        def ev(ring, x, y):
            return f.evaluate(ring, x, y) + g.evaluate(ring, x, y)
        return self._with(ev, None, None, name)

    def scale(self, c) -> "EquivariantFunction":
        f = self
        c = f.field.lift(c) if not isinstance(c, PadicTruncated) else c
        name = f"{c}*{f.name}"
        if f.locally_constant and not isinstance(c, PadicTruncated):
            def rv(xres, yres):
                return c * f.residue_value(xres, yres)
            return self._with(_table_evaluator(f.field, f.level, rv), rv, f.level, name)

        def ev(ring, x, y):
            v = f.evaluate(ring, x, y)
            return ring.embed(c) * v if v else v
        return self._with(ev, None, None, name)

    __rmul__ = scale

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        kind = f"level {self.level}" if self.locally_constant else "continuous"
        return f"EquivariantFunction({self.name or '?'}, side={self.side}, n={self.n}, {kind})"


def _reduce_residues(xres, yres, p: int, from_level: int, to_level: int):
    if from_level == to_level:
        return xres, yres
    m = p**to_level
    return (xres[0] % m, xres[1] % m), tuple(c % m for c in yres)


def _det_mod(flat: Sequence[int], n: int, m: int) -> int:
    rows = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
    return det(rows) % m if n else 1


def _table_evaluator(field: CMField, level: int, residue_value: Callable):
    p = field.p

    def ev(ring, x, y):
        xres = ring.x_residues(x, level)
        if xres[0] % p == 0 or xres[1] % p == 0:
            return ring.zero
        yres = ring.y_residues(y, level)
        v = residue_value(xres, yres)
        return ring.embed(v) if v else ring.zero

    return ev


def locally_constant(field: CMField, n: int, level: int, table, *, side: str = "F",
                     weight: WeightTuple | None = None, y_support: str = "invertible",
                     name: str = "table") -> EquivariantFunction:
    """Function given by residues mod ``p^level``; it vanishes off x-units.

    ``table`` is a mapping ``((x1, x2), flat y) -> value`` (missing keys are 0)
    or a callable with the same arguments.  With ``y_support="invertible"`` the
    function is zero whenever ``det y`` is divisible by p.
    """
    if y_support not in ("invertible", "all"):
        raise ValueError("y_support must be 'invertible' or 'all'")
    lookup = table if callable(table) else (lambda xr, yr: table.get((xr, yr), 0))
    p = field.p
    zero = field.zero

    @lru_cache(maxsize=None)
    def rv(xres, yres):
        if y_support == "invertible" and _det_mod(yres, n, p) == 0:
            return zero
        return field.lift(lookup(xres, yres))

    return EquivariantFunction(field, n, _table_evaluator(field, level, rv), side=side, weight=weight,
                               level=level, residue_value=rv, name=name)


def constant_function(field: CMField, n: int, value=1, *, side: str = "H",
                      weight: WeightTuple | None = None, y_support: str = "invertible",
                      level: int = 1) -> EquivariantFunction:
    return locally_constant(field, n, level, lambda xr, yr: value, side=side, weight=weight,
                            y_support=y_support, name=f"const({value})")


def character_polynomial(field: CMField, n: int, w: WeightTuple, poly: HomogPolynomial | None = None,
                         *, y_support: str = "invertible") -> EquivariantFunction:
    """``F(x, y) = N_{k,nu}(x) * P(y)``: continuous and (k, nu)-equivariant."""
    if poly is None:
        poly = HomogPolynomial.constant(n, n)
    if poly.shape != (n, n):
        raise ValueError(f"polynomial shape {poly.shape} does not match n={n}")

    def ev(ring, x, y):
        if not (ring.is_unit(ring.sigma(x)) and ring.is_unit(ring.sigma(_conj_point(x)))):
            return ring.zero
        if y_support == "invertible" and not ring.is_invertible(y):
            return ring.zero
        return ring.kv(x, w) * ring.embed(poly.evaluate(y)) if poly.terms else ring.zero

    return EquivariantFunction(field, n, ev, side="F", weight=w, name="character_polynomial")


def _conj_point(x):
    return x.conj()


def random_locally_constant(field: CMField, n: int, level: int, rng: random.Random, *,
                            lo: int = -9, hi: int = 9, side: str = "F",
                            weight: WeightTuple | None = None) -> EquivariantFunction:
    """Random integer table on unit x and invertible y residues mod ``p^level``."""
    p = field.p
    m = p**level
    units = [u for u in range(m) if u % p]
    table = {}
    for x1 in units:
        for x2 in units:
            for flat in product(range(m), repeat=n * n):
                if _det_mod(flat, n, p):
                    table[((x1, x2), flat)] = rng.randint(lo, hi)
    return locally_constant(field, n, level, table, side=side, weight=weight, name="random")


def perturb(F: EquivariantFunction, xres: tuple[int, int], yres: Sequence[int], amount=1) -> EquivariantFunction:
    """Add ``amount`` on a single residue class (this breaks equivariance on purpose)."""
    if not F.locally_constant:
        raise ValueError("perturbation needs a locally constant function")
    xres, yres = tuple(xres), tuple(yres)
    bump = F.field.lift(amount)

    def rv(xr, yr):
        v = F.residue_value(xr, yr)
        return v + bump if (xr, yr) == (xres, yres) else v

    return F._with(_table_evaluator(F.field, F.level, rv), rv, F.level, f"perturbed({F.name})")


def _unit_action_residues(field: CMField, e: CMFieldElement, xres, level: int):
    m = field.p**level
    return ((field.iota_p(e, level).residue * xres[0]) % m,
            (field.iota_p(e.conj(), level).residue * xres[1]) % m)


def symmetrize(F0: EquivariantFunction, w: WeightTuple, side: str = "F") -> EquivariantFunction:
    """Average ``F0`` over the unit group so that the result is equivariant.

    F-side: ``sum_e N_{k,nu}(e)^-1 F0(e x, N(e)^-1 y)``; H-side: ``sum_e F0(e x, N(e) y)``.
    Units have norm one, so ``y`` is unchanged.
    """
    field = F0.field
    units = list(field.unit_group())
    factors = [norm_kv(e, w) ** -1 if side == "F" else field.one for e in units]

    if F0.locally_constant:
        level = F0.level

        @lru_cache(maxsize=None)
        def rv(xres, yres):
            total = field.zero
            for e, c in zip(units, factors):
                v = F0.residue_value(_unit_action_residues(field, e, xres, level), yres)
                if v:
                    total = total + c * v
            return total

        ev = _table_evaluator(field, level, rv)
    else:
        rv, level = None, None

        def ev(ring, x, y):
            total = ring.zero
            for e, c in zip(units, factors):
                v = F0.evaluate(ring, ring.act(e, x), y)
                if v:
                    total = total + ring.embed(c) * v
            return total

    return EquivariantFunction(field, F0.n, ev, side=side, weight=w if side == "F" else None,
                               level=level, residue_value=rv, name=f"sym({F0.name})")


def _sample_points(F: EquivariantFunction, ring: PadicRing, samples: int, rng: random.Random):
    p, n = ring.p, F.n
    level = F.level if F.locally_constant else ring.j
    m = p**min(level, ring.j)
    pts = []
    for _ in range(samples):
        x = (rng.randrange(1, m) if m > 1 else 1, rng.randrange(1, m) if m > 1 else 1)
        while x[0] % p == 0:
            x = (rng.randrange(1, m), x[1])
        while x[1] % p == 0:
            x = (x[0], rng.randrange(1, m))
        y = [[rng.randrange(m) for _ in range(n)] for _ in range(n)]
        pts.append((SplitPair(PadicTruncated(x[0], p, ring.j), PadicTruncated(x[1], p, ring.j)),
                    ring.matrix(y)))
    return pts


_EXHAUSTIVE_LIMIT = 200_000


def _validate_residues(F: EquivariantFunction, w: WeightTuple) -> bool:
    """Every residue class mod ``p^level``, compared exactly in K."""
    field, level = F.field, F.level
    m = field.p**level
    units = [u for u in range(m) if u % field.p]
    group = [(e, field.one if F.side == "H" else norm_kv(e, w)) for e in field.unit_group()]
    for flat in product(range(m), repeat=F.n * F.n):
        for xres in product(units, repeat=2):
            base = F.residue_value(xres, flat)
            for e, factor in group:
                if F.residue_value(_unit_action_residues(field, e, xres, level), flat) != factor * base:
                    return False
    return True


def validate_equivariance(F: EquivariantFunction, w: WeightTuple | None = None, *,
                          samples: int = 50, precision: int | None = None, seed: int = 0) -> bool:
    """Check the unit-equivariance contract over the whole unit group at sampled points.

    F-side: ``F(e x, N(e)^-1 y) = N_{k,nu}(e) F(x, y)``; H-side: ``H(e x, N(e) y) = H(x, y)``.
    """
    w = w or F.weight
    if F.locally_constant and (F.field.p**F.level) ** (F.n * F.n + 2) <= _EXHAUSTIVE_LIMIT:
        return _validate_residues(F, w)
    j = precision or max(F.level or 1, 3)
    ring = PadicRing(F.field, j)
    rng = random.Random(seed)
    units = list(F.field.unit_group())
    for x, y in _sample_points(F, ring, samples, rng):
        base = F.evaluate(ring, x, y)
        for e in units:
            lhs = F.evaluate(ring, ring.act(e, x), y)
            rhs = base if F.side == "H" else ring.kv(ring.point(e), w) * base
            if lhs != rhs:
                return False
    return True


@lru_cache(maxsize=1 << 17)
def _inverse_cached(ring, rows: tuple):
    if not ring.is_invertible(rows):
        return None
    return tuple(tuple(r) for r in mat_inverse(rows))


def _inverse_or_none(ring, y):
    inv = _inverse_cached(ring, tuple(tuple(r) for r in y))
    return None if inv is None else [list(r) for r in inv]


def hf_transform(g: EquivariantFunction, direction: str, weight: WeightTuple | None = None) -> EquivariantFunction:
    """Pass between F-side and H-side functions.

    ``F->H``: ``H(x, y) = F(x, y^-1) / N_w(x N(x)^-n det y)``;
    ``H->F``: ``F(x, y) = H(x, y^-1) / N_w(x^-1 N(x)^n det y)``.
    ``w`` defaults to ``(n, 0)``.  Both vanish where ``det y`` is not a unit.
    """
    n = g.n
    w = weight or WeightTuple(n, 0)
    if direction in ("F->H", "FH"):
        sign, side = -1, "H"
    elif direction in ("H->F", "HF"):
        sign, side = 1, "F"
    else:
        raise ValueError(f"unknown direction {direction!r}")

    def ev(ring, x, y):
        yinv = _inverse_or_none(ring, y)
        if yinv is None:
            return ring.zero
        v = g.evaluate(ring, x, yinv)
        if not v:
            return v
        b = (x**-sign) * ring.diag(ring.norm(x) ** (sign * n) * det(y))
        return v * ring.kv(b, w) ** -1

    return EquivariantFunction(g.field, n, ev, side=side, weight=w if side == "F" else None,
                               name=f"{direction}({g.name})")


def weight_shift_function(F: EquivariantFunction, w: WeightTuple) -> EquivariantFunction:
    """``F'(x, y) = N_{k-n,nu}(x^-1 N(x)^n det y) F(x, y)``, an (n, 0)-equivariant function."""
    n = F.n
    shift = WeightTuple(w.k - n, w.nu)

    def ev(ring, x, y):
        v = F.evaluate(ring, x, y)
        if not v:
            return v
        b = (x**-1) * ring.diag(ring.norm(x) ** n * det(y))
        return ring.kv(b, shift) * v

    return EquivariantFunction(F.field, n, ev, side="F", weight=WeightTuple(n, 0),
                               name=f"shift({F.name})")


# -- cusp data -----------------------------------------------------------------

@dataclass(frozen=True)
class CuspDatum:
    """Resolver ``beta -> [(a, weight), ...]`` with a and its conjugate p-adic units."""

    name: str
    terms: tuple = ()
    resolver: Callable | None = dc_field(default=None, compare=False)

    def __call__(self, beta: HermitianMatrix) -> list[tuple[CMFieldElement, int]]:
        return list(self.resolver(beta)) if self.resolver else list(self.terms)

    def validate(self, field: CMField, betas: Iterable[HermitianMatrix] = ()) -> None:
        for terms in [self.terms] + [self(b) for b in betas]:
            for a, _ in terms:
                if not field.is_p_unit(field.lift(a)):
                    raise ValueError(f"cusp element {a} is not a p-adic unit at both places")

    def to_json(self):
        return {"name": self.name,
                "terms": [{"a": a.to_json(), "weight": wt} for a, wt in self.terms]}


def standard_cusp(field: CMField) -> CuspDatum:
    return CuspDatum("standard", ((field.one, 1),))


def unit_cusp(field: CMField) -> CuspDatum:
    """Every global unit with weight +1, except -1 with weight -1."""
    minus_one = -field.one
    return CuspDatum("units", tuple((e, -1 if e == minus_one else 1) for e in field.unit_group()))


def explicit_cusp(field: CMField, terms: Sequence[tuple], name: str = "explicit") -> CuspDatum:
    datum = CuspDatum(name, tuple((field.lift(a), int(wt)) for a, wt in terms))
    datum.validate(field)
    return datum


# -- Eisenstein series ---------------------------------------------------------

@lru_cache(maxsize=64)
def _lattice(n: int, bound: Fraction, field: CMField) -> tuple[HermitianMatrix, ...]:
    return tuple(enumerate_positive(n, bound, field))


@lru_cache(maxsize=1 << 16)
def _cusp_point(beta: HermitianMatrix, a: CMFieldElement, ring):
    """``(x, y, b, det(beta)^-n)`` for the term of ``a``: ``x = a``, ``y = N(a)^-1 beta``, ``b = a^-1 det beta``."""
    inv_norm = 1 / a.norm()
    y = ring.matrix([[c * inv_norm for c in row] for row in beta.entries])
    D = beta.det()
    b = ring.point(a**-1 * D)
    Dn = ring.embed(D) ** -beta.n if D.numerator % ring.field.p or isinstance(ring, ExactRing) else None
    return ring.point(a), y, b, Dn


def _coefficient(beta: HermitianMatrix, w: WeightTuple, F: EquivariantFunction, cusp: CuspDatum, ring):
    field = ring.field
    total = ring.zero
    for a, wt in cusp(beta):
        x, y, b, Dn = _cusp_point(beta, field.lift(a), ring)
        v = F.evaluate(ring, x, [list(r) for r in y])
        if not v:
            continue
        if Dn is None:
            raise NotInvertible(f"det {beta.det()} is not a p-adic unit but F is nonzero there")
        total = total + v * ring.kv(b, w) * Dn * wt
    return total


def _map_ordered(fn, items, workers: int | None):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(b) for b in items]


def eisenstein_qexp(w: WeightTuple, F: EquivariantFunction, cusp: CuspDatum | None, bound, ring,
                    *, workers: int | None = None) -> QExpansion:
    """Truncated q-expansion of the Eisenstein series attached to ``F``.

    ``c(beta) = sum_{(a, wt)} wt F(a, N(a)^-1 beta) N_{k,nu}(a^-1 det beta) det(beta)^-n``
    over positive lattice matrices of trace at most ``bound``.
    """
    n = F.n
    if w.k < n:
        raise WeightTooSmall(f"weight k={w.k} is below n={n}")
    cusp = cusp or standard_cusp(ring.field)
    betas = _lattice(n, Fraction(bound), ring.field)
    values = _map_ordered(lambda b: _coefficient(b, w, F, cusp, ring), betas, workers)
    return QExpansion(n, bound, ring, dict(zip(betas, values)))


def integrate_measure(H: EquivariantFunction, bound, precision: int | None, cusp: CuspDatum | None = None,
                      *, workers: int | None = None) -> QExpansion:
    """Integral of ``H`` against the Eisenstein measure, as a q-expansion.

    Equal to the weight ``(n, 0)`` Eisenstein expansion of the F-side partner of
    ``H``.  ``precision=None`` computes exactly.
    """
    if H.side != "H":
        raise ValueError("integrate_measure expects an H-side function")
    n = H.n
    ring = make_ring(H.field, precision)
    return eisenstein_qexp(WeightTuple(n, 0), hf_transform(H, "H->F"), cusp, bound, ring, workers=workers)


def _default_block(n: int, lam: HighestWeight) -> str:
    if n % 2 == 0 and lam.nonzero_parts <= n // 2:
        return "lower-left"
    return "full"


def theta_integrand(H: EquivariantFunction, lam: HighestWeight | None, block: str | None = None) -> EquivariantFunction:
    """``H'(x, y) = H(x, y) phi_lam(N(x) y^-1)``.

    ``phi_lam`` reads the lower-left ``n/2`` block when the weight fits it and
    the whole matrix otherwise; ``block`` forces ``"lower-left"`` or ``"full"``.
    """
    if lam is None or lam.is_trivial():
        return H
    n = H.n
    block = block or _default_block(n, lam)
    if block not in ("lower-left", "full"):
        raise ValueError(f"unknown block {block!r}")
    m = n // 2

    def ev(ring, x, y):
        v = H.evaluate(ring, x, y)
        if not v:
            return v
        yinv = _inverse_or_none(ring, y)
        if yinv is None:
            raise NotInvertible("theta integrand needs invertible y")
        Nx = ring.norm(x)
        z = [[Nx * c for c in row] for row in yinv]
        if block == "lower-left":
            z = [row[:m] for row in z[m:]]
        return v * phi_kappa_eval(lam, z, ring.one)

    return EquivariantFunction(H.field, n, ev, side=H.side, weight=H.weight,
                               name=f"theta{lam.parts}({H.name})")


# -- the group G_n --------------------------------------------------------------

class MeasureDomain:
    """Residue classes of ``(O_K (x) Z_p)^x x GL_n(Z_p)`` mod ``p^level``, up to global units."""

    def __init__(self, field: CMField, n: int, level: int = 1):
        self.field = field
        self.n = n
        self.level = level
        self.p = field.p
        self._units = list(field.unit_group())
        self._reps: list | None = None

    def describe(self) -> dict:
        return {"n": self.n, "p": self.p, "level": self.level, "delta": self.field.delta,
                "group": "((O_K (x) Z_p)^x x GL_n(Z_p)) / O_K^x"}

    def orbit(self, xres):
        return [_unit_action_residues(self.field, e, xres, self.level) for e in self._units]

    def canonical(self, xres, yres):
        return min(self.orbit(tuple(xres))), tuple(yres)

    def representatives(self) -> list[tuple]:
        if self._reps is None:
            m = self.p**self.level
            units = [u for u in range(m) if u % self.p]
            ys = [flat for flat in product(range(m), repeat=self.n * self.n)
                  if _det_mod(flat, self.n, self.p)]
            xs = sorted({min(self.orbit((a, b))) for a in units for b in units})
            self._reps = [(x, y) for x in xs for y in ys]
        return self._reps

    def __len__(self):
        return len(self.representatives())

    def invariant_function(self, values: dict, name: str = "class-function") -> EquivariantFunction:
        """H-side function with the given value on each class (missing classes are 0)."""
        dom = self

        def lookup(xres, yres):
            return values.get(dom.canonical(xres, yres), 0)

        return locally_constant(self.field, self.n, self.level, lookup, side="H", name=name)

    def random_function(self, rng: random.Random, lo: int = -9, hi: int = 9) -> EquivariantFunction:
        values = {rep: rng.randint(lo, hi) for rep in self.representatives()}
        return self.invariant_function(values, name="random-class-function")


# -- identity verification -------------------------------------------------------

@dataclass
class IdentityReport:
    kind: str
    mode: object
    rows: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(not r[3] for r in self.rows)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if r[3]]

    def max_discrepancy(self):
        """Largest discrepancy: exact norm in exact mode, ``p^-valuation`` style in p-adic mode."""
        worst = 0
        for _, _, _, d in self.rows:
            if not d:
                continue
            size = Fraction(1, d.p**d.valuation()) if isinstance(d, PadicTruncated) else d.norm()
            worst = max(worst, size)
        return worst

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "mode": self.mode,
            "status": "PASS" if self.passed else "FAIL",
            "compared": len(self.rows),
            "mismatches": len(self.failures),
            "max_discrepancy": _fmt(self.max_discrepancy()),
            "rows": [{"index": idx, "lhs": _fmt(l), "rhs": _fmt(r), "discrepancy": _fmt(d)}
                     for idx, l, r, d in self.rows],
        }

    def render(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _fmt(v):
    if isinstance(v, PadicTruncated):
        return v.residue
    if isinstance(v, CMFieldElement):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _index_json(key):
    if isinstance(key, HermitianMatrix):
        return key.to_json()
    return [k.to_json() for k in key]


def _compare(kind, mode, lhs, rhs) -> IdentityReport:
    keys = sorted(set(lhs.coeffs) | set(rhs.coeffs),
                  key=lambda k: k.qexp_key() if isinstance(k, HermitianMatrix)
                  else (k[0].trace() + k[1].trace(), k[0].sort_key(), k[1].sort_key()))
    rows = []
    for k in keys:
        l, r = lhs[k], rhs[k]
        rows.append((_index_json(k), l, r, l - r))
    return IdentityReport(kind, mode, rows)


def _all_pairs(m: int, bound, field: CMField):
    """Pairs of positive m x m blocks with total trace at most ``bound``."""
    bound = Fraction(bound)
    if bound < 2 * m:
        return []
    blocks = _lattice(m, bound - m, field)
    return [(A, B) for A in blocks for B in blocks if A.trace() + B.trace() <= bound]


def swap_by_enumeration(f: QExpansion, lam: HighestWeight | None) -> PulledBackQExpansion:
    """Pullback of the block-permuted expansion, summed over off-diagonal blocks directly.

    At ``(A11, A22)``: ``sum_{B21} phi(B21^*) c([[A22, B21], [B21^*, A11]])``
    with ``B21`` ranging over :func:`enumerate_offdiag`.
    """
    m = f.n // 2
    field, ring = f.field, f.ring
    weight = conj_transpose_weight(lam) if lam is not None and not lam.is_trivial() else (lambda A: 1)
    out = {}
    for A11, A22 in _all_pairs(m, f.bound, field):
        total = ring.zero
        for B21 in enumerate_offdiag(A11, A22, field):
            c = f[assemble_blocks(A22, A11, conj_transpose(B21))]
            if c:
                total = total + ring.embed(weight(B21)) * c
        out[(A11, A22)] = total
    return PulledBackQExpansion(m, f.bound, ring, out)


def verify_identity(kind: str, params: dict, bound, precision: int | None = None, *,
                    workers: int | None = None) -> IdentityReport:
    """Compare both sides of an identity coefficient by coefficient.

    ``params`` holds ``F`` (an F-side function), ``weight``, and optionally
    ``lam``, ``cusp`` and ``rhs_F`` (replaces the function fed to the right side,
    used to demonstrate failures).  ``precision=None`` runs in exact mode.
    """
    F: EquivariantFunction = params["F"]
    w: WeightTuple = params.get("weight") or F.weight
    lam = params.get("lam")
    if isinstance(lam, (tuple, list)):
        lam = HighestWeight(lam)
    cusp = params.get("cusp") or standard_cusp(F.field)
    ring = make_ring(F.field, precision)
    mode = ring.descriptor()
    n = F.n

    if kind == "weight-shift":
        lhs = eisenstein_qexp(w, F, cusp, bound, ring, workers=workers)
        F_rhs = params.get("rhs_F") or F
        rhs = eisenstein_qexp(WeightTuple(n, 0), weight_shift_function(F_rhs, w), cusp, bound, ring,
                              workers=workers)
        return _compare(kind, mode, lhs, rhs)
    if kind == "diffop-measure":
        lhs = theta_pullback(eisenstein_qexp(w, F, cusp, bound, ring, workers=workers), lam)
        F_rhs = params.get("rhs_F") or F
        H = theta_integrand(hf_transform(F_rhs, "F->H", weight=w), lam)
        rhs = theta_pullback(integrate_measure(H, bound, precision, cusp, workers=workers))
        return _compare(kind, mode, lhs, rhs)
    if kind == "swap":
        f = params.get("qexp") or eisenstein_qexp(w, F, cusp, bound, ring, workers=workers)
        lhs = swap_blocks(theta_pullback(f, lam))
        rhs = swap_by_enumeration(f, lam)
        return _compare(kind, mode, lhs, rhs)
    raise ValueError(f"unknown identity kind {kind!r}")


# -- declarative descriptions -------------------------------------------------------------

def function_from_spec(spec: dict, field: CMField, n: int, w: WeightTuple | None = None) -> EquivariantFunction:
    """Build a function from a JSON-style description.

    ``{"builtin": "constant", "value": 1, "side": "H"}``,
    ``{"builtin": "character_polynomial", "det_power": 0}``,
    ``{"builtin": "random", "seed": 0, "level": 1}``, or a table
    ``{"level": 1, "classes": [{"x": [1, 1], "y": [1, 0, 0, 1], "value": 3}]}``.
    Add ``"symmetrize": true`` to average an F-side table over the units.
    """
    side = spec.get("side", "F")
    w = w or WeightTuple(n, 0)
    builtin = spec.get("builtin")
    if builtin == "constant":
        F = constant_function(field, n, _parse_value(spec.get("value", 1)), side=side, weight=w,
                              y_support=spec.get("y_support", "invertible"))
    elif builtin == "character_polynomial":
        poly = _det_poly(n) ** int(spec.get("det_power", 0))
        F = character_polynomial(field, n, w, poly, y_support=spec.get("y_support", "invertible"))
    elif builtin == "random":
        F = random_locally_constant(field, n, int(spec.get("level", 1)), random.Random(int(spec.get("seed", 0))),
                                    side=side, weight=w)
    elif builtin is None:
        level = int(spec["level"])
        table = {}
        for c in spec.get("classes", []):
            x = tuple(int(v) for v in c["x"])
            y = tuple(int(v) for v in c["y"])
            if len(x) != 2 or len(y) != n * n:
                raise ValueError(f"residue class {c} does not match n={n}")
            table[(x, y)] = _parse_value(c["value"])
        F = locally_constant(field, n, level, table, side=side, weight=w,
                             y_support=spec.get("y_support", "invertible"))
    else:
        raise ValueError(f"unknown builtin {builtin!r}")
    if spec.get("symmetrize"):
        F = symmetrize(F, w, side)
    return F


def _parse_value(v):
    if isinstance(v, dict):
        return CMFieldElement(Fraction(v.get("a", 0)), Fraction(v.get("b", 0)))
    return Fraction(v)


def _det_poly(n: int) -> HomogPolynomial:
    rows = [[HomogPolynomial.variable(n, n, i, j) for j in range(n)] for i in range(n)]
    return det(rows) if n else HomogPolynomial.constant(0, 0)


def cusp_from_spec(spec, field: CMField) -> CuspDatum:
    if spec is None or spec == "standard" or (isinstance(spec, dict) and spec.get("kind") == "standard"):
        return standard_cusp(field)
    if spec == "units" or (isinstance(spec, dict) and spec.get("kind") == "units"):
        return unit_cusp(field)
    if isinstance(spec, dict) and spec.get("kind") == "explicit":
        terms = [(CMFieldElement(Fraction(t["a"][0]), Fraction(t["a"][1]), field.delta), int(t["weight"]))
                 for t in spec["terms"]]
        return explicit_cusp(field, terms)
    raise ValueError(f"unknown cusp datum {spec!r}")
