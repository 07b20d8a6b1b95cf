"""Acceptance criteria 1-9, each reported on its own PASS/FAIL line."""

import random
import time
from functools import cache
from math import comb

from unitary_eis.cmfield import CMField, WeightTuple
from unitary_eis.eisenstein import (
    MeasureDomain,
    hf_transform,
    integrate_measure,
    random_locally_constant,
    standard_cusp,
    symmetrize,
    unit_cusp,
    verify_identity,
)
from unitary_eis.qexp import reduce_mod
from unitary_eis.reps import HighestWeight, decompose_tau, highest_weight_vector, restrict_decompose, tau_action
from unitary_eis.rings import PadicRing, leading_minor

from test_hermitian import naive_grid
from test_reps import _rand_matrix

K = CMField(-1, 5)
N = 2
SEED = 20240601
NUM_FUNCTIONS = 10
SHIFT_PRECISION = 8
MEASURE_PRECISION = 6
BOUND = 6


def report(capsys, number: int, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")


@cache
def base_functions():
    rng = random.Random(SEED)
    return tuple(random_locally_constant(K, N, 1, rng) for _ in range(NUM_FUNCTIONS))


def cusps():
    return (standard_cusp(K), unit_cusp(K))


@cache
def weight_shift_sweep():
    """(label, exact report, p-adic report) for every case of criterion 1."""
    out = []
    for k in (2, 3, 4, 5):
        for nu in (-1, 0, 1):
            w = WeightTuple(k, nu)
            for idx, F0 in enumerate(base_functions()):
                F = symmetrize(F0, w)
                for cusp in cusps():
                    params = {"F": F, "weight": w, "cusp": cusp}
                    exact = verify_identity("weight-shift", params, BOUND, None)
                    padic = verify_identity("weight-shift", params, BOUND, SHIFT_PRECISION)
                    out.append(((k, nu, idx, cusp.name), exact, padic))
    return out


@cache
def diffop_sweep():
    out = []
    for nu in (-1, 0, 1):
        w = WeightTuple(N, nu)
        for idx, F0 in enumerate(base_functions()):
            F = symmetrize(F0, w)
            for cusp in cusps():
                for lam in (None, HighestWeight((1,)), HighestWeight((2,))):
                    params = {"F": F, "weight": w, "cusp": cusp, "lam": lam}
                    exact = verify_identity("diffop-measure", params, BOUND, None)
                    padic = verify_identity("diffop-measure", params, BOUND, MEASURE_PRECISION)
                    out.append(((nu, idx, cusp.name, lam), exact, padic))
    return out


def test_criterion_1_weight_shift(capsys):
    start = time.perf_counter()
    sweep = weight_shift_sweep()
    elapsed = time.perf_counter() - start
    bad = [label for label, exact, padic in sweep if not (exact.passed and padic.passed)]
    compared = sum(len(e.rows) for _, e, _ in sweep)
    ok = not bad and len(sweep) == 240 and all(e.rows for _, e, _ in sweep)
    report(capsys, 1, ok, f"weight shift, {len(sweep)} cases, {compared} coefficients exact and mod 5^8, "
                          f"{len(bad)} failing, {elapsed:.1f}s")
    assert ok, bad[:5]


def test_criterion_2_diffop_measure(capsys):
    start = time.perf_counter()
    sweep = diffop_sweep()
    elapsed = time.perf_counter() - start
    bad = [label for label, exact, padic in sweep if not padic.passed]
    compared = sum(len(p.rows) for _, _, p in sweep)
    ok = not bad and len(sweep) == 180 and all(p.rows for _, _, p in sweep)
    report(capsys, 2, ok, f"differential operator vs measure, {len(sweep)} cases, {compared} coefficients "
                          f"mod 5^6, {len(bad)} failing, {elapsed:.1f}s")
    assert ok, bad[:5]


def test_criterion_3_branching(capsys):
    failures = []
    for d in range(5):
        for q in range(1, 4):
            for s in range(1, 4):
                total, ambient = decompose_tau(d, q, s).dimension_check()
                if not total == ambient == comb(q * s + d - 1, d):
                    failures.append(("tau", d, q, s))
        for r in (1, 2):
            for s in (1, 2):
                total, ambient = restrict_decompose(d, r, s).dimension_check()
                if total != ambient:
                    failures.append(("restrict", d, r, s))
    report(capsys, 3, not failures, f"branching dimension identities, {len(failures)} failing")
    assert not failures


def test_criterion_4_eigenvector(capsys):
    rng = random.Random(SEED)
    failures = 0
    for _ in range(200):
        r, s = rng.randint(1, 3), rng.randint(1, 3)
        mu = min(r, s)
        parts = sorted((rng.randint(1, 3) for _ in range(rng.randint(1, min(2, mu)))), reverse=True)
        lam = HighestWeight(parts)
        P = highest_weight_vector(lam, r, s)
        u, v = _rand_matrix(rng, r, upper=True), _rand_matrix(rng, s, upper=True)
        factor = 1
        for j, e in enumerate(lam.exponents(mu), start=1):
            factor *= (leading_minor(u, j) * leading_minor(v, j)) ** e
        failures += tau_action(P, u, v) != P * factor
    report(capsys, 4, failures == 0, f"highest weight eigenvector, 200 trials, {failures} failing")
    assert failures == 0


def test_criterion_5_measure_axioms(capsys):
    rng = random.Random(SEED + 5)
    dom = MeasureDomain(K, N, 1)
    linear_fail = 0
    for _ in range(20):
        H1, H2 = dom.random_function(rng), dom.random_function(rng)
        alpha = rng.randint(-20, 20)
        lhs = integrate_measure(H1.scale(alpha) + H2, BOUND, MEASURE_PRECISION)
        rhs = integrate_measure(H1, BOUND, MEASURE_PRECISION).scale(alpha) + integrate_measure(H2, BOUND, MEASURE_PRECISION)
        linear_fail += lhs != rhs
    bounded_fail = 0
    for _ in range(5):
        H0, H = dom.random_function(rng), dom.random_function(rng)
        small = integrate_measure(H0.scale(125), BOUND, MEASURE_PRECISION)
        bounded_fail += not small.coeffs or any(c.residue % 125 for c in small.coeffs.values())
        a = reduce_mod(integrate_measure(H, BOUND, MEASURE_PRECISION), 3)
        b = reduce_mod(integrate_measure(H + H0.scale(125), BOUND, MEASURE_PRECISION), 3)
        bounded_fail += a != b
    ok = linear_fail == 0 and bounded_fail == 0
    report(capsys, 5, ok, f"measure linearity ({linear_fail}/20 failing) and boundedness mod 5^3 "
                          f"({bounded_fail} failing)")
    assert ok


def test_criterion_6_bijection(capsys):
    rng = random.Random(SEED + 6)
    ring = PadicRing(K, MEASURE_PRECISION)
    m = 5**MEASURE_PRECISION
    w = WeightTuple(N, 0)
    F = symmetrize(base_functions()[0], w)
    H = MeasureDomain(K, N, 1).random_function(rng)
    F_to_H, H_to_F = hf_transform(F, "F->H"), hf_transform(H, "H->F")
    F_back, H_back = hf_transform(F_to_H, "H->F"), hf_transform(H_to_F, "F->H")
    units = list(K.unit_group())
    failures = checked = 0
    while checked < 100:
        y = [[rng.randrange(m) for _ in range(N)] for _ in range(N)]
        if (y[0][0] * y[1][1] - y[0][1] * y[1][0]) % 5 == 0:
            continue
        x = ring.point((rng.randrange(1, m // 5) * 5 + rng.randint(1, 4), rng.randrange(1, m // 5) * 5 + 1))
        y = ring.matrix(y)
        checked += 1
        failures += F_back.evaluate(ring, x, y) != F.evaluate(ring, x, y)
        failures += H_back.evaluate(ring, x, y) != H.evaluate(ring, x, y)
        for e in units:
            ex = ring.act(e, x)
            failures += F_to_H.evaluate(ring, ex, y) != F_to_H.evaluate(ring, x, y)
            failures += H_to_F.evaluate(ring, ex, y) != ring.kv(ring.point(e), w) * H_to_F.evaluate(ring, x, y)
    report(capsys, 6, failures == 0, f"F/H bijection at {checked} points mod 5^6, {failures} failing")
    assert failures == 0


def _coherence(exact, padic, j):
    """(compared, mismatches): iota_p of each exact value against the p-adic row with the same index."""
    padic_rows = {str(r[0]): r for r in padic.rows}
    mismatches = 0
    for idx, le, re, _ in exact.rows:
        _, lp, rp, _ = padic_rows.pop(str(idx), (None, 0, 0, None))
        mismatches += (K.iota_p(le, j) != lp) + (K.iota_p(re, j) != rp)
    # p-adic rows with no exact counterpart must be zero
    mismatches += sum(bool(lp) + bool(rp) for _, lp, rp, _ in padic_rows.values())
    return 2 * len(exact.rows), mismatches


def test_criterion_7_oracle_coherence(capsys):
    mismatches = total = 0
    for sweep, j in ((weight_shift_sweep(), SHIFT_PRECISION), (diffop_sweep(), MEASURE_PRECISION)):
        for _, exact, padic in sweep:
            t, bad = _coherence(exact, padic, j)
            total += t
            mismatches += bad + (not exact.passed)
    report(capsys, 7, mismatches == 0, f"exact vs p-adic coherence over {total} coefficients, {mismatches} mismatches")
    assert mismatches == 0


def test_criterion_8_enumeration(capsys):
    from unitary_eis.hermitian import enumerate_positive

    failures = []
    for delta in (-1, -2, -3):
        for B in range(2, 9):
            field, expected = naive_grid(delta, B)
            if enumerate_positive(2, B, field) != expected:
                failures.append((delta, B))
    count = len(enumerate_positive(2, 3, K))
    ok = not failures and count == 11
    report(capsys, 8, ok, f"enumeration vs naive grid, delta in (-1,-2,-3), B <= 8; B=3 count {count}")
    assert ok, failures


def test_criterion_9_swap(capsys):
    failures = checked = 0
    for d in (0, 1, 2):
        lam = HighestWeight((d,)) if d else None
        for F0 in base_functions()[:3]:
            w = WeightTuple(2, 0)
            for B in range(2, 5):
                rep = verify_identity("swap", {"F": symmetrize(F0, w), "weight": w, "lam": lam}, B, None)
                checked += len(rep.rows)
                failures += not rep.passed
    ok = failures == 0 and checked > 0
    report(capsys, 9, ok, f"swap relation for lambda=(d), d <= 2, B <= 4, {checked} coefficients exact")
    assert ok
