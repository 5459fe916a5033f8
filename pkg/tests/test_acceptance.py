"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (with the measured time and the
time limit) and then asserts the result.
"""

import itertools
import json
import time
from fractions import Fraction

import numpy as np
import pytest

from prodexp import gf
from prodexp.codes import code_from_space, dual, full_code, is_css_pair, parity_code, random_code, reed_solomon, repetition_code
from prodexp.complexes import cohomology_dim, collection_complex, verify_expansion_cheeger_identity
from prodexp.expansion.core import expansion_factor
from prodexp.expansion.structure import (
    extend_codeword_part,
    intersection_identity_check,
    rank_bound_check,
    zero_rectangle_decompose,
)
from prodexp.expansion.testability import (
    agreement_test_constant,
    dinur_conversion,
    robustness_constant,
    smb_expansion_check,
    smb_lower_bound,
    smb_parameters,
    upper_bound_witness,
)
from prodexp.harness import census, montecarlo
from prodexp.harness.demos import identity_bound
from prodexp.harness.reports import to_json
from prodexp.product import CodeCollection, boxplus_basis, boxplus_membership

F2 = gf.field_create(2)
REP3 = repetition_code(F2, 3)
RR = CodeCollection.of(REP3, REP3)


@pytest.fixture
def report(capsys):
    def emit(label, ok, elapsed, limit, detail=""):
        status = "PASS" if ok and elapsed < limit else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] {label}: {detail} ({elapsed:.2f}s, limit {limit}s)")
        assert ok, detail
        assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"

    return emit


def random_pairs(count, seed, q=2, lengths=(2, 3, 4)):
    """Deterministic random pairs of equal length, small enough to enumerate."""
    F = gf.field_of_order(q)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.choice(lengths))
        k1, k2 = (int(v) for v in rng.integers(0, n + 1, 2))
        if n == 4 and k1 + k2 > 4:
            continue
        out.append(CodeCollection.of(random_code(F, n, k1, rng), random_code(F, n, k2, rng)))
    return out


def random_css_pairs(count, seed):
    """Pairs with ``dual(C2) <= C1``: the second code contains the dual of the first."""
    out = []
    rng = np.random.default_rng(seed)
    for t in range(count):
        q, n = ((2, 3), (2, 4), (3, 3))[t % 3]
        F = gf.field_of_order(q)
        C1 = random_code(F, n, int(rng.integers(1, n)), rng)
        extra = gf.random_subspace(F, n, int(rng.integers(0, 2)), rng)
        C2 = code_from_space(gf.subspace_sum(dual(C1).space, extra))
        out.append(CodeCollection.of(C1, C2))
    return out


def named_pairs():
    rep2 = repetition_code(F2, 2)
    return [
        RR,
        CodeCollection.of(REP3, parity_code(F2, 3)),
        CodeCollection.of(rep2, rep2),
        CodeCollection.of(repetition_code(F2, 4), parity_code(F2, 4)),
    ]


def test_criterion_01_rep3_pair(report):
    t = time.perf_counter()
    rho = expansion_factor(RR).rho
    report("1 exact Rep3 x Rep3 value", rho == Fraction(5, 9), time.perf_counter() - t, 1, f"rho={rho}")


def test_criterion_02_expansion_equals_agreement(report):
    t = time.perf_counter()
    pairs = random_pairs(50, 2) + named_pairs()
    bad = [c.describe() for c in pairs if expansion_factor(c).rho != agreement_test_constant(c, "direct")]
    report("2 expansion = agreement constant", not bad, time.perf_counter() - t, 60, f"{len(pairs)} pairs, {len(bad)} mismatches")


def test_criterion_03_cheeger_identity(report):
    t = time.perf_counter()
    rep2 = repetition_code(F2, 2)
    named = [RR, CodeCollection.of(REP3, full_code(F2, 3)), CodeCollection.of(rep2, rep2, rep2)]
    identity_ok = all(verify_expansion_cheeger_identity(c) for c in named)
    rng = np.random.default_rng(3)
    complexes_ok = 0
    for i in range(50):
        q = (2, 3)[i % 2]
        F = gf.field_of_order(q)
        m = 2 + (i // 2) % 2
        lens = [int(v) for v in rng.integers(2, 4, m)]
        coll = CodeCollection.of(*(random_code(F, n, int(rng.integers(0, n + 1)), rng) for n in lens))
        cx = collection_complex(coll)
        squares = all(not np.any(F.matmul(cx.delta(j + 1), cx.delta(j))) for j in range(cx.length - 2))
        low = all(cohomology_dim(cx, j) == 0 for j in range(m))
        top = cohomology_dim(cx, m) == int(np.prod([C.n - C.k for C in coll]))
        complexes_ok += squares and low and top
    ok = identity_ok and complexes_ok == 50
    detail = f"identity on {len(named)} named collections: {identity_ok}; {complexes_ok}/50 complexes exact"
    report("3 Cheeger identity and complex checks", ok, time.perf_counter() - t, 300, detail)


def test_criterion_04_css_pairs(report):
    t = time.perf_counter()
    pairs = random_css_pairs(20, 4) + [CodeCollection.of(REP3, parity_code(F2, 3))]
    assert all(is_css_pair(*c) for c in pairs)
    exact_ok = all(expansion_factor(c).rho <= Fraction(1, c.shape[0]) for c in pairs)
    rs = CodeCollection.of(reed_solomon(5, 2), reed_solomon(5, 3))
    bound, how = identity_bound(rs)
    ok = exact_ok and is_css_pair(*rs) and bound <= Fraction(1, 5)
    detail = f"{len(pairs)} exact pairs <= 1/n: {exact_ok}; RS5 pair certified rho <= {bound} via {how}"
    report("4 CSS pairs expand at most 1/n", ok, time.perf_counter() - t, 60, detail)


def test_criterion_05_upper_bounds(report):
    t = time.perf_counter()
    computed = random_pairs(50, 2) + named_pairs() + random_pairs(30, 8) + random_css_pairs(20, 4)
    over = 0
    for c in computed:
        n = c.shape[0]
        eps = c[0].redundancy * c[1].redundancy
        over += expansion_factor(c).rho > eps + Fraction(1, n)
    rng = np.random.default_rng(5)
    heavy = witnesses = 0
    while witnesses < 100:
        n = int(rng.integers(2, 7))
        k1, k2 = (int(v) for v in rng.integers(1, n + 1, 2))
        coll = CodeCollection.of(random_code(F2, n, k1, rng), random_code(F2, n, k2, rng))
        w = upper_bound_witness(coll, cap=1 << 16)
        eps = coll[0].redundancy * coll[1].redundancy
        heavy += w.weight > eps * n * n + n or not boxplus_membership(w.word, coll)
        witnesses += 1
    ok = over == 0 and heavy == 0
    detail = f"{len(computed)} exact pairs, {over} above eps1 eps2 + 1/n; 100 witnesses, {heavy} too heavy"
    report("5 upper bound and witness weight", ok, time.perf_counter() - t, 120, detail)


def test_criterion_06_robustness(report):
    t = time.perf_counter()
    value = robustness_constant(RR)
    target = dinur_conversion(Fraction(5, 9))
    ok = target == Fraction(5, 28) and value >= target
    report("6 robustness from agreement", ok, time.perf_counter() - t, 10, f"robustness={value} >= {target}")


def test_criterion_07_constructive_steps(report):
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    fails = {"intersection": 0, "zero_rectangle": 0, "rank": 0, "extension": 0}
    for i in range(100):
        F = gf.field_of_order((2, 3)[i % 2])
        coll = CodeCollection.of(*(random_code(F, 3, int(rng.integers(0, 4)), rng) for _ in range(2)))
        X = gf.random_subspace(F, 3, int(rng.integers(0, 4)), rng)
        Y = gf.random_subspace(F, 3, int(rng.integers(0, 4)), rng)
        fails["intersection"] += not intersection_identity_check(X, Y, coll)
    C = reed_solomon(7, 3)
    coll = CodeCollection.of(C, C)
    F = coll.field
    planted = 0
    while planted < 200:
        out1 = sorted(rng.choice(7, size=int(rng.integers(0, C.d)), replace=False).tolist())
        out2 = sorted(rng.choice(7, size=int(rng.integers(0, C.d)), replace=False).tolist())
        x = np.zeros((7, 7), dtype=np.int64)
        for j in out2:
            x[:, j] = F.matmul(rng.integers(0, 7, C.k), C.generator)
        for r in out1:
            x[r, :] = F.add(x[r, :], F.matmul(rng.integers(0, 7, C.k), C.generator))
        A1 = [r for r in range(7) if r not in out1]
        A2 = [j for j in range(7) if j not in out2]
        x[np.ix_(A1, A2)] = 0
        if not boxplus_membership(x, coll):
            continue
        d1, d2 = zero_rectangle_decompose(x, A1, A2, coll)
        fails["zero_rectangle"] += bool(not np.array_equal(F.add(d1, d2), x) or d1[:, A2].any() or d2[A1, :].any())
        planted += 1
    for coll in random_pairs(10, 70, lengths=(3, 4)):
        box = boxplus_basis(coll)
        for x in gf.span_elements(box):
            fails["rank"] += not rank_bound_check(x.reshape(coll.shape), coll).holds
    for _ in range(200):
        coll = CodeCollection.of(random_code(F2, 4, 2, rng), random_code(F2, 4, int(rng.integers(1, 4)), rng))
        box = boxplus_basis(coll)
        x = F2.matmul(rng.integers(0, 2, box.k), box.basis).reshape(4, 4)
        A1 = sorted(rng.choice(4, size=int(rng.integers(1, 5)), replace=False).tolist())
        A2 = sorted(rng.choice(4, size=int(rng.integers(1, 5)), replace=False).tolist())
        y = extend_codeword_part(x, A1, A2, coll)
        sub = x[np.ix_(A1, A2)]
        fails["extension"] += not (
            np.array_equal(y[np.ix_(A1, A2)], sub) and gf.rank(F2, y) == gf.rank(F2, sub) and boxplus_membership(y, coll)
        )
    report("7 constructive steps", not any(fails.values()), time.perf_counter() - t, 300, f"failures {fails}")


SMB_GRID_S = (1, 2, 3, 4, 6, 8)
SMB_GRID_M = (0, 1, 2)
SMB_GRID_BETA = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(1))


def test_criterion_08_smb_round_trip(report):
    t = time.perf_counter()
    pairs = [c for c in random_pairs(40, 9, lengths=(3, 4)) if boxplus_basis(c).k] + [RR]
    forward = backward = checks = 0
    for coll in pairs:
        n = coll.shape[0]
        rho = expansion_factor(coll).rho
        s, m, beta = smb_parameters(rho, n)
        forward += not smb_expansion_check(coll, s, m, beta).holds
        for s2, m2, b2 in itertools.product(SMB_GRID_S, SMB_GRID_M, SMB_GRID_BETA):
            checks += 1
            if smb_expansion_check(coll, s2, m2, b2).holds and smb_lower_bound(s2, b2, n) > rho:
                backward += 1
    detail = f"{len(pairs)} pairs, {forward} forward and {backward}/{checks} backward violations"
    report("8 (s,m,beta) round trip", forward == 0 and backward == 0, time.perf_counter() - t, 300, detail)


def test_criterion_09_probabilistic_bounds(report):
    t = time.perf_counter()
    rows = []
    for N in (1_000, 10_000):
        rows.append(montecarlo.run_lemma3_montecarlo(2, 8, 4, 4, 2, N, 91))
        rows.append(montecarlo.run_lemma3_montecarlo(3, 6, 3, 3, 2, N, 92))
        rows.append(montecarlo.run_lemma4_montecarlo(2, np.eye(8, dtype=np.int64), 4, 4, N, 93))
        rows.append(montecarlo.run_lemma5_montecarlo(2, 8, 4, N, 94))
    mc_ok = all(r.within_bound for r in rows)
    cross = all(r.notes.get("cross_check_mismatches", 0) == 0 for r in rows)
    qbinom_ok = all(
        q ** (k * (n - k)) <= gf.qbinom(n, k, q) <= 4 * q ** (k * (n - k))
        for q in (2, 3, 4, 5)
        for n in range(9)
        for k in range(n + 1)
    )
    lines = "; ".join(
        f"{r.experiment} N={r.trials} freq={r.frequency:.4f} bound={r.bound:.4f}" + (" (vacuous)" if r.notes.get("vacuous") else "")
        for r in rows
    )
    report("9 probabilistic bounds", mc_ok and cross and qbinom_ok, time.perf_counter() - t, 300, f"{lines}; q-binomial bounds {qbinom_ok}")


def test_criterion_10_subcollections(report):
    t = time.perf_counter()
    F3 = gf.field_create(3)
    rep2, rep3, even3 = repetition_code(F2, 2), REP3, parity_code(F2, 3)
    triples = [
        (rep2, rep2, rep2),
        (rep2, rep2, rep3),
        (rep2, rep2, even3),
        (rep2, rep3, rep3),
        (repetition_code(F3, 2),) * 3,
    ]
    worse = []
    for codes in triples:
        whole = expansion_factor(CodeCollection(codes)).rho
        for pair in itertools.combinations(codes, 2):
            if expansion_factor(CodeCollection(pair)).rho < whole:
                worse.append(codes)
    report("10 subcollection monotonicity", not worse, time.perf_counter() - t, 120, f"{len(triples)} triples, {len(worse)} violations")


def test_criterion_11_reproducibility(report):
    t = time.perf_counter()

    def run(seed):
        cfg = census.ExperimentConfig("repro", 2, 4, 2, 2, 12, seed)
        return census.run_expansion_census(cfg)

    a, b, c = run(2024), run(2024), run(2025)
    same = to_json(a.to_dict()) == to_json(b.to_dict())
    differs = a.trials != c.trials
    zero = a.violations == c.violations and not any(a.violations.values())
    detail = f"identical bytes {same}; different log {differs}; violation counts {a.violations} vs {c.violations}"
    report("11 census reproducibility", same and differs and zero, time.perf_counter() - t, 120, detail)


def test_criterion_11_json_is_parseable():
    doc = json.loads(to_json(census.run_expansion_census(census.ExperimentConfig("repro", 2, 3, 1, 1, 2, 1)).to_dict()))
    assert doc["schema"] and doc["summary"]["trials"] == 2
