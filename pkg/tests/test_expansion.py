import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodexp import gf
from prodexp.codes import full_code, parity_code, random_code, reed_solomon, repetition_code, zero_code
from prodexp.errors import CapExceeded, PreconditionError, TheoryViolation
from prodexp.expansion.core import (
    Decomposition,
    expansion_factor,
    greedy_decomposition,
    min_cost_decomposition,
)
from prodexp.expansion.structure import (
    extend_codeword_part,
    find_zero_rectangle,
    has_property_star,
    intersection_identity_check,
    rank_bound_check,
    zero_rectangle_decompose,
)
from prodexp.expansion.testability import (
    agreement_test_constant,
    certified_upper_bound,
    dinur_conversion,
    line_cover_number,
    min_rectangle_weight,
    robustness_constant,
    smb_expansion_check,
    smb_parameters,
    upper_bound_witness,
    verify_report,
)
from prodexp.harness.reports import word_str
from prodexp.product import CodeCollection, axis_code_basis, boxplus_basis, boxplus_membership

F2 = gf.field_create(2)
REP3 = repetition_code(F2, 3)
RR = CodeCollection.of(REP3, REP3)


def _line_counts(words, shape, axis):
    """Nonzero lines along ``axis`` for each flattened word."""
    grids = words.reshape((-1,) + tuple(shape))
    return np.count_nonzero(np.any(grids != 0, axis=axis + 1).reshape(len(words), -1), axis=1)


def brute_rho(coll):
    """Minimum ratio found by listing every tuple of axis-code words."""
    F, shape = coll.field, coll.shape
    spans = [gf.span_elements(axis_code_basis(coll, i)) for i in range(coll.m)]
    words, costs = np.zeros((1, coll.cells), dtype=np.int64), np.zeros(1, dtype=np.int64)
    for i, S in enumerate(spans):
        c = shape[i] * _line_counts(S, shape, i)
        words = F.add(words[:, None, :], S[None, :, :]).reshape(-1, coll.cells)
        costs = (costs[:, None] + c[None, :]).reshape(-1)
    keys = words @ (coll.field.q ** np.arange(coll.cells, dtype=np.int64))
    order = np.argsort(keys, kind="stable")
    keys, costs, words = keys[order], costs[order], words[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    best_cost = np.minimum.reduceat(costs, starts)
    weights = np.count_nonzero(words[starts], axis=1)
    mask = weights > 0
    if not mask.any():
        return Fraction(1)
    return min(Fraction(int(w), int(c)) for w, c in zip(weights[mask], best_cost[mask]))


def brute_min_cost(x, coll):
    F, shape = coll.field, coll.shape
    spans = [gf.span_elements(axis_code_basis(coll, i)) for i in range(coll.m)]
    A, B = spans
    total = F.add(A[:, None, :], B[None, :, :])
    hit = np.all(total == x.reshape(-1), axis=2)
    ca = shape[0] * _line_counts(A, shape, 0)
    cb = shape[1] * _line_counts(B, shape, 1)
    return int((ca[:, None] + cb[None, :])[hit].min())


def test_rep3_pair_value_and_argmin():
    rep = expansion_factor(RR)
    assert rep.rho == Fraction(5, 9) == brute_rho(RR)
    assert word_str(rep.argmin, 2) == "3x3:001110110"
    assert rep.decomposition.cost == 1
    verify_report(rep, RR)
    assert rep.to_dict()["rho"] == "5/9"


def test_small_known_values():
    assert expansion_factor(CodeCollection.of(REP3, parity_code(F2, 3))).rho == Fraction(1, 3)
    assert expansion_factor(CodeCollection.of(REP3, full_code(F2, 3))).rho == Fraction(1, 3)
    rep2 = repetition_code(F2, 2)
    assert expansion_factor(CodeCollection.of(rep2, rep2, rep2)).rho == Fraction(1, 3)
    empty = CodeCollection.of(zero_code(F2, 3), zero_code(F2, 3))
    assert expansion_factor(empty).rho == 1 and expansion_factor(empty).argmin is None


@pytest.mark.parametrize("q,n1,n2", [(2, 3, 3), (2, 3, 4), (3, 2, 3), (4, 2, 2), (2, 4, 4)])
def test_exact_matches_brute_force(q, n1, n2):
    F = gf.field_of_order(q)
    rng = np.random.default_rng(q * 31 + n1 * 7 + n2)
    for _ in range(8):
        C1 = random_code(F, n1, int(rng.integers(0, n1)), rng)
        C2 = random_code(F, n2, int(rng.integers(0, n2)), rng)
        coll = CodeCollection.of(C1, C2)
        if q ** (n1 * C2.k + C1.k * n2) > 1 << 18:
            continue
        assert expansion_factor(coll).rho == brute_rho(coll)


def test_three_code_collections_match_brute_force():
    F3 = gf.field_create(3)
    rep2 = repetition_code(F2, 2)
    cases = [
        CodeCollection.of(rep2, rep2, repetition_code(F2, 3)),
        CodeCollection.of(rep2, repetition_code(F2, 3), REP3),
        CodeCollection.of(repetition_code(F3, 2), repetition_code(F3, 2), repetition_code(F3, 2)),
    ]
    for coll in cases:
        assert expansion_factor(coll).rho == brute_rho(coll)


def test_min_cost_decomposition_matches_brute_force():
    rng = np.random.default_rng(12)
    for _ in range(10):
        coll = CodeCollection.of(random_code(F2, 3, 1, rng), random_code(F2, 4, 2, rng))
        box = boxplus_basis(coll)
        for _ in range(10):
            x = F2.matmul(rng.integers(0, 2, box.k), box.basis).reshape(coll.shape)
            dec = min_cost_decomposition(x, coll)
            assert np.array_equal(dec.word, x)
            assert dec.unnormalized_cost == brute_min_cost(x, coll)


def test_decomposition_rejects_bad_input():
    with pytest.raises(PreconditionError):
        min_cost_decomposition(np.diag([1, 0, 0]), RR)
    with pytest.raises(TheoryViolation):
        Decomposition(RR, (np.diag([1, 0, 0]), np.zeros((3, 3), dtype=np.int64)))


def test_caps_are_enforced():
    big = CodeCollection.of(reed_solomon(5, 2), reed_solomon(5, 3))
    with pytest.raises(CapExceeded):
        expansion_factor(big, cap=1 << 10)
    with pytest.raises(CapExceeded):
        expansion_factor(RR, cap_cells=4)


def test_greedy_is_never_cheaper_than_exact():
    rng = np.random.default_rng(21)
    for _ in range(20):
        coll = CodeCollection.of(random_code(F2, 4, 2, rng), random_code(F2, 4, 2, rng))
        box = boxplus_basis(coll)
        for _ in range(10):
            x = F2.matmul(rng.integers(0, 2, box.k), box.basis).reshape(4, 4)
            g = greedy_decomposition(x, coll)
            if g is not None:
                assert np.array_equal(g.word, x)
                assert g.unnormalized_cost >= min_cost_decomposition(x, coll).unnormalized_cost


def test_agreement_constant_methods_agree():
    assert agreement_test_constant(RR) == Fraction(5, 9)
    assert agreement_test_constant(RR, "direct") == Fraction(5, 9)
    rep2 = repetition_code(F2, 2)
    pair = CodeCollection.of(rep2, REP3)
    assert agreement_test_constant(pair, "direct") == agreement_test_constant(pair)


def test_robustness_constant():
    value = robustness_constant(RR)
    assert value == Fraction(1, 2)
    rho = expansion_factor(RR).rho
    assert value >= dinur_conversion(rho)
    assert robustness_constant(CodeCollection.of(full_code(F2, 2), full_code(F2, 2))) is None


def test_upper_bound_witness_and_certificate():
    w = upper_bound_witness(RR)
    assert w.exact_cost and w.bound == Fraction(5, 9) <= w.rate_bound == Fraction(7, 9)
    assert boxplus_membership(w.word, RR)
    rng = np.random.default_rng(2)
    for _ in range(20):
        coll = CodeCollection.of(random_code(F2, 4, 2, rng), random_code(F2, 4, 2, rng))
        assert expansion_factor(coll).rho <= certified_upper_bound(coll)


def test_line_cover_number_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = (rng.random((4, 4)) < 0.3).astype(np.int64)
        best = 8
        for rs in itertools.product([0, 1], repeat=4):
            rows = [i for i in range(4) if rs[i]]
            rest = x.copy()
            rest[rows, :] = 0
            best = min(best, len(rows) + int(np.count_nonzero(rest.any(axis=0))))
        assert line_cover_number(x) == best


def test_smb_check_on_rep3():
    rho = expansion_factor(RR).rho
    s, m, beta = smb_parameters(rho, 3)
    assert smb_expansion_check(RR, s, m, beta).holds


# -- building blocks ------------------------------------------------------------


def _boxplus_word(coll, rng):
    box = boxplus_basis(coll)
    return coll.field.matmul(rng.integers(0, coll.field.q, box.k), box.basis).reshape(coll.shape)


def test_planted_zero_rectangles_decompose():
    rng = np.random.default_rng(30)
    C1, C2 = reed_solomon(7, 3), reed_solomon(7, 3)
    coll = CodeCollection.of(C1, C2)
    F = coll.field
    done = 0
    while done < 200:
        n1, n2 = coll.shape
        # x = column words outside A2 plus row words outside A1, so x(A1, A2) = 0
        out1 = sorted(rng.choice(n1, size=int(rng.integers(0, C1.d)), replace=False).tolist())
        out2 = sorted(rng.choice(n2, size=int(rng.integers(0, C2.d)), replace=False).tolist())
        x = np.zeros((n1, n2), dtype=np.int64)
        for j in out2:
            x[:, j] = F.matmul(rng.integers(0, 7, C1.k), C1.generator)
        for i in out1:
            x[i, :] = F.add(x[i, :], F.matmul(rng.integers(0, 7, C2.k), C2.generator))
        A1 = [i for i in range(n1) if i not in out1]
        A2 = [j for j in range(n2) if j not in out2]
        x[np.ix_(A1, A2)] = 0
        if not boxplus_membership(x, coll):
            continue
        d1, d2 = zero_rectangle_decompose(x, A1, A2, coll)
        assert np.array_equal(F.add(d1, d2), x)
        assert not d1[:, A2].any() and not d2[A1, :].any()
        done += 1


def test_find_zero_rectangle_on_sparse_word():
    coll = CodeCollection.of(reed_solomon(7, 2), reed_solomon(7, 2))
    x = np.zeros((7, 7), dtype=np.int64)
    x[0, :] = coll[1].generator[0]
    found = find_zero_rectangle(x, coll, Fraction(1, 2), Fraction(1, 2))
    assert found is not None
    A, B = found
    assert 0 not in A and not x[np.ix_(A, B)].any()


def test_extended_codeword_parts():
    rng = np.random.default_rng(40)
    for _ in range(200):
        coll = CodeCollection.of(random_code(F2, 4, 2, rng), random_code(F2, 4, 2, rng))
        x = _boxplus_word(coll, rng)
        A1 = sorted(rng.choice(4, size=int(rng.integers(1, 5)), replace=False).tolist())
        A2 = sorted(rng.choice(4, size=int(rng.integers(1, 5)), replace=False).tolist())
        y = extend_codeword_part(x, A1, A2, coll)
        assert np.array_equal(y[np.ix_(A1, A2)], x[np.ix_(A1, A2)])
        assert gf.rank(F2, y) == gf.rank(F2, x[np.ix_(A1, A2)])


def test_intersection_identity_random():
    rng = np.random.default_rng(50)
    for t in range(100):
        q = (2, 3)[t % 2]
        F = gf.field_of_order(q)
        coll = CodeCollection.of(random_code(F, 3, int(rng.integers(0, 4)), rng), random_code(F, 3, int(rng.integers(0, 4)), rng))
        X = gf.random_subspace(F, 3, int(rng.integers(0, 4)), rng)
        Y = gf.random_subspace(F, 3, int(rng.integers(0, 4)), rng)
        assert intersection_identity_check(X, Y, coll)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_rank_bound_holds(seed):
    rng = np.random.default_rng(seed)
    coll = CodeCollection.of(random_code(F2, 4, int(rng.integers(0, 5)), rng), random_code(F2, 4, int(rng.integers(0, 5)), rng))
    assert rank_bound_check(_boxplus_word(coll, rng), coll).holds


def test_property_star():
    F = F2
    # the span of e1 meets <e1> fully, so a sparse witness exists
    U = gf.row_space(F, [[1, 0, 0, 0]], 4)
    w = has_property_star(U, 1, alpha=Fraction(1, 4))
    assert w is not True and w.intersection_dim == 1
    # the all-ones line meets no weight-1 line
    ones = gf.row_space(F, [[1, 1, 1, 1]], 4)
    assert has_property_star(ones, 1, alpha=Fraction(1, 4)) is True


def test_greedy_matches_exact_on_rep3_argmin():
    rep = expansion_factor(RR)
    g = greedy_decomposition(rep.argmin, RR)
    assert g is not None and g.cost == rep.decomposition.cost == 1


def test_min_rectangle_weight_matches_full_subset_search():
    rng = np.random.default_rng(70)
    words = (rng.random((60, 4, 4)) < 0.5).astype(np.int64)
    for t in range(4):
        got, kr, kc = min_rectangle_weight(words, t)
        for w, g, r, c in zip(words, got, kr, kc):
            full = min(
                int(np.count_nonzero(w[np.ix_(A, B)]))
                for a in range(4 - t, 5)
                for b in range(4 - t, 5)
                for A in itertools.combinations(range(4), a)
                for B in itertools.combinations(range(4), b)
            )
            assert g == full
            assert int(np.count_nonzero(w[np.ix_(np.flatnonzero(r), np.flatnonzero(c))])) == g
