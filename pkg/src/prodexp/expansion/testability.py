"""Testability constants of product codes and their relation to expansion."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .. import gf
from ..codes import LinearCode, entropy_q_inv, information_set
from ..errors import CapExceeded, PreconditionError, TheoryViolation
from ..product import (
    CodeCollection,
    boxplus_basis,
    boxplus_membership,
    check_word,
    nearest_codewords_many,
    tensor_basis,
)
from .core import ENUM_CAP, ExpansionReport, expansion_factor, min_cost_decomposition
from .structure import _pair, encode_on


def agreement_test_constant(coll: CodeCollection, method: str = "reduction", cap: int = ENUM_CAP) -> Fraction:
    """Largest rho with ``rho (||c1 - c||_1 + ||c2 - c||_2) <= ||c1 - c2||``.

    Here ``c1`` ranges over ``C1 ⊗ F^n2``, ``c2`` over ``F^n1 ⊗ C2`` and the
    inequality must hold for some ``c`` in ``C1 ⊗ C2``.  With
    ``method="reduction"`` the difference ``c1 - c2`` is treated as a boxplus
    word and the constant is the expansion factor.  ``method="direct"``
    enumerates message pairs and product codewords without that reduction.
    """
    C1, C2 = _pair(coll)
    if method == "reduction":
        return expansion_factor(coll, cap).rho
    if method != "direct":
        raise PreconditionError(f"unknown method {method!r}")
    F = coll.field
    (n1, n2), (k1, k2) = coll.shape, coll.dims
    d1, d2, dk = k1 * n2, n1 * k2, k1 * k2
    if F.q ** (d1 + d2) > cap or F.q ** (d1 + d2 + dk) > cap * 64:
        raise CapExceeded("direct agreement enumeration exceeds the cap")
    G1, G2 = C1.generator, C2.generator
    # Message matrices: c1 = G1^T M1 (M1 is k1 x n2), c2 = M2 G2 (M2 is n1 x k2),
    # c = G1^T K G2.  Then c1 - c = G1^T (M1 - K G2) and c2 - c = (M2 - G1^T K) G2,
    # so c1 - c has a nonzero column exactly where M1 - K G2 does.
    enc1 = _linear_map(F, d1, lambda M: F.matmul(G1.T, M.reshape(k1, n2)))
    enc2 = _linear_map(F, d2, lambda M: F.matmul(M.reshape(n1, k2), G2))
    k_to_1 = _linear_map(F, dk, lambda K: F.matmul(K.reshape(k1, k2), G2))
    k_to_2 = _linear_map(F, dk, lambda K: F.matmul(G1.T, K.reshape(k1, k2)))
    Ks = gf.all_vectors(F.q, dk)
    M1s = gf.all_vectors(F.q, d1)
    M2s = gf.all_vectors(F.q, d2)
    c1s = F.matmul(M1s, enc1)
    c2s = F.matmul(M2s, enc2)
    KG2 = F.matmul(Ks, k_to_1)
    G1K = F.matmul(Ks, k_to_2)
    col_cost = np.zeros((len(M1s), len(Ks)), dtype=np.int64)
    row_cost = np.zeros((len(M2s), len(Ks)), dtype=np.int64)
    for t in range(len(Ks)):
        diff1 = F.sub(M1s, KG2[t][None, :]).reshape(len(M1s), k1, n2)
        col_cost[:, t] = n1 * np.count_nonzero(np.any(diff1 != 0, axis=1), axis=1)
        diff2 = F.sub(M2s, G1K[t][None, :]).reshape(len(M2s), n1, k2)
        row_cost[:, t] = n2 * np.count_nonzero(np.any(diff2 != 0, axis=2), axis=1)
    best = None
    for a in range(len(M1s)):
        w = np.count_nonzero(F.sub(c1s[a][None, :], c2s), axis=1)
        cost = (col_cost[a][None, :] + row_cost).min(axis=1)
        mask = w > 0
        if not np.any(mask):
            continue
        pairs = set(zip(w[mask].tolist(), cost[mask].tolist()))
        cand = min(Fraction(p, c) for p, c in pairs)
        if best is None or cand < best:
            best = cand
    return Fraction(1) if best is None else best


def _linear_map(F, dim: int, fn) -> np.ndarray:
    """Matrix (rows = images of unit vectors) of a linear map on F^dim."""
    if dim == 0:
        probe = fn(np.zeros(0, dtype=np.int64))
        return np.zeros((0, probe.size), dtype=np.int64)
    return np.stack([np.asarray(fn(e)).reshape(-1) for e in np.eye(dim, dtype=np.int64)])


def _distance_table(C: LinearCode) -> np.ndarray:
    """``d(v, C)`` for every ``v`` in F^n, indexed lexicographically."""
    _, dist = nearest_codewords_many(gf.all_vectors(C.field.q, C.n), C)
    return dist


def _lex_index(rows: np.ndarray, q: int) -> np.ndarray:
    powers = q ** np.arange(rows.shape[-1] - 1, -1, -1, dtype=np.int64)
    return rows @ powers


def robustness_constant(coll: CodeCollection, cap: int = 1 << 20) -> Fraction | None:
    """Largest rho with ``rho * delta(x, C1⊗C2) <= (delta(x, C^(1)) + delta(x, C^(2))) / 2``.

    Exhaustive over all words off the product code; None if there are none.
    """
    C1, C2 = _pair(coll)
    F = coll.field
    n1, n2 = coll.shape
    N = n1 * n2
    if F.q**N > cap:
        raise CapExceeded(f"{F.q}^{N} words exceed cap {cap}")
    T = tensor_basis(coll)
    if T.k == N:
        return None
    product_words = gf.span_elements(T)
    t1, t2 = _distance_table(C1), _distance_table(C2)
    best = None
    total = F.q**N
    step = max(1, (1 << 22) // max(1, len(product_words) * N))
    for s in range(0, total, step):
        X = gf.vectors_range(F.q, N, s, min(total, s + step))
        grids = X.reshape(-1, n1, n2)
        cols = _lex_index(np.swapaxes(grids, 1, 2), F.q)  # (B, n2) column indices
        rows = _lex_index(grids, F.q)
        axis_sum = t1[cols].sum(axis=1) + t2[rows].sum(axis=1)
        d_prod = np.count_nonzero(X[:, None, :] != product_words[None, :, :], axis=2).min(axis=1)
        mask = d_prod > 0
        if not np.any(mask):
            continue
        pairs = set(zip(axis_sum[mask].tolist(), d_prod[mask].tolist()))
        cand = min(Fraction(a, 2 * d) for a, d in pairs)
        if best is None or cand < best:
            best = cand
    return best


def dinur_conversion(rho_prime) -> Fraction:
    """``rho' / (2 (rho' + 1))``: robustness implied by rho'-agreement testability."""
    rho_prime = Fraction(rho_prime)
    if rho_prime < 0:
        raise PreconditionError("rho' must be nonnegative")
    return rho_prime / (2 * (rho_prime + 1))


def is_delta_minimal(x, delta, coll: CodeCollection) -> bool:
    """No row or column is more than ``delta`` heavier than its distance to its code."""
    C1, C2 = _pair(coll)
    x = check_word(x, coll)
    delta = Fraction(delta)
    _, drow = nearest_codewords_many(x, C2)
    _, dcol = nearest_codewords_many(x.T, C1)
    rows_ok = all(w <= d + delta for w, d in zip(np.count_nonzero(x, axis=1), drow))
    cols_ok = all(w <= d + delta for w, d in zip(np.count_nonzero(x, axis=0), dcol))
    return rows_ok and cols_ok


def smb_parameters(rho, n: int) -> tuple[Fraction, Fraction, Fraction]:
    """``(rho^2 n^2 / 3, rho^2 n / 6, rho / 3)``."""
    rho = Fraction(rho)
    return rho**2 * n**2 / 3, rho**2 * n / 6, rho / 3


def smb_lower_bound(s, beta, n: int) -> Fraction:
    """``min(s / 2n^2, beta)``: expansion implied by an (s, m, beta) check."""
    return min(Fraction(s) / (2 * n * n), Fraction(beta))


@dataclass(frozen=True, eq=False)
class SmbResult:
    holds: bool
    word: np.ndarray | None = None
    rows: tuple[int, ...] | None = None
    cols: tuple[int, ...] | None = None
    weight: int | None = None
    checked: int = 0


def min_rectangle_weight(words: np.ndarray, deletions: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum ``|x(A, B)|`` over ``|A|, |B| >= n - deletions``, for a stack of square words.

    Deleting more lines never increases the weight, so exactly
    ``min(deletions, n)`` rows and columns are removed.  For each choice of
    rows the heaviest remaining columns are removed, which is optimal for
    that choice; all row choices are tried.  Returns the minima together
    with the kept rows and columns (as boolean masks) of one minimizer.
    """
    W, n, _ = words.shape
    t = min(deletions, n)
    nz = (words != 0).astype(np.int64)
    best = np.full(W, np.iinfo(np.int64).max, dtype=np.int64)
    keep_r = np.ones((W, n), dtype=bool)
    keep_c = np.ones((W, n), dtype=bool)
    for gone in itertools.combinations(range(n), t):
        rmask = np.ones(n, dtype=bool)
        rmask[list(gone)] = False
        colw = nz[:, rmask, :].sum(axis=1)
        order = np.argsort(-colw, axis=1, kind="stable")
        cmask = np.ones((W, n), dtype=bool)
        np.put_along_axis(cmask, order[:, :t], False, axis=1)
        val = (colw * cmask).sum(axis=1)
        better = val < best
        best[better] = val[better]
        keep_r[better] = rmask
        keep_c[better] = cmask[better]
    return best, keep_r, keep_c


def smb_expansion_check(coll: CodeCollection, s, m, beta, cap: int = 1 << 20) -> SmbResult:
    """Check ``|x(A, B)| >= s`` for every nonzero (beta n)-minimal boxplus word
    ``x`` and all ``A, B`` with ``|A|, |B| >= n - m``."""
    _pair(coll)
    n1, n2 = coll.shape
    if n1 != n2:
        raise PreconditionError("the (s, m, beta) check needs equal lengths")
    n = n1
    F = coll.field
    s, m, beta = Fraction(s), Fraction(m), Fraction(beta)
    box = boxplus_basis(coll)
    if F.q**box.k > cap:
        raise CapExceeded(f"{F.q}^{box.k} boxplus words exceed cap {cap}")
    words = gf.span_elements(box, cap)[1:].reshape(-1, n, n)
    if s <= 0 or len(words) == 0:
        return SmbResult(True, checked=len(words))
    delta = beta * n
    _, drow = nearest_codewords_many(words.reshape(-1, n), coll[1])
    _, dcol = nearest_codewords_many(np.swapaxes(words, 1, 2).reshape(-1, n), coll[0])
    rw = np.count_nonzero(words, axis=2).reshape(-1)
    cw = np.count_nonzero(words, axis=1).reshape(-1)
    # exact rational comparison: w - d <= delta  <=>  (w - d) * den <= num
    ok_rows = ((rw - drow) * delta.denominator <= delta.numerator).reshape(-1, n).all(axis=1)
    ok_cols = ((cw - dcol) * delta.denominator <= delta.numerator).reshape(-1, n).all(axis=1)
    minimal = words[ok_rows & ok_cols]
    if len(minimal) == 0:
        return SmbResult(True, checked=0)
    weights, kr, kc = min_rectangle_weight(minimal, math.floor(m) if m >= 0 else 0)
    bad = np.flatnonzero(weights < s)
    if bad.size:
        b = int(bad[0])
        return SmbResult(
            False,
            minimal[b],
            tuple(np.flatnonzero(kr[b]).tolist()),
            tuple(np.flatnonzero(kc[b]).tolist()),
            int(weights[b]),
            len(minimal),
        )
    return SmbResult(True, checked=len(minimal))


def line_cover_number(x) -> int:
    """Fewest rows and columns covering the support of ``x`` (a maximum matching)."""
    support = (np.asarray(x) != 0).astype(np.int64)
    if not support.any():
        return 0
    rows, cols = linear_sum_assignment(support, maximize=True)
    return int(support[rows, cols].sum())


def cover_upper_bound(x, coll: CodeCollection) -> Fraction:
    """A certified upper bound on rho from one nonzero boxplus word.

    Any decomposition covers the support of ``x`` with its nonzero columns
    and rows, so ``sum_i n_i |a_i|_i >= min(n1, n2) * tau(x)``.
    """
    x = check_word(x, coll)
    if not boxplus_membership(x, coll):
        raise PreconditionError("word is not in the boxplus code")
    tau = line_cover_number(x)
    if tau == 0:
        raise PreconditionError("the zero word certifies nothing")
    return Fraction(int(np.count_nonzero(x)), min(coll.shape) * tau)


@dataclass(frozen=True, eq=False)
class WitnessResult:
    word: np.ndarray
    weight: int
    bound: Fraction  # certified: rho <= bound
    exact_cost: bool  # True if bound used the exact minimum decomposition cost
    rate_bound: Fraction  # eps1 * eps2 + 1/n


def upper_bound_witness(coll: CodeCollection, cap: int = ENUM_CAP) -> WitnessResult:
    """Build a light boxplus word that no cheap decomposition can produce.

    A diagonal of ones is placed on ``A1 x A2'`` where ``A1`` is an
    information set of the higher-rate code; its columns are encoded, and
    then the rows outside ``A1`` are cleared on an information set ``A2`` of
    the other code by subtracting encoded rows.  The resulting word has at
    most ``eps1 eps2 n^2 + n`` nonzero entries.
    """
    C1, C2 = _pair(coll)
    n1, n2 = coll.shape
    if n1 != n2:
        raise PreconditionError("the witness construction needs equal lengths")
    n = n1
    if C1.k == 0 or C2.k == 0:
        raise PreconditionError("both codes need an information set")
    swapped = C1.k < C2.k
    if swapped:
        C1, C2 = C2, C1
    F = coll.field
    A1 = information_set(C1, range(n))
    A2 = information_set(C2, range(n))
    extra = [j for j in range(n) if j not in set(A2)][: len(A1) - len(A2)]
    A2p = sorted(A2 + extra)
    y = np.zeros((n, n), dtype=np.int64)
    for i, j in zip(A1, A2p):
        unit = np.zeros(len(A1), dtype=np.int64)
        unit[A1.index(i)] = 1
        y[:, j] = encode_on(C1, A1, unit)
    for i in (r for r in range(n) if r not in set(A1)):
        y[i, :] = F.sub(y[i, :], encode_on(C2, A2, y[i, A2]))
    if swapped:
        y = y.T.copy()
    eps = Fraction(n - coll[0].k, n) * Fraction(n - coll[1].k, n)
    w = int(np.count_nonzero(y))
    if not boxplus_membership(y, coll):
        raise TheoryViolation("witness is not in the boxplus code")
    if w > eps * n * n + n:
        raise TheoryViolation("witness is heavier than eps1 eps2 n^2 + n")
    prop = eps + Fraction(1, n)
    try:
        dec = min_cost_decomposition(y, coll, cap)
        bound, exact = Fraction(w, dec.unnormalized_cost), True
    except CapExceeded:
        bound, exact = cover_upper_bound(y, coll), False
    if exact and bound > prop:
        raise TheoryViolation("witness ratio exceeds eps1 eps2 + 1/n")
    return WitnessResult(y, w, bound, exact, prop)


def certified_upper_bound(coll: CodeCollection, cap: int = ENUM_CAP) -> Fraction:
    """Smallest certified bound on rho from the available witnesses."""
    bounds = []
    n1, n2 = coll.shape
    if n1 == n2 and min(coll.dims) > 0:
        bounds.append(upper_bound_witness(coll, cap).bound)
    eye = np.eye(n1, dtype=np.int64) if n1 == n2 else None
    if eye is not None and boxplus_membership(eye, coll):
        try:
            dec = min_cost_decomposition(eye, coll, cap)
            bounds.append(Fraction(n1, dec.unnormalized_cost))
        except CapExceeded:
            bounds.append(cover_upper_bound(eye, coll))
    return min(bounds) if bounds else Fraction(1)


def rho_formula_value(q: int, n: int, k1: int, k2: int) -> float:
    """``(1/2) min(alpha1 alpha2 / 4, H_q^{-1}(eps1 eps2 / 8))`` with ``alpha_i = H_q^{-1}(eps_i / 8)``."""
    e1, e2 = 1 - k1 / n, 1 - k2 / n
    a1, a2 = entropy_q_inv(q, e1 / 8), entropy_q_inv(q, e2 / 8)
    return 0.5 * min(a1 * a2 / 4, entropy_q_inv(q, e1 * e2 / 8))


def verify_report(report: ExpansionReport, coll: CodeCollection) -> None:
    """Recheck an exact report's argmin against its decomposition."""
    if report.argmin is None:
        return
    dec = min_cost_decomposition(report.argmin, coll)
    if Fraction(int(np.count_nonzero(report.argmin)), dec.unnormalized_cost) != report.rho:
        raise TheoryViolation("report ratio does not match its argmin")
