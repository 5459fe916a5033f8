"""Constructive pieces used to bound the expansion of random code pairs.

All functions work with two codes ``C1, C2`` on an ``n1 x n2`` grid; rows are
indexed by ``[n1]`` (coordinates of ``C1``) and columns by ``[n2]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import gf
from ..codes import LinearCode, entropy_q_inv, information_set
from ..errors import CapExceeded, PreconditionError, TheoryViolation
from ..gf import Subspace
from ..product import CodeCollection, boxplus_basis, boxplus_membership, check_word


def _pair(coll: CodeCollection) -> tuple[LinearCode, LinearCode]:
    if coll.m != 2:
        raise PreconditionError("this operation needs exactly two codes")
    return coll[0], coll[1]


def _require_boxplus(x, coll):
    if not boxplus_membership(x, coll):
        raise PreconditionError("word is not in the boxplus code")


def _complement(S, n) -> list[int]:
    s = set(S)
    return [i for i in range(n) if i not in s]


def encode_on(C: LinearCode, I: list[int], values) -> np.ndarray:
    """The codeword of ``C`` agreeing with ``values`` on the information set ``I``."""
    F = C.field
    msg = gf.solve(F, C.generator[:, I].T, np.asarray(values, dtype=np.int64))
    if msg is None:
        raise TheoryViolation("values on an information set have no codeword")
    return F.matmul(msg, C.generator)


def zero_rectangle_decompose(x, A1, A2, coll: CodeCollection) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x`` into few columns of ``C1`` and few rows of ``C2``.

    Needs ``x(A1, A2) = 0`` and ``n_i - |A_i| < d(C_i)``.  Returns
    ``(delta1, delta2)``: ``delta1`` lives on the columns outside ``A2``,
    ``delta2`` on the rows outside ``A1``, and ``x = delta1 + delta2``.
    """
    C1, C2 = _pair(coll)
    F = coll.field
    x = check_word(x, coll)
    _require_boxplus(x, coll)
    A1, A2 = sorted(set(A1)), sorted(set(A2))
    n1, n2 = coll.shape
    if np.any(x[np.ix_(A1, A2)]):
        raise PreconditionError("x does not vanish on A1 x A2")
    if n1 - len(A1) >= C1.d or n2 - len(A2) >= C2.d:
        raise PreconditionError("rectangle complements must be smaller than the code distances")
    I1 = information_set(C1, A1)
    I2 = information_set(C2, A2)
    if I1 is None or I2 is None:
        raise TheoryViolation("large sets must contain information sets")
    out_cols, out_rows = _complement(A2, n2), _complement(A1, n1)
    d1 = np.zeros_like(x)
    d2 = np.zeros_like(x)
    for j in out_cols:
        d1[:, j] = encode_on(C1, I1, x[I1, j])
    for i in out_rows:
        d2[i, :] = encode_on(C2, I2, x[i, I2])
    if not np.array_equal(F.add(d1, d2), x):
        raise TheoryViolation("zero-rectangle decomposition does not reconstruct x")
    return d1, d2


def find_zero_rectangle(x, coll: CodeCollection, alpha1, alpha2) -> tuple[list[int], list[int]] | None:
    """Light rows and light columns, returned when they form a zero rectangle.

    ``A`` collects rows of weight at most ``alpha2 * n2 / 2`` and ``B``
    columns of weight at most ``alpha1 * n1 / 2``.  The pair is returned only
    if ``x(A, B) = 0`` and the complements are smaller than the distances of
    ``C1`` and ``C2`` respectively, so that it can feed
    :func:`zero_rectangle_decompose`.
    """
    C1, C2 = _pair(coll)
    x = check_word(x, coll)
    n1, n2 = coll.shape
    alpha1, alpha2 = Fraction(alpha1), Fraction(alpha2)
    row_t, col_t = alpha2 * n2 / 2, alpha1 * n1 / 2
    rows = np.count_nonzero(x, axis=1)
    cols = np.count_nonzero(x, axis=0)
    A = [i for i in range(n1) if rows[i] <= row_t]
    B = [j for j in range(n2) if cols[j] <= col_t]
    w = int(np.count_nonzero(x))
    # Markov: fewer than |x| / t lines can be heavier than t
    if (row_t > 0 and len(A) < n1 - w / row_t) or (col_t > 0 and len(B) < n2 - w / col_t):
        raise TheoryViolation("light-line counting bound fails")
    if np.any(x[np.ix_(A, B)]):
        return None
    if len(A) <= n1 - C1.d or len(B) <= n2 - C2.d:
        return None
    return A, B


def _section(C: LinearCode, A: list[int]) -> np.ndarray:
    """Matrix ``M`` (``|A| x n``) with ``v -> v M`` a section of restriction to ``A``.

    Codewords restricted to ``A`` lift to codewords; the remaining unit
    vectors (at non-pivot positions, lowest first) lift to unit vectors.
    """
    F, n = C.field, C.n
    a = len(A)
    if C.k:
        R, r, pivots = gf.rref(F, np.hstack([C.generator[:, A], C.generator]))
        r = sum(1 for p in pivots if p < a)
        basis, lifts = R[:r, :a], R[:r, a:]
        pivots = pivots[:r]
    else:
        basis, lifts, pivots = np.zeros((0, a), np.int64), np.zeros((0, n), np.int64), []
    extra = [t for t in range(a) if t not in set(pivots)]
    E = np.zeros((len(extra), a), dtype=np.int64)
    El = np.zeros((len(extra), n), dtype=np.int64)
    for row, t in enumerate(extra):
        E[row, t] = 1
        El[row, A[t]] = 1
    full = np.vstack([basis, E])
    return F.matmul(gf.inverse(F, full), np.vstack([lifts, El]))


def extend_codeword_part(x, A1, A2, coll: CodeCollection) -> np.ndarray:
    """Extend ``x(A1, A2)`` to a boxplus word on the whole grid.

    The result agrees with ``x`` on ``A1 x A2`` and has the same rank as
    ``x(A1, A2)``.
    """
    _pair(coll)
    F = coll.field
    x = check_word(x, coll)
    _require_boxplus(x, coll)
    A1, A2 = sorted(set(A1)), sorted(set(A2))
    y = x[np.ix_(A1, A2)]
    M1 = _section(coll[0], A1)
    M2 = _section(coll[1], A2)
    out = F.matmul(F.matmul(M1.T, y), M2)
    if not np.array_equal(out[np.ix_(A1, A2)], y):
        raise TheoryViolation("extension does not agree on A1 x A2")
    if gf.rank(F, out) != gf.rank(F, y):
        raise TheoryViolation("extension changed the rank")
    if not boxplus_membership(out, coll):
        raise TheoryViolation("extension left the boxplus code")
    return out


@dataclass(frozen=True)
class RankBound:
    rank: int
    column_meet: int  # dim(X ∩ C1), X the column space
    row_meet: int  # dim(Y ∩ C2), Y the row space
    holds: bool


def rank_bound_check(x, coll: CodeCollection) -> RankBound:
    """Compare ``rk x`` with ``dim(X ∩ C1) + dim(Y ∩ C2)``."""
    C1, C2 = _pair(coll)
    F = coll.field
    x = check_word(x, coll)
    _require_boxplus(x, coll)
    X = gf.image(F, x, coll.shape[0])
    Y = gf.row_space(F, x, coll.shape[1])
    r = X.k
    a = gf.subspace_intersection(X, C1.space).k
    b = gf.subspace_intersection(Y, C2.space).k
    return RankBound(r, a, b, r <= a + b)


def tensor_space(X: Subspace, Y: Subspace) -> Subspace:
    F = X.field
    return gf.row_space(F, gf.kron_rows(F, X.basis, Y.basis), X.n * Y.n)


def intersection_identity_check(X: Subspace, Y: Subspace, coll: CodeCollection) -> bool:
    """Check ``(X⊗Y) ∩ (C1⊞C2) == (X∩C1)⊗Y + X⊗(Y∩C2)`` as subspaces."""
    C1, C2 = _pair(coll)
    if X.n != C1.n or Y.n != C2.n:
        raise PreconditionError("subspace ambient dimensions must match the code lengths")
    left = gf.subspace_intersection(tensor_space(X, Y), boxplus_basis(coll))
    right = gf.subspace_sum(
        tensor_space(gf.subspace_intersection(X, C1.space), Y),
        tensor_space(X, gf.subspace_intersection(Y, C2.space)),
    )
    return left == right


# -- property (*) -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StarWitness:
    """A sparse subspace meeting ``U`` in at least half its dimension."""

    dim: int
    basis: np.ndarray
    intersection_dim: int


def sparseness_threshold(q: int, n: int, r: int) -> float:
    """``H_q^{-1}(r / 8n)``."""
    return entropy_q_inv(q, r / (8 * n))


def sparse_vectors(field, n: int, max_weight: int) -> np.ndarray:
    """Nonzero vectors of weight at most ``max_weight`` whose leading entry is 1."""
    out = []
    for w in range(1, max_weight + 1):
        for supp in itertools.combinations(range(n), w):
            tail = gf.all_vectors(field.q - 1, w - 1) + 1 if w > 1 else np.zeros((1, 0), np.int64)
            v = np.zeros((len(tail), n), dtype=np.int64)
            v[:, supp[0]] = 1
            if w > 1:
                v[:, list(supp[1:])] = tail
            out.append(v)
    return np.vstack(out) if out else np.zeros((0, n), dtype=np.int64)


def has_property_star(U: Subspace, r: int, alpha=None, cap: int = 200_000) -> bool | StarWitness:
    """Search subspaces spanned by at most ``r`` sparse vectors for one that
    meets ``U`` in at least half its dimension.

    Vectors are sparse when their weight is at most ``floor(alpha * n)``;
    ``alpha`` defaults to ``H_q^{-1}(r / 8n)``.  Candidate spans are
    deduplicated by their canonical basis and explored in order of
    dimension.  Returns True when no witness exists.
    """
    F, n = U.field, U.n
    if alpha is None:
        alpha = sparseness_threshold(F.q, n, r)
    w = math.floor(alpha * n)
    vecs = sparse_vectors(F, n, w)
    if len(vecs) == 0 or r < 1:
        return True
    layer = {}
    for v in vecs:
        V = gf.row_space(F, v[None, :], n)
        layer.setdefault(V, None)
    seen = 0
    for dim in range(1, r + 1):
        for V in layer:
            seen += 1
            if seen > cap:
                raise CapExceeded(f"more than {cap} sparse subspaces to examine")
            meet = U.k + V.k - gf.subspace_sum(U, V).k
            if 2 * meet >= V.k:
                return StarWitness(V.k, V.basis, meet)
        if dim == r:
            break
        nxt = {}
        for V in layer:
            for v in vecs:
                if not V.contains(v):
                    W = gf.row_space(F, np.vstack([V.basis, v]), n)
                    nxt.setdefault(W, None)
                    if len(nxt) > cap:
                        raise CapExceeded(f"more than {cap} sparse subspaces to examine")
        layer = nxt
    return True
