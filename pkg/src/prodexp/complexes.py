"""Based cochain complexes, their tensor products and Cheeger constants.

A term of a complex is a direct sum of labeled blocks; a cochain's block
weight is its number of nonzero blocks, and its norm divides that by the
number of blocks in the term.  Coboundary matrices act on column vectors:
``delta[j]`` has shape ``(dim C^{j+1}, dim C^j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf
from .errors import CapExceeded, PreconditionError, TheoryViolation
from .expansion.core import ENUM_CAP, expansion_factor, min_over_cosets
from .product import CodeCollection


@dataclass(frozen=True, eq=False)
class BasedComplex:
    field: gf.FiniteField
    terms: tuple[tuple[tuple[object, int], ...], ...]  # per term: (label, dim) blocks
    coboundaries: tuple[np.ndarray, ...]
    lengths: tuple[int, ...] | None = None  # code lengths when built from encoders

    def __post_init__(self):
        if len(self.coboundaries) != max(0, len(self.terms) - 1):
            raise PreconditionError("need one coboundary between consecutive terms")
        for j, d in enumerate(self.coboundaries):
            if d.shape != (self.dim(j + 1), self.dim(j)):
                raise PreconditionError(f"coboundary {j} has shape {d.shape}")
        for j in range(len(self.coboundaries) - 1):
            if np.any(self.field.matmul(self.coboundaries[j + 1], self.coboundaries[j])):
                raise TheoryViolation(f"delta_{j + 1} delta_{j} is not zero")

    @property
    def length(self) -> int:
        return len(self.terms)

    def dim(self, j: int) -> int:
        return sum(d for _, d in self.terms[j])

    def block_count(self, j: int) -> int:
        return len(self.terms[j])

    def block_starts(self, j: int) -> np.ndarray:
        dims = [d for _, d in self.terms[j]]
        return np.concatenate([[0], np.cumsum(dims)[:-1]]).astype(np.int64) if dims else np.zeros(0, np.int64)

    def block_weight(self, vectors, j: int) -> np.ndarray:
        """Number of nonzero blocks of each vector (last axis) in term ``j``."""
        v = np.asarray(vectors)
        dims = np.array([d for _, d in self.terms[j]])
        if (dims == 0).any():
            keep = np.flatnonzero(dims > 0)
            starts = self.block_starts(j)[keep]
        else:
            starts = self.block_starts(j)
        if v.shape[-1] == 0:
            return np.zeros(v.shape[:-1], dtype=np.int64)
        return np.logical_or.reduceat(v != 0, starts, axis=-1).sum(axis=-1)

    def norm(self, v, j: int) -> Fraction:
        return Fraction(int(self.block_weight(v, j)), self.block_count(j))

    def delta(self, j: int) -> np.ndarray:
        """Coboundary out of term ``j``; zero maps at either end."""
        if 0 <= j < len(self.coboundaries):
            return self.coboundaries[j]
        rows = self.dim(j + 1) if 0 <= j + 1 < self.length else 0
        cols = self.dim(j) if 0 <= j < self.length else 0
        return np.zeros((rows, cols), dtype=np.int64)

    def coboundary_space(self, j: int) -> gf.Subspace:
        """``B^j``, the image of the coboundary into term ``j``."""
        return gf.image(self.field, self.delta(j - 1), self.dim(j))

    def cocycle_space(self, j: int) -> gf.Subspace:
        return gf.kernel(self.field, self.delta(j), self.dim(j))

    def summary(self) -> dict:
        return {
            "term_dims": [self.dim(j) for j in range(self.length)],
            "block_counts": [self.block_count(j) for j in range(self.length)],
            "cohomology": [cohomology_dim(self, j) for j in range(self.length)],
        }


def complex_from_encoder(field: gf.FiniteField, g) -> BasedComplex:
    """``F^k -> F^n`` with coboundary ``g^T`` (one block above, ``n`` blocks below)."""
    g = gf.as_matrix(g)
    k, n = g.shape
    if gf.rank(field, g) != k:
        raise PreconditionError("encoder must have full row rank")
    terms = ((("*", k),), tuple((i, 1) for i in range(n)))
    return BasedComplex(field, terms, (np.ascontiguousarray(g.T),), (n,))


def _kron(A, B) -> np.ndarray:
    # one factor is always an identity, so integer products are field products
    return np.kron(np.asarray(A, dtype=np.int64), np.asarray(B, dtype=np.int64))


def _flatten_label(label) -> tuple:
    return label if isinstance(label, tuple) else (label,)


def tensor_pair(A: BasedComplex, B: BasedComplex, cap: int = 1 << 14) -> BasedComplex:
    """Tensor product with Koszul signs, summands ordered by decreasing A-degree."""
    F = A.field
    if B.field != F:
        raise PreconditionError("complexes must share the field")
    length = A.length + B.length - 1
    layout = []  # per term: list of (s, t, offset, perm)
    terms = []
    for j in range(length):
        blocks, summands, offset = [], [], 0
        for s in range(min(j, A.length - 1), -1, -1):
            t = j - s
            if t >= B.length:
                continue
            dB = B.dim(t)
            perm = []
            a_start = 0
            for la, da in A.terms[s]:
                b_start = 0
                for lb, db in B.terms[t]:
                    blocks.append((_flatten_label(la) + _flatten_label(lb), da * db))
                    for a in range(a_start, a_start + da):
                        perm.extend(a * dB + b for b in range(b_start, b_start + db))
                    b_start += db
                a_start += da
            summands.append((s, t, offset, np.array(perm, dtype=np.int64)))
            offset += len(perm)
        if offset > cap:
            raise CapExceeded(f"term {j} has dimension {offset}, cap is {cap}")
        layout.append(summands)
        terms.append(tuple(blocks))
    deltas = []
    for j in range(length - 1):
        rows = sum(len(p) for *_, p in layout[j + 1])
        cols = sum(len(p) for *_, p in layout[j])
        D = np.zeros((rows, cols), dtype=np.int64)
        target = {(s, t): (off, perm) for s, t, off, perm in layout[j + 1]}
        for s, t, off, perm in layout[j]:
            if (s + 1, t) in target:
                toff, tperm = target[(s + 1, t)]
                K = _kron(A.delta(s), np.eye(B.dim(t), dtype=np.int64))
                D[toff : toff + len(tperm), off : off + len(perm)] = K[np.ix_(tperm, perm)]
            if (s, t + 1) in target:
                toff, tperm = target[(s, t + 1)]
                K = _kron(np.eye(A.dim(s), dtype=np.int64), B.delta(t))
                if s % 2:
                    K = F.neg(K)
                D[toff : toff + len(tperm), off : off + len(perm)] = K[np.ix_(tperm, perm)]
        deltas.append(D)
    lengths = None if A.lengths is None or B.lengths is None else A.lengths + B.lengths
    return BasedComplex(F, tuple(terms), tuple(deltas), lengths)


def tensor_complex(factors: Sequence[BasedComplex], cap: int = 1 << 14) -> BasedComplex:
    factors = list(factors)
    if not factors:
        raise PreconditionError("need at least one factor")
    out = factors[0]
    for f in factors[1:]:
        out = tensor_pair(out, f, cap)
    return out


def collection_complex(coll: CodeCollection, cap: int = 1 << 14) -> BasedComplex:
    """The tensor product of the encoder complexes of every code."""
    return tensor_complex([complex_from_encoder(coll.field, C.generator) for C in coll], cap)


def cohomology_dim(cx: BasedComplex, i: int) -> int:
    F = cx.field
    rank_out = gf.rank(F, cx.delta(i)) if cx.delta(i).size else 0
    rank_in = gf.rank(F, cx.delta(i - 1)) if cx.delta(i - 1).size else 0
    return cx.dim(i) - rank_out - rank_in


def _quotient_representatives(B: gf.Subspace) -> np.ndarray:
    """Unit vectors at the non-pivot positions of ``B``'s canonical basis."""
    pivots = set(int(np.flatnonzero(row)[0]) for row in B.basis)
    free = [c for c in range(B.n) if c not in pivots]
    E = np.zeros((len(free), B.n), dtype=np.int64)
    E[np.arange(len(free)), free] = 1
    return E


def cheeger_constant(cx: BasedComplex, i: int, cap: int = ENUM_CAP) -> Fraction | None:
    """``min ||delta x|| / min_b ||x - b||`` over cochains ``x`` not in ``B^i``.

    Both quantities depend only on the class of ``x`` modulo ``B^i``, so the
    search runs over one representative per class and minimizes over that
    class.  Returns None when every cochain is a coboundary.
    """
    if cx.lengths is not None and len(set(cx.lengths)) > 1:
        raise PreconditionError("block norms need all code lengths equal")
    F = cx.field
    if F.q ** cx.dim(i) > cap:
        raise CapExceeded(f"{F.q}^{cx.dim(i)} cochains exceed cap {cap}")
    B = cx.coboundary_space(i)
    E = _quotient_representatives(B)
    if E.shape[0] == 0:
        return None
    reps = gf.span_elements(gf.Subspace(F, B.n, E))[1:]
    coset = gf.span_elements(B)
    denom, _ = min_over_cosets(F, reps, coset, lambda v: cx.block_weight(v, i))
    images = F.matmul(reps, cx.delta(i).T)
    numer = cx.block_weight(images, i + 1) if cx.delta(i).shape[0] else np.zeros(len(reps), np.int64)
    pairs = set(zip(numer.tolist(), denom.tolist()))
    scale = Fraction(cx.block_count(i), cx.block_count(i + 1)) if i + 1 < cx.length else Fraction(0)
    return min(Fraction(a, b) for a, b in pairs) * scale


def min_filling_norm(cx: BasedComplex, i: int, c, cap: int = ENUM_CAP) -> Fraction:
    """``min ||a||`` over cochains ``a`` in term ``i`` with ``delta a = c``."""
    F = cx.field
    a0 = gf.solve(F, cx.delta(i), c)
    if a0 is None:
        raise PreconditionError("c is not a coboundary")
    Z = cx.cocycle_space(i)
    if F.q**Z.k > cap:
        raise CapExceeded(f"{F.q}^{Z.k} fillings exceed cap {cap}")
    best, _ = min_over_cosets(F, a0[None, :], gf.span_elements(Z), lambda v: cx.block_weight(v, i))
    return Fraction(int(best[0]), cx.block_count(i))


def verify_expansion_cheeger_identity(coll: CodeCollection, cap: int = ENUM_CAP) -> bool:
    """Compare ``h^{m-1} / m`` of the collection's complex with its expansion factor."""
    cx = collection_complex(coll)
    h = cheeger_constant(cx, coll.m - 1, cap)
    rho = expansion_factor(coll, cap).rho
    return h is not None and h / coll.m == rho
