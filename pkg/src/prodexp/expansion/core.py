"""Exact minimum-cost decompositions and the product-expansion factor.

Every element of the boxplus code is a sum ``a_1 + ... + a_m`` with
``a_i in C^(i)``.  We parametrize such tuples by coefficient vectors: for
direction ``i`` and each line ``l`` in that direction, ``k_i`` message symbols
encoded by the generator of ``C_i``.  Coordinates belonging to one line are
contiguous, so the unnormalized cost ``sum_i n_i |a_i|_i`` is a weighted count
of nonzero coordinate blocks.  The summation map sends a coefficient vector
to the word ``sum a_i``; its left kernel is the set of tuples summing to zero,
so the decompositions of a fixed word form one coset of that kernel.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any

import numpy as np

from .. import gf
from ..errors import CapExceeded, PreconditionError, TheoryViolation
from ..product import (
    CELL_CAP,
    CodeCollection,
    axis_generators,
    check_word,
    from_lines,
    in_axis_code,
    line_count,
    lines,
    nearest_codewords_many,
    weight,
)

ENUM_CAP = 1 << 24
BLOCK_BUDGET = 1 << 22


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Components ``a_i in C^(i)`` of a boxplus word, with their cost."""

    collection: CodeCollection
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(np.asarray(a, dtype=np.int64) for a in self.components)
        if len(comps) != self.collection.m:
            raise PreconditionError("need one component per direction")
        for i, a in enumerate(comps):
            if not in_axis_code(a, self.collection, i):
                raise TheoryViolation(f"component {i + 1} is not in its axis code")
            a.setflags(write=False)
        object.__setattr__(self, "components", comps)

    @property
    def word(self) -> np.ndarray:
        F = self.collection.field
        total = np.zeros(self.collection.shape, dtype=np.int64)
        for a in self.components:
            total = F.add(total, a)
        return total

    @property
    def line_counts(self) -> tuple[int, ...]:
        return tuple(line_count(a, i) for i, a in enumerate(self.components))

    @property
    def unnormalized_cost(self) -> int:
        """``sum_i n_i |a_i|_i``."""
        return sum(n * c for n, c in zip(self.collection.shape, self.line_counts))

    @property
    def cost(self) -> Fraction:
        """``sum_i ||a_i||_i``."""
        return Fraction(self.unnormalized_cost, self.collection.cells)

    def flat(self) -> np.ndarray:
        return np.concatenate([a.reshape(-1) for a in self.components])


@dataclass(frozen=True, eq=False)
class ExpansionReport:
    rho: Fraction
    argmin: np.ndarray | None
    decomposition: Decomposition | None
    instance: dict
    method: str = "exact"
    seed: Any = None
    extra: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        from ..harness.reports import fraction_str, word_str

        q = self.instance.get("q")
        return {
            "rho": fraction_str(self.rho),
            "argmin": None if self.argmin is None else word_str(self.argmin, q),
            "decomposition_cost": None if self.decomposition is None else fraction_str(self.decomposition.cost),
            "method": self.method,
            "instance": self.instance,
            "seed": self.seed,
            **self.extra,
        }


# -- coefficient-space machinery ----------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientSpace:
    collection: CodeCollection
    summation: np.ndarray  # D x cells
    starts: np.ndarray  # start of each nonempty line block
    weights: np.ndarray  # n_i for each block
    offsets: tuple[int, ...]  # start of each direction's coordinates

    @property
    def dim(self) -> int:
        return self.summation.shape[0]

    def decode(self, coeffs) -> Decomposition:
        coll, F = self.collection, self.collection.field
        coeffs = np.asarray(coeffs, dtype=np.int64)
        comps = []
        for i, C in enumerate(coll):
            n_lines = coll.cells // C.n
            block = coeffs[self.offsets[i] : self.offsets[i] + n_lines * C.k].reshape(n_lines, C.k)
            line_words = F.matmul(block, C.generator) if C.k else np.zeros((n_lines, C.n), dtype=np.int64)
            comps.append(from_lines(line_words, coll.shape, i))
        return Decomposition(coll, tuple(comps))

    def costs(self, coeffs: np.ndarray) -> np.ndarray:
        """Unnormalized cost of each coefficient vector (last axis)."""
        if self.dim == 0:
            return np.zeros(coeffs.shape[:-1], dtype=np.int64)
        nz = np.logical_or.reduceat(coeffs != 0, self.starts, axis=-1)
        return nz.astype(np.int64) @ self.weights


@functools.lru_cache(maxsize=64)
def coefficient_space(coll: CodeCollection) -> CoefficientSpace:
    gens, starts, weights, offsets = [], [], [], []
    pos = 0
    for i, C in enumerate(coll):
        offsets.append(pos)
        gens.append(axis_generators(coll, i))
        if C.k:
            for _ in range(coll.cells // C.n):
                starts.append(pos)
                weights.append(C.n)
                pos += C.k
    S = np.vstack(gens) if gens else np.zeros((0, coll.cells), dtype=np.int64)
    S.setflags(write=False)
    return CoefficientSpace(coll, S, np.array(starts, dtype=np.int64), np.array(weights, dtype=np.int64), tuple(offsets))


@functools.lru_cache(maxsize=64)
def _relations(coll: CodeCollection) -> gf.Subspace:
    """Coefficient vectors whose components sum to zero."""
    cs = coefficient_space(coll)
    return gf.kernel(coll.field, cs.summation.T, cs.dim)


def min_over_cosets(field, base: np.ndarray, coset: np.ndarray, cost_fn, budget: int = BLOCK_BUDGET):
    """For each row ``b`` of ``base``, the minimum of ``cost_fn(b + t)`` over rows ``t``.

    Returns ``(min_costs, first_argmin)``; the argmin indexes ``coset``.
    """
    nb, D = base.shape
    best = np.full(nb, np.iinfo(np.int64).max, dtype=np.int64)
    arg = np.zeros(nb, dtype=np.int64)
    tstep = max(1, min(len(coset), budget // max(1, D)))
    for t0 in range(0, len(coset), tstep):
        tc = coset[t0 : t0 + tstep]
        bstep = max(1, budget // max(1, len(tc) * max(D, 1)))
        for b0 in range(0, nb, bstep):
            block = field.add(base[b0 : b0 + bstep, None, :], tc[None, :, :])
            c = cost_fn(block)
            j = np.argmin(c, axis=1)
            cmin = c[np.arange(len(j)), j]
            better = cmin < best[b0 : b0 + bstep]
            best[b0 : b0 + bstep][better] = cmin[better]
            arg[b0 : b0 + bstep][better] = j[better] + t0
    return best, arg


def _flat(x) -> np.ndarray:
    return np.asarray(x, dtype=np.int64).reshape(-1)


def min_cost_decomposition(x, coll: CodeCollection, cap: int = ENUM_CAP) -> Decomposition:
    """A cheapest decomposition of ``x``; ties go to the lexicographically
    smallest concatenation ``(a_1, ..., a_m)``."""
    x = check_word(x, coll)
    cs = coefficient_space(coll)
    F = coll.field
    if cs.dim == 0:
        if np.any(x):
            raise PreconditionError("word is not in the boxplus code")
        return cs.decode(np.zeros(0, dtype=np.int64))
    particular = gf.solve(F, cs.summation.T, _flat(x))
    if particular is None:
        raise PreconditionError("word is not in the boxplus code")
    rel = _relations(coll)
    if F.q**rel.k > cap:
        raise CapExceeded(f"decomposition coset of size {F.q}^{rel.k} exceeds cap {cap}")
    coset = gf.span_elements(rel, cap)
    everything = F.add(particular[None, :], coset)
    costs = cs.costs(everything)
    tied = np.flatnonzero(costs == costs.min())
    decs = [cs.decode(everything[t]) for t in tied]
    if len(decs) > 1:
        keys = np.stack([d.flat() for d in decs])
        order = np.lexsort(keys.T[::-1])
        decs = [decs[order[0]]]
    dec = decs[0]
    if not np.array_equal(dec.word, x):
        raise TheoryViolation("decomposition does not sum to the word")
    return dec


def _min_ratio(w: np.ndarray, c: np.ndarray) -> tuple[Fraction, int]:
    """Exact minimum of ``w/c`` over positions, and its first position."""
    pairs = np.unique(np.stack([w, c], axis=1), axis=0)
    best = min(Fraction(int(a), int(b)) for a, b in pairs)
    hit = np.flatnonzero(w * best.denominator == c * best.numerator)
    return best, int(hit[0])


def enumeration_size(coll: CodeCollection) -> int:
    """``q^D``: the number of coefficient vectors an exact run visits."""
    return coll.field.q ** coefficient_space(coll).dim


def expansion_factor(coll: CodeCollection, cap: int = ENUM_CAP, cap_cells: int = CELL_CAP) -> ExpansionReport:
    """The largest rho for which the collection is rho-product-expanding.

    Computed exactly as the minimum over nonzero boxplus words ``c`` of
    ``|c| / min sum_i n_i |a_i|_i``.  The argmin is the lexicographically
    smallest word attaining it.
    """
    if coll.cells > cap_cells:
        raise CapExceeded(f"{coll.cells} grid cells exceed cap {cap_cells}")
    F = coll.field
    inst = coll.describe()
    if coll.degenerate and len(set(coll.shape)) == 1:
        # a_i = c in the full direction gives cost n|c|_i <= n|c|; a single
        # nonzero entry needs at least one whole line, so 1/n is attained.
        n = coll.shape[0]
        word = np.zeros(coll.shape, dtype=np.int64)
        word.reshape(-1)[-1] = 1
        dec = min_cost_decomposition(word, coll, cap)
        rho = Fraction(1, n)
        if Fraction(weight(word), dec.unnormalized_cost) != rho:
            raise TheoryViolation("degenerate collection does not attain 1/n")
        return ExpansionReport(rho, word, dec, inst, "exact", extra={"degenerate": True})
    cs = coefficient_space(coll)
    if F.q**cs.dim > cap:
        raise CapExceeded(f"exact enumeration needs {F.q}^{cs.dim} coefficient vectors, cap is {cap}")
    box = gf.row_space(F, cs.summation, coll.cells)
    if box.k == 0:
        return ExpansionReport(Fraction(1), None, None, inst, "exact", extra={"empty": True})
    preimages = np.stack([gf.solve(F, cs.summation.T, row) for row in box.basis])
    coset = gf.span_elements(_relations(coll), cap)
    total = F.q**box.k
    budget_rows = max(1, BLOCK_BUDGET // max(1, len(coset) * cs.dim))
    step = max(1, min(total, max(budget_rows, 1 << 10)))
    best: tuple[Fraction, int] | None = None
    for start in range(1, total, step):
        mu = gf.vectors_range(F.q, box.k, start, min(total, start + step))
        words = F.matmul(mu, box.basis)
        base = F.matmul(mu, preimages)
        costs, _ = min_over_cosets(F, base, coset, cs.costs)
        w = np.count_nonzero(words, axis=1)
        ratio, pos = _min_ratio(w, costs)
        if best is None or ratio < best[0]:
            best = (ratio, start + pos)
    rho, index = best
    mu = gf.vectors_range(F.q, box.k, index, index + 1)[0]
    word = F.matmul(mu, box.basis).reshape(coll.shape)
    dec = min_cost_decomposition(word, coll, cap)
    if Fraction(weight(word), dec.unnormalized_cost) != rho:
        raise TheoryViolation("argmin ratio does not match its decomposition")
    return ExpansionReport(rho, word, dec, inst, "exact")


def word_ratio(x, dec: Decomposition) -> Fraction:
    """``||x|| / sum_i ||a_i||_i``."""
    return Fraction(weight(x), dec.unnormalized_cost)


def greedy_decomposition(x, coll: CodeCollection, max_steps: int | None = None) -> Decomposition | None:
    """Peel off the single column or row whose nearest-codeword replacement
    most reduces the weight, until nothing is left.

    Ties prefer columns over rows and lower indices.  Returns None when a
    nonzero residue admits no improving move (a heuristic failure).
    """
    if coll.m != 2:
        raise PreconditionError("greedy decomposition is implemented for two codes")
    F = coll.field
    x = check_word(x, coll).copy()
    n1, n2 = coll.shape
    if max_steps is None:
        max_steps = n1 + n2
    a1 = np.zeros_like(x)
    a2 = np.zeros_like(x)
    for _ in range(max_steps):
        if not np.any(x):
            break
        col_words, col_dist = nearest_codewords_many(lines(x, 0), coll[0])
        row_words, row_dist = nearest_codewords_many(lines(x, 1), coll[1])
        col_gain = np.count_nonzero(x, axis=0) - col_dist
        row_gain = np.count_nonzero(x, axis=1) - row_dist
        j, i = int(np.argmax(col_gain)), int(np.argmax(row_gain))
        if max(col_gain[j], row_gain[i]) <= 0:
            return None
        if col_gain[j] >= row_gain[i]:
            x[:, j] = F.sub(x[:, j], col_words[j])
            a1[:, j] = F.add(a1[:, j], col_words[j])
        else:
            x[i, :] = F.sub(x[i, :], row_words[i])
            a2[i, :] = F.add(a2[i, :], row_words[i])
    if np.any(x):
        return None
    return Decomposition(coll, (a1, a2))
