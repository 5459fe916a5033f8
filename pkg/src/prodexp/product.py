"""Tensor words over grids, product codes and their dual (boxplus) codes.

Conventions
-----------
A word on the grid ``[n_1] x ... x [n_m]`` is an ``m``-dimensional integer
array ``x`` with ``x.shape == (n_1, ..., n_m)``.  Lines in direction ``i``
(1-based, as in ``C^(i)``) vary numpy axis ``i - 1`` and must lie in ``C_i``.
For ``m = 2`` this makes columns ``x[:, j]`` the ``C_1`` lines and rows
``x[i, :]`` the ``C_2`` lines.  Flattening is numpy's C order (axis 1
slowest).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import gf
from .codes import LinearCode, format_digits, parse_digits
from .errors import CapExceeded, PreconditionError, TheoryViolation
from .gf import FiniteField, Subspace

CELL_CAP = 1 << 12


@dataclass(frozen=True)
class CodeCollection:
    """An ordered tuple of codes ``C_1, ..., C_m`` over one field."""

    codes: tuple[LinearCode, ...]

    def __post_init__(self):
        codes = tuple(self.codes)
        object.__setattr__(self, "codes", codes)
        if not codes:
            raise PreconditionError("a collection needs at least one code")
        if any(C.field != codes[0].field for C in codes):
            raise PreconditionError("all codes must share the field")

    @classmethod
    def of(cls, *codes: LinearCode) -> CodeCollection:
        return cls(tuple(codes))

    @property
    def field(self) -> FiniteField:
        return self.codes[0].field

    @property
    def m(self) -> int:
        return len(self.codes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(C.n for C in self.codes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(C.k for C in self.codes)

    @property
    def cells(self) -> int:
        return math.prod(self.shape)

    @property
    def degenerate(self) -> bool:
        return any(C.is_full for C in self.codes)

    def __getitem__(self, i):
        return self.codes[i]

    def __iter__(self):
        return iter(self.codes)

    def __len__(self):
        return len(self.codes)

    def describe(self) -> dict:
        return {"q": self.field.q, "n": list(self.shape), "k": list(self.dims)}


def check_word(x, coll: CodeCollection) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != coll.shape:
        raise PreconditionError(f"word shape {x.shape} does not match grid {coll.shape}")
    return x


def weight(x) -> int:
    return int(np.count_nonzero(x))


def line_weights(x) -> list[tuple[int, Fraction]]:
    """``(|x|_i, ||x||_i)`` for every direction ``i``.

    ``|x|_i`` counts nonzero lines in direction ``i``; ``||x||_i`` divides by
    the number of such lines, ``prod(n) / n_i``.
    """
    x = np.asarray(x)
    out = []
    for axis, n_i in enumerate(x.shape):
        count = int(np.count_nonzero(np.any(x != 0, axis=axis)))
        out.append((count, Fraction(count * n_i, x.size)))
    return out


def line_count(x, axis: int) -> int:
    """Number of nonzero lines along numpy ``axis``."""
    return int(np.count_nonzero(np.any(np.asarray(x) != 0, axis=axis)))


def normalized_weight(x) -> Fraction:
    x = np.asarray(x)
    return Fraction(weight(x), x.size)


def lines(x, axis: int) -> np.ndarray:
    """All lines along ``axis`` as rows of a 2-D array (C order of the rest)."""
    x = np.asarray(x)
    return np.moveaxis(x, axis, -1).reshape(-1, x.shape[axis])


def from_lines(rows: np.ndarray, shape: Sequence[int], axis: int) -> np.ndarray:
    moved = [s for i, s in enumerate(shape) if i != axis] + [shape[axis]]
    return np.moveaxis(np.asarray(rows).reshape(moved), -1, axis)


def apply_along(field: FiniteField, M, x, axis: int) -> np.ndarray:
    """Multiply every line along ``axis`` by the matrix ``M``."""
    x = np.asarray(x, dtype=np.int64)
    out_rows = field.matmul(lines(x, axis), np.asarray(M, dtype=np.int64).T)
    shape = list(x.shape)
    shape[axis] = out_rows.shape[1]
    return from_lines(out_rows, shape, axis)


def in_axis_code(x, coll: CodeCollection, i: int) -> bool:
    """Membership in ``C^(i)`` (``i`` is a 0-based direction index)."""
    x = check_word(x, coll)
    C = coll[i]
    if C.parity.shape[0] == 0:
        return True
    return not np.any(C.field.matmul(lines(x, i), C.parity.T))


def tensor_membership(x, coll: CodeCollection) -> bool:
    x = check_word(x, coll)
    return all(in_axis_code(x, coll, i) for i in range(coll.m))


def boxplus_membership(x, coll: CodeCollection) -> bool:
    """``x`` lies in the boxplus code iff every parity check annihilates it.

    For ``m = 2`` this is ``H_1 x H_2^T = 0``.
    """
    x = check_word(x, coll)
    y = x
    for i, C in enumerate(coll):
        if C.parity.shape[0] == 0:
            return True
        y = apply_along(coll.field, C.parity, y, i)
    return not np.any(y)


def _guard_cells(coll: CodeCollection, cap: int):
    if coll.cells > cap:
        raise CapExceeded(f"{coll.cells} grid cells exceed cap {cap}")


def axis_generators(coll: CodeCollection, i: int) -> np.ndarray:
    """Spanning rows of ``C^(i)``: a generator placed on one line at a time.

    Rows are ordered by line (C order of the other axes), then generator
    row, and are flattened words.
    """
    C = coll[i]
    n_lines = coll.cells // C.n
    rows = np.zeros((n_lines, C.k, n_lines, C.n), dtype=np.int64)
    for ell in range(n_lines):
        rows[ell, :, ell, :] = C.generator
    rows = rows.reshape(n_lines * C.k, n_lines, C.n)
    return np.stack([from_lines(r, coll.shape, i).reshape(-1) for r in rows]) if len(rows) else rows.reshape(0, coll.cells)


def axis_code_basis(coll: CodeCollection, i: int, cap: int = CELL_CAP) -> Subspace:
    _guard_cells(coll, cap)
    return gf.row_space(coll.field, axis_generators(coll, i), coll.cells)


def boxplus_basis(coll: CodeCollection, cap: int = CELL_CAP) -> Subspace:
    _guard_cells(coll, cap)
    gens = np.vstack([axis_generators(coll, i) for i in range(coll.m)])
    S = gf.row_space(coll.field, gens, coll.cells)
    if coll.m == 2:
        (n1, n2), (k1, k2) = coll.shape, coll.dims
        if S.k != n1 * k2 + k1 * n2 - k1 * k2:
            raise TheoryViolation("boxplus dimension formula fails")
    return S


def tensor_generators(coll: CodeCollection) -> np.ndarray:
    """Rows ``g_1 (x) ... (x) g_m`` over all generator-row choices, flattened."""
    F = coll.field
    if any(C.k == 0 for C in coll):
        return np.zeros((0, coll.cells), dtype=np.int64)
    rows = np.ones((1, 1), dtype=np.int64)
    for C in coll:
        rows = F.mul(rows[:, None, :, None], C.generator[None, :, None, :]).reshape(rows.shape[0] * C.k, -1)
    return rows.reshape(-1, coll.cells)


def tensor_basis(coll: CodeCollection, cap: int = CELL_CAP) -> Subspace:
    _guard_cells(coll, cap)
    S = gf.row_space(coll.field, tensor_generators(coll), coll.cells)
    if S.k != math.prod(coll.dims):
        raise TheoryViolation("tensor code dimension is not the product of dimensions")
    return S


def nearest_codeword(x, space: Subspace, cap: int = gf.DEFAULT_ENUM_CAP) -> tuple[np.ndarray, int]:
    """Closest element of ``space``; ties go to the lexicographically smallest."""
    x = np.asarray(x, dtype=np.int64).reshape(-1)
    words = gf.span_elements(space, cap)  # lexicographic order
    dists = np.count_nonzero(words != x[None, :], axis=1)
    j = int(np.argmin(dists))  # first minimum = lexicographically smallest
    return words[j].copy(), int(dists[j])


def nearest_codewords_many(X, code: LinearCode, cap: int = gf.DEFAULT_ENUM_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``nearest_codeword`` for a 2-D array of words."""
    X = np.asarray(X, dtype=np.int64)
    words = gf.span_elements(code.space, cap)
    best = np.zeros(X.shape, dtype=np.int64)
    dist = np.zeros(X.shape[0], dtype=np.int64)
    step = max(1, (1 << 22) // max(1, words.size))
    for s in range(0, X.shape[0], step):
        d = np.count_nonzero(X[s : s + step, None, :] != words[None, :, :], axis=2)
        j = np.argmin(d, axis=1)
        best[s : s + step] = words[j]
        dist[s : s + step] = d[np.arange(len(j)), j]
    return best, dist


def distance_to_axis_code(x, coll: CodeCollection, i: int) -> Fraction:
    """Normalized distance from ``x`` to ``C^(i)``, computed line by line."""
    x = check_word(x, coll)
    _, dist = nearest_codewords_many(lines(x, i), coll[i])
    return Fraction(int(dist.sum()), coll.cells)


def format_word(x, q: int) -> str:
    """Text form: header ``q m n_1 ... n_m`` then the flattened symbols."""
    x = np.asarray(x)
    header = " ".join(str(v) for v in (q, x.ndim, *x.shape))
    return f"{header}\n{format_digits(x.reshape(-1), q)}\n"


def parse_word(text: str) -> tuple[int, np.ndarray]:
    lines_ = [ln for ln in text.splitlines() if ln.strip()]
    if not lines_:
        raise PreconditionError("empty word file")
    try:
        head = [int(t) for t in lines_[0].split()]
    except ValueError as exc:
        raise PreconditionError(f"bad word header {lines_[0]!r}") from exc
    if len(head) < 2 or len(head) != head[1] + 2:
        raise PreconditionError(f"bad word header {lines_[0]!r}")
    q, shape = head[0], tuple(head[2:])
    vals = parse_digits(" ".join(lines_[1:]) if q > 10 else "".join(lines_[1:]), q, math.prod(shape))
    return q, np.array(vals, dtype=np.int64).reshape(shape)


def load_word(path) -> tuple[int, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        return parse_word(fh.read())
