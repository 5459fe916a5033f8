"""Linear codes: parameters, duals, distance, information sets, RS codes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import gf
from .errors import CapExceeded, PreconditionError, TheoryViolation
from .gf import FiniteField, Subspace

DISTANCE_CAP = 1 << 24
_CHUNK = 1 << 16


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A k-dimensional subspace of F_q^n together with a parity-check matrix.

    The minimum distance is computed lazily and cached; the cache write is
    idempotent, so the object is still immutable as far as callers can tell.
    """

    space: Subspace
    parity: np.ndarray
    _distance: list = dc_field(default_factory=list, repr=False, compare=False)

    @property
    def field(self) -> FiniteField:
        return self.space.field

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def k(self) -> int:
        return self.space.k

    @property
    def generator(self) -> np.ndarray:
        return self.space.basis

    @property
    def d(self) -> int:
        return min_distance(self)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def relative_distance(self) -> Fraction:
        return Fraction(self.d, self.n)

    @property
    def redundancy(self) -> Fraction:
        """The fraction 1 - k/n."""
        return 1 - Fraction(self.k, self.n)

    @property
    def is_full(self) -> bool:
        return self.k == self.n

    def __eq__(self, other):
        return isinstance(other, LinearCode) and self.space == other.space

    def __hash__(self):
        return hash(self.space)

    def __repr__(self):
        return f"LinearCode(q={self.field.q}, n={self.n}, k={self.k})"

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64)
        return not np.any(self.field.matmul(self.parity, v.reshape(self.n)))

    def syndrome(self, v) -> np.ndarray:
        return self.field.matmul(self.parity, np.asarray(v, dtype=np.int64))

    def encode(self, message) -> np.ndarray:
        return self.field.matmul(np.asarray(message, dtype=np.int64), self.generator)

    def codewords(self, cap: int = DISTANCE_CAP) -> np.ndarray:
        return gf.span_elements(self.space, cap)


def code_from_space(space: Subspace) -> LinearCode:
    H = gf.orthogonal_complement(space).basis
    return LinearCode(space, H)


def code_from_generator(field: FiniteField, rows, n: int | None = None) -> LinearCode:
    """Code spanned by ``rows``; pass ``n`` when ``rows`` may be empty."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0 and n is None:
        raise PreconditionError("empty generator needs an explicit length")
    return code_from_space(gf.row_space(field, rows, n))


def code_from_parity(field: FiniteField, rows, n: int | None = None) -> LinearCode:
    """The code ``{x : H x = 0}``."""
    H = gf.as_matrix(rows, n)
    if H.size == 0 and n is None:
        raise PreconditionError("empty parity-check matrix needs an explicit length")
    return code_from_space(gf.kernel(field, H, H.shape[1] if n is None else n))


def repetition_code(field: FiniteField, n: int) -> LinearCode:
    return code_from_generator(field, np.ones((1, n), dtype=np.int64))


def parity_code(field: FiniteField, n: int) -> LinearCode:
    """The sum-zero code; over GF(2) this is the even-weight code."""
    return code_from_parity(field, np.ones((1, n), dtype=np.int64))


def full_code(field: FiniteField, n: int) -> LinearCode:
    return code_from_space(gf.full_space(field, n))


def zero_code(field: FiniteField, n: int) -> LinearCode:
    return code_from_space(gf.zero_space(field, n))


def dual(C: LinearCode) -> LinearCode:
    D = code_from_space(gf.row_space(C.field, C.parity, C.n))
    if C.k and D.k and np.any(C.field.matmul(C.generator, D.generator.T)):
        raise TheoryViolation("dual code is not orthogonal to the code")
    return D


def random_code(field: FiniteField, n: int, k: int, seed) -> LinearCode:
    return code_from_space(gf.random_subspace(field, n, k, seed))


def _weights_of_span(space: Subspace, cap: int) -> np.ndarray:
    """Histogram of codeword weights (index = weight)."""
    F, k, n = space.field, space.k, space.n
    total = F.q**k
    if total > cap:
        raise CapExceeded(f"{F.q}^{k} codewords exceed cap {cap}")
    hist = np.zeros(n + 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        msgs = gf.vectors_range(F.q, k, start, min(total, start + _CHUNK))
        words = F.matmul(msgs, space.basis) if k else np.zeros((1, n), dtype=np.int64)
        hist += np.bincount(np.count_nonzero(words, axis=1), minlength=n + 1)
    return hist


def _krawtchouk(n: int, q: int, j: int, w: int) -> int:
    return sum((-1) ** s * (q - 1) ** (j - s) * math.comb(w, s) * math.comb(n - w, j - s) for s in range(j + 1))


def weight_distribution(C: LinearCode, cap: int = DISTANCE_CAP) -> list[int]:
    """Number of codewords of each weight 0..n.

    Enumerates whichever of the code and its dual is smaller; the dual's
    distribution is converted with the MacWilliams transform.
    """
    q, n = C.field.q, C.n
    Dspace = gf.row_space(C.field, C.parity, n)
    if q**C.k <= cap and C.k <= Dspace.k:
        return [int(v) for v in _weights_of_span(C.space, cap)]
    if q**Dspace.k > cap:
        if q**C.k <= cap:
            return [int(v) for v in _weights_of_span(C.space, cap)]
        raise CapExceeded(f"neither the code ({q}^{C.k}) nor its dual ({q}^{Dspace.k}) fits the cap {cap}")
    B = _weights_of_span(Dspace, cap)
    size = q**Dspace.k
    out = []
    for j in range(n + 1):
        num = sum(int(B[w]) * _krawtchouk(n, q, j, w) for w in range(n + 1))
        value, rem = divmod(num, size)
        if rem:
            raise TheoryViolation("MacWilliams transform produced a non-integer")
        out.append(value)
    return out


def min_distance(C: LinearCode, cap: int = DISTANCE_CAP) -> int:
    """Minimum nonzero weight; the zero code gets the sentinel ``n + 1``."""
    if C._distance:
        return C._distance[0]
    if C.k == 0:
        d = C.n + 1
    else:
        dist = weight_distribution(C, cap)
        d = next(w for w in range(1, C.n + 1) if dist[w])
        if d > C.n - C.k + 1:
            raise TheoryViolation("Singleton bound violated")
    C._distance.append(d)
    return d


def information_set(C: LinearCode, S) -> list[int] | None:
    """Lowest-index greedy information set inside ``S`` (None if none exists)."""
    S = sorted(int(s) for s in S)
    if C.k == 0:
        return []
    if not S:
        return None
    _, r, pivots = gf.rref(C.field, C.generator[:, S])
    if r < C.k:
        if C._distance and len(S) > C.n - C._distance[0]:
            raise TheoryViolation("a set larger than n - d must contain an information set")
        return None
    return [S[p] for p in pivots]


def evaluation_points(field: FiniteField) -> list[int]:
    """0, 1, g, g^2, ..., g^(q-2) for the canonical primitive element g."""
    pts = [0]
    x = 1
    for _ in range(field.q - 1):
        pts.append(x)
        x = int(field.mul(x, field.primitive_element))
    if sorted(pts) != list(range(field.q)):
        raise TheoryViolation("primitive element does not generate the field")
    return pts


def reed_solomon(q: int, k: int) -> LinearCode:
    """Evaluations of polynomials of degree < k at every element of GF(q)."""
    field = gf.field_of_order(q)
    if not 0 <= k <= q:
        raise PreconditionError(f"need 0 <= k <= q, got k={k}")
    pts = np.array(evaluation_points(field), dtype=np.int64)
    rows = np.zeros((k, q), dtype=np.int64)
    if k:
        rows[0] = 1
    for i in range(1, k):
        rows[i] = field.mul(rows[i - 1], pts)
    return code_from_generator(field, rows, q)


def _check_compatible(C1: LinearCode, C2: LinearCode):
    if C1.field != C2.field or C1.n != C2.n:
        raise PreconditionError("codes must share field and length")


def is_css_pair(C1: LinearCode, C2: LinearCode) -> bool:
    """True iff H1 H2^T = 0, equivalently dual(C2) is contained in C1."""
    _check_compatible(C1, C2)
    F = C1.field
    commute = C1.parity.shape[0] == 0 or C2.parity.shape[0] == 0 or not np.any(F.matmul(C1.parity, C2.parity.T))
    contained = dual(C2).space.issubspace(C1.space)
    if commute != contained:
        raise TheoryViolation("commutation and containment disagree")
    return commute


def entropy_q(q: int, x: float) -> float:
    if not 0 <= x <= 1:
        raise PreconditionError(f"entropy argument {x} outside [0, 1]")
    if x == 0:
        return 0.0
    value = x * math.log(q - 1, q) - x * math.log(x, q)
    if x < 1:
        value -= (1 - x) * math.log(1 - x, q)
    return value


def entropy_q_inv(q: int, y: float, tol: float = 1e-13) -> float:
    """Inverse of ``entropy_q`` on [0, 1 - 1/q], by bisection."""
    if not 0 <= y <= 1:
        raise PreconditionError(f"entropy value {y} outside [0, 1]")
    lo, hi = 0.0, 1 - 1 / q
    if y >= 1:
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if entropy_q(q, mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def ltc_soundness(C: LinearCode, H=None, cap: int = DISTANCE_CAP) -> Fraction | None:
    """Largest s with ``s * delta(x, C) <= |Hx| / rows(H)`` for every x.

    Returns None when every word is a codeword.
    """
    F, n = C.field, C.n
    H = C.parity if H is None else gf.as_matrix(H, n)
    if gf.row_space(F, H, n) != gf.row_space(F, C.parity, n):
        raise PreconditionError("H is not a parity-check matrix of C")
    if C.is_full:
        return None
    if F.q**n > cap:
        raise CapExceeded(f"{F.q}^{n} words exceed cap {cap}")
    words = gf.all_vectors(F.q, n)
    code = C.codewords(cap)
    # distance to the code, chunked over words
    dist = np.full(len(words), n + 1, dtype=np.int64)
    step = max(1, (1 << 22) // max(1, len(code) * n))
    for s in range(0, len(words), step):
        w = words[s : s + step]
        dist[s : s + step] = np.count_nonzero(w[:, None, :] != code[None, :, :], axis=2).min(axis=1)
    synd = np.count_nonzero(F.matmul(words, H.T), axis=1)
    mask = dist > 0
    rows = H.shape[0]
    # ratio (synd/rows) / (dist/n) = synd*n / (rows*dist)
    best = min(Fraction(int(sw) * n, rows * int(dw)) for sw, dw in set(zip(synd[mask].tolist(), dist[mask].tolist())))
    return best


def format_code(C: LinearCode) -> str:
    """Text form: header ``q n k`` then one generator row per line."""
    lines = [f"{C.field.q} {C.n} {C.k}"]
    lines += [format_digits(row, C.field.q) for row in C.generator]
    return "\n".join(lines) + "\n"


def format_digits(row, q: int) -> str:
    if q <= 10:
        return "".join(str(int(v)) for v in row)
    return " ".join(str(int(v)) for v in row)


def parse_digits(text: str, q: int, count: int | None = None) -> list[int]:
    text = text.strip()
    if q <= 10 and " " not in text:
        vals = [int(ch) for ch in text]
    else:
        vals = [int(t) for t in text.split()]
    if any(not 0 <= v < q for v in vals):
        raise PreconditionError(f"symbol outside GF({q})")
    if count is not None and len(vals) != count:
        raise PreconditionError(f"expected {count} symbols, found {len(vals)}")
    return vals


def parse_code(text: str) -> LinearCode:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PreconditionError("empty code file")
    try:
        q, n, k = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise PreconditionError(f"bad code header {lines[0]!r}") from exc
    if len(lines) - 1 != k:
        raise PreconditionError(f"header says k={k} but {len(lines) - 1} rows follow")
    field = gf.field_of_order(q)
    rows = np.array([parse_digits(ln, q, n) for ln in lines[1:]], dtype=np.int64).reshape(k, n)
    C = code_from_generator(field, rows, n)
    if C.k != k:
        raise PreconditionError(f"generator rows have rank {C.k}, not {k}")
    return C


def load_code(path) -> LinearCode:
    with open(path, encoding="utf-8") as fh:
        return parse_code(fh.read())
