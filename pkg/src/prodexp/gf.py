"""Exact arithmetic and linear algebra over finite fields GF(p^e).

Field elements are the integers ``0 .. q-1``.  For a prime field the integer
is the residue itself.  For an extension field the integer encodes the
polynomial ``sum d_i x^i`` by its base-``p`` digits ``d_i``, reduced modulo a
fixed monic primitive polynomial (see :func:`minimal_primitive_polynomial`).

Matrices and vectors are plain ``numpy`` integer arrays; every function takes
the field explicitly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, PreconditionError, TheoryViolation

FIELD_ORDER_CAP = 1 << 16
AXIOM_CHECK_MAX_ORDER = 256
MAX_SAMPLING_ATTEMPTS = 64
DEFAULT_ENUM_CAP = 1 << 24


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomial helpers over F_p; coefficient lists are low degree first ----


def _poly_mulmod(a, b, mod, p):
    e = len(mod)
    prod = [0] * (2 * e - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    # reduce with x^e = -sum mod_i x^i
    for deg in range(len(prod) - 1, e - 1, -1):
        c = prod[deg]
        if c:
            prod[deg] = 0
            for i, mi in enumerate(mod):
                prod[deg - e + i] = (prod[deg - e + i] - c * mi) % p
    return prod[:e]


def _poly_powmod(base, exp, mod, p):
    e = len(mod)
    result = [1] + [0] * (e - 1)
    while exp:
        if exp & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        exp >>= 1
    return result


def _x_has_full_order(mod, p):
    e = len(mod)
    order = p**e - 1
    one = [1] + [0] * (e - 1)
    x = [0, 1] + [0] * (e - 2)
    if _poly_powmod(x, order, mod, p) != one:
        return False
    return all(_poly_powmod(x, order // r, mod, p) != one for r in prime_factors(order))


@functools.lru_cache(maxsize=None)
def minimal_primitive_polynomial(p: int, e: int) -> tuple[int, ...]:
    """Lower coefficients ``(c_0, ..., c_{e-1})`` of the canonical modulus.

    The modulus is ``x^e + sum c_i x^i`` with the smallest index
    ``sum c_i p^i`` among monic primitive polynomials of degree ``e``.
    Primitivity (``x`` has multiplicative order ``p^e - 1``) implies
    irreducibility, and makes ``x`` the canonical primitive element.
    """
    if e < 2:
        raise PreconditionError("a modulus is only needed for e >= 2")
    for index in range(1, p**e):
        coeffs = [(index // p**i) % p for i in range(e)]
        if coeffs[0] and _x_has_full_order(coeffs, p):
            return tuple(coeffs)
    raise TheoryViolation(f"no primitive polynomial of degree {e} over GF({p})")


class FiniteField:
    """The field GF(p^e); build instances with :func:`field_create`."""

    def __init__(self, p: int, e: int):
        self.p = p
        self.e = e
        self.q = p**e
        if e == 1:
            self.modulus: tuple[int, ...] = ()
            inv = np.zeros(p, dtype=np.int64)
            for a in range(1, p):
                inv[a] = pow(a, p - 2, p)
            self._inv = inv
            self.primitive_element = _smallest_primitive_root(p)
        else:
            self.modulus = minimal_primitive_polynomial(p, e)
            self._digits = ((np.arange(self.q)[:, None] // p ** np.arange(e)) % p).astype(np.int64)
            self._place = (p ** np.arange(e)).astype(np.int64)
            exp = np.zeros(self.q - 1, dtype=np.int64)
            power = [1] + [0] * (e - 1)
            x = [0, 1] + [0] * (e - 2)
            for i in range(self.q - 1):
                exp[i] = sum(c * p**j for j, c in enumerate(power))
                power = _poly_mulmod(power, x, list(self.modulus), p)
            log = np.zeros(self.q, dtype=np.int64)
            log[exp] = np.arange(self.q - 1)
            self._exp, self._log = exp, log
            self.primitive_element = p  # the residue class of x
        if self.q <= AXIOM_CHECK_MAX_ORDER:
            self.check_axioms()

    def __repr__(self):
        return f"GF({self.p}^{self.e})" if self.e > 1 else f"GF({self.p})"

    def __eq__(self, other):
        return isinstance(other, FiniteField) and (self.p, self.e) == (other.p, other.e)

    def __hash__(self):
        return hash((self.p, self.e))

    def __reduce__(self):
        return field_create, (self.p, self.e)

    @property
    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- elementwise arithmetic (broadcasting) -------------------------------

    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.e == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return ((self._digits[a] + self._digits[b]) % self.p) @ self._place

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.e == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return ((-self._digits[a]) % self.p) @ self._place

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.e == 1:
            return (a * b) % self.p
        res = self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, res)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        if self.e == 1:
            return self._inv[a]
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a: int, k: int) -> int:
        result = 1
        for _ in range(k):
            result = int(self.mul(result, a))
        return result

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.e == 1:
            return (A @ B) % self.p
        vec_a, vec_b = A.ndim == 1, B.ndim == 1
        A2 = A[None, :] if vec_a else A
        B2 = B[:, None] if vec_b else B
        acc = np.zeros((A2.shape[0], B2.shape[1]), dtype=np.int64)
        for t in range(A2.shape[1]):
            acc = self.add(acc, self.mul(A2[:, t, None], B2[None, t, :]))
        if vec_a:
            acc = acc[0]
        if vec_b:
            acc = acc[..., 0]
        return acc

    def check_axioms(self) -> None:
        """Exhaustive field-axiom check; raises TheoryViolation on failure."""
        el = self.elements
        add = self.add(el[:, None], el[None, :])
        mul = self.mul(el[:, None], el[None, :])
        if not (np.array_equal(add, add.T) and np.array_equal(mul, mul.T)):
            raise TheoryViolation(f"{self}: operations not commutative")
        if not (np.array_equal(add[0], el) and np.array_equal(mul[1], el)):
            raise TheoryViolation(f"{self}: identities fail")
        if not np.all(np.sum(add == 0, axis=1) == 1):
            raise TheoryViolation(f"{self}: missing additive inverse")
        if not np.all(mul[1:, 1:].max(axis=1) > 0) or not np.all(np.sum(mul[1:, 1:] == 1, axis=1) == 1):
            raise TheoryViolation(f"{self}: missing multiplicative inverse")
        for a in range(self.q):
            # (a+b)+c == a+(b+c);  (ab)c == a(bc);  a(b+c) == ab + ac
            if not np.array_equal(add[add[a]], add[a][add]):
                raise TheoryViolation(f"{self}: addition not associative")
            if not np.array_equal(mul[mul[a]], mul[a][mul]):
                raise TheoryViolation(f"{self}: multiplication not associative")
            if not np.array_equal(mul[a][add], add[mul[a][:, None], mul[a][None, :]]):
                raise TheoryViolation(f"{self}: distributivity fails")


def _smallest_primitive_root(p: int) -> int:
    if p == 2:
        return 1
    factors = prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // r, p) != 1 for r in factors):
            return g
    raise TheoryViolation(f"no primitive root mod {p}")


@functools.lru_cache(maxsize=None)
def _cached_field(p: int, e: int) -> FiniteField:
    return FiniteField(p, e)


def field_create(p: int, e: int = 1, cap: int = FIELD_ORDER_CAP) -> FiniteField:
    """Return GF(p^e); fields are cached and immutable."""
    if not is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    if e < 1:
        raise PreconditionError("extension degree must be positive")
    if p**e > cap:
        raise CapExceeded(f"field order {p}^{e} exceeds cap {cap}")
    return _cached_field(p, e)


def field_of_order(q: int) -> FiniteField:
    for p in range(2, q + 1):
        if q % p == 0:
            e, r = 0, q
            while r % p == 0:
                r //= p
                e += 1
            if r != 1 or not is_prime(p):
                break
            return field_create(p, e)
    raise PreconditionError(f"{q} is not a prime power")


# -- linear algebra ----------------------------------------------------------


def as_matrix(M, cols: int | None = None) -> np.ndarray:
    A = np.asarray(M, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(0 if A.size == 0 else 1, -1) if cols is None else A.reshape(-1, cols)
    if A.size == 0 and cols is not None and not (A.ndim == 2 and A.shape[1] == cols):
        A = A.reshape(0, cols)
    return A


def rref(field: FiniteField, M) -> tuple[np.ndarray, int, list[int]]:
    """Reduced row-echelon form ``(R, rank, pivot_columns)``.

    Pivots are taken leftmost-first, from the topmost available row; ``R``
    keeps the shape of ``M`` with zero rows at the bottom.
    """
    R = np.array(as_matrix(M), dtype=np.int64, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        if R[r, c] != 1:
            R[r] = field.mul(R[r], field.inv(R[r, c]))
        others = np.flatnonzero(R[:, c])
        others = others[others != r]
        if others.size:
            R[others] = field.sub(R[others], field.mul(R[others, c][:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, r, pivots


def rank(field: FiniteField, M) -> int:
    return rref(field, M)[1]


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of F_q^n stored by its canonical RREF basis (rows)."""

    field: FiniteField
    n: int
    basis: np.ndarray

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.field == other.field
            and self.n == other.n
            and self.basis.shape == other.basis.shape
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash((self.field, self.n, self.basis.shape, self.basis.tobytes()))

    def __repr__(self):
        return f"Subspace({self.field}, n={self.n}, k={self.k})"

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64).reshape(1, self.n)
        return rank(self.field, np.vstack([self.basis, v])) == self.k

    def issubspace(self, other: Subspace) -> bool:
        return subspace_sum(self, other) == other

    def elements(self, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
        """All vectors of the subspace in lexicographic order."""
        return span_elements(self, cap)


def row_space(field: FiniteField, M, n: int | None = None) -> Subspace:
    A = as_matrix(M, n)
    ncols = A.shape[1] if n is None else n
    if A.shape[1] != ncols:
        A = A.reshape(-1, ncols)
    R, r, _ = rref(field, A)
    basis = np.ascontiguousarray(R[:r])
    basis.setflags(write=False)
    return Subspace(field, ncols, basis)


def zero_space(field: FiniteField, n: int) -> Subspace:
    return row_space(field, np.zeros((0, n), dtype=np.int64), n)


def full_space(field: FiniteField, n: int) -> Subspace:
    return row_space(field, np.eye(n, dtype=np.int64), n)


def kernel(field: FiniteField, M, cols: int | None = None) -> Subspace:
    """``{v : M v = 0}`` as a subspace of F^cols."""
    A = as_matrix(M, cols)
    ncols = A.shape[1]
    R, r, pivots = rref(field, A)
    free = [c for c in range(ncols) if c not in set(pivots)]
    vecs = np.zeros((len(free), ncols), dtype=np.int64)
    for t, f in enumerate(free):
        vecs[t, f] = 1
        for row, pc in enumerate(pivots):
            vecs[t, pc] = field.neg(R[row, f])
    K = row_space(field, vecs, ncols)
    if K.k + r != ncols:
        raise TheoryViolation("rank-nullity fails")
    return K


def image(field: FiniteField, M, rows: int | None = None) -> Subspace:
    """Column space of ``M`` (the image of ``v -> M v``)."""
    A = np.asarray(M, dtype=np.int64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    nrows = A.shape[0] if rows is None else rows
    return row_space(field, A.reshape(nrows, -1).T, nrows)


def orthogonal_complement(S: Subspace) -> Subspace:
    return kernel(S.field, S.basis, S.n)


def _check_ambient(A: Subspace, B: Subspace):
    if A.field != B.field or A.n != B.n:
        raise PreconditionError(f"ambient mismatch: {A!r} vs {B!r}")


def subspace_sum(A: Subspace, B: Subspace) -> Subspace:
    _check_ambient(A, B)
    return row_space(A.field, np.vstack([A.basis, B.basis]), A.n)


def subspace_intersection(A: Subspace, B: Subspace) -> Subspace:
    """A ∩ B from the left kernel of the stacked bases."""
    _check_ambient(A, B)
    F = A.field
    stacked = np.vstack([A.basis, B.basis])
    coeffs = kernel(F, stacked.T, stacked.shape[0])  # (lambda, mu) with lambda A + mu B = 0
    inter = row_space(F, F.matmul(coeffs.basis[:, : A.k], A.basis), A.n)
    if inter.k + subspace_sum(A, B).k != A.k + B.k:
        raise TheoryViolation("modular dimension law fails")
    return inter


def solve(field: FiniteField, A, b) -> np.ndarray | None:
    """One solution ``x`` of ``A x = b`` (free variables zero), or None."""
    A = as_matrix(A)
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    rows, cols = A.shape
    aug = np.hstack([A, b.reshape(rows, 1)])
    R, r, pivots = rref(field, aug)
    if pivots and pivots[-1] == cols:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for row, pc in enumerate(pivots):
        x[pc] = R[row, cols]
    return x


def all_vectors(q: int, d: int) -> np.ndarray:
    """Every vector of F_q^d, lexicographic (first coordinate slowest)."""
    idx = np.arange(q**d, dtype=np.int64)
    powers = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def vectors_range(q: int, d: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = q ** np.arange(d - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


@functools.lru_cache(maxsize=256)
def _span_elements_cached(S: Subspace) -> np.ndarray:
    out = S.field.matmul(all_vectors(S.field.q, S.k), S.basis) if S.k else np.zeros((1, S.n), dtype=np.int64)
    out.setflags(write=False)
    return out


def span_elements(S: Subspace, cap: int = DEFAULT_ENUM_CAP) -> np.ndarray:
    # Message-lex order over an RREF basis is already codeword-lex order.
    if S.field.q**S.k > cap:
        raise CapExceeded(f"{S.field.q}^{S.k} elements exceed cap {cap}")
    return _span_elements_cached(S)


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise PreconditionError("a seed or generator is required")
    return np.random.default_rng(seed)


def random_subspace(field: FiniteField, n: int, k: int, seed) -> Subspace:
    """Uniform sample from Gr(n, k) by rejection on full-rank k x n matrices."""
    if not 0 <= k <= n:
        raise PreconditionError(f"need 0 <= k <= n, got k={k}, n={n}")
    rng = as_rng(seed)
    for _ in range(MAX_SAMPLING_ATTEMPTS):
        M = rng.integers(0, field.q, size=(k, n), dtype=np.int64)
        S = row_space(field, M, n)
        if S.k == k:
            return S
    raise RuntimeError(f"rejection sampling for Gr({n},{k}) failed {MAX_SAMPLING_ATTEMPTS} times")


def qbinom(n: int, k: int, q: int) -> int:
    """Gaussian binomial coefficient, exact; also checks the two-sided bound."""
    if not 0 <= k <= n:
        raise PreconditionError(f"need 0 <= k <= n, got k={k}, n={n}")
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (k - i) - 1
    value, rem = divmod(num, den)
    if rem:
        raise TheoryViolation("q-binomial is not an integer")
    lower = q ** (k * (n - k))
    if not lower <= value <= 4 * lower:
        raise TheoryViolation(f"q-binomial bound fails for n={n}, k={k}, q={q}")
    return value


def inverse(field: FiniteField, M) -> np.ndarray:
    """Inverse of a square invertible matrix."""
    A = as_matrix(M)
    n = A.shape[0]
    if A.shape != (n, n):
        raise PreconditionError("only square matrices have inverses")
    R, r, _ = rref(field, np.hstack([A, np.eye(n, dtype=np.int64)]))
    if r < n or not np.array_equal(R[:, :n], np.eye(n, dtype=np.int64)):
        raise PreconditionError("matrix is singular")
    return R[:, n:]


def kron_rows(field: FiniteField, A, B) -> np.ndarray:
    """All products ``a (x) b`` of rows of ``A`` and ``B``, flattened in C order."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = field.mul(A[:, None, :, None], B[None, :, None, :])
    return out.reshape(A.shape[0] * B.shape[0], A.shape[1] * B.shape[1])
