"""Monte-Carlo checks of the probability bounds for random subspaces and codes.

Each check compares an empirical frequency ``f`` over ``N`` trials with a
bound ``b`` and passes when ``f <= b + 3 sigma`` where
``sigma = sqrt(p (1 - p) / N)`` and ``p = min(b, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import gf
from ..errors import PreconditionError
from ..expansion.structure import has_property_star, sparseness_threshold
from ..product import CodeCollection, boxplus_basis
from ..codes import code_from_space

CROSS_CHECKS = 100


@dataclass(frozen=True)
class MonteCarloReport:
    experiment: str
    params: dict
    trials: int
    hits: int
    bound: float
    seed: int
    notes: dict

    @property
    def frequency(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    @property
    def sigma(self) -> float:
        p = min(self.bound, 1.0)
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    @property
    def within_bound(self) -> bool:
        return self.frequency <= self.bound + 3 * self.sigma

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "trials": self.trials,
            "hits": self.hits,
            "frequency": self.frequency,
            "bound": self.bound,
            "sigma": self.sigma,
            "within_bound": self.within_bound,
            "seed": self.seed,
            **self.notes,
        }


def _intersection_dim(F, U: gf.Subspace, V: gf.Subspace) -> int:
    return U.k + V.k - gf.rank(F, np.vstack([U.basis, V.basis]))


def run_lemma3_montecarlo(q: int, n: int, u: int, v: int, k: int, trials: int, seed: int) -> MonteCarloReport:
    """Frequency of ``dim(U ∩ V) >= k`` for uniform ``U`` in Gr(n, u).

    ``V`` is the span of the first ``v`` unit vectors; the distribution of
    ``dim(U ∩ V)`` does not depend on which ``v``-space is fixed.
    """
    if not (0 <= u <= n and 0 <= v <= n and k >= 0):
        raise PreconditionError("need 0 <= u, v <= n and k >= 0")
    F = gf.field_of_order(q)
    V = gf.row_space(F, np.eye(n, dtype=np.int64)[:v], n)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        U = gf.random_subspace(F, n, u, rng)
        hits += _intersection_dim(F, U, V) >= k
    bound = 4.0 * float(q) ** (-k * (n + k - v - u))
    return MonteCarloReport("lemma3", {"q": q, "n": n, "u": u, "v": v, "k": k}, trials, hits, bound, seed, {})


def run_lemma4_montecarlo(q: int, x, r1: int, r2: int, trials: int, seed: int) -> MonteCarloReport:
    """Frequency of ``x`` in C1 ⊞ C2 for ``C_i`` uniform of codimension ``r_i``.

    Membership is decided by ``H1 x H2^T = 0``; on up to 100 trials it is
    also decided by subspace membership and the two answers compared.
    """
    F = gf.field_of_order(q)
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[0]
    if x.shape != (n, n):
        raise PreconditionError("x must be square")
    if min(r1, r2) < 2:
        raise PreconditionError("the bound needs min(r1, r2) >= 2")
    if gf.rank(F, x) < min(r1, r2):
        raise PreconditionError("x must have rank at least min(r1, r2)")
    rng = np.random.default_rng(seed)
    hits = mismatches = checked = 0
    for t in range(trials):
        C1 = code_from_space(gf.random_subspace(F, n, n - r1, rng))
        C2 = code_from_space(gf.random_subspace(F, n, n - r2, rng))
        inside = not np.any(F.matmul(F.matmul(C1.parity, x), C2.parity.T))
        hits += inside
        if t < CROSS_CHECKS:
            checked += 1
            via_span = boxplus_basis(CodeCollection.of(C1, C2)).contains(x.reshape(-1))
            mismatches += via_span != inside
    bound = 5.0 * float(q) ** (-r1 * r2 / 4)
    notes = {"cross_checked": checked, "cross_check_mismatches": mismatches}
    return MonteCarloReport("lemma4", {"q": q, "n": n, "r1": r1, "r2": r2}, trials, hits, bound, seed, notes)


def run_lemma5_montecarlo(q: int, n: int, r: int, trials: int, seed: int, alpha=None) -> MonteCarloReport:
    """Frequency with which uniform ``U`` in Gr(n, n - r) fails property (*).

    ``alpha`` defaults to ``H_q^{-1}(r / 8n)``; the report flags the case
    ``alpha * n < 1`` where no nonzero vector is sparse and the property
    holds trivially.
    """
    if not 1 <= r <= n:
        raise PreconditionError("need 1 <= r <= n")
    F = gf.field_of_order(q)
    a = sparseness_threshold(q, n, r) if alpha is None else float(alpha)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        U = gf.random_subspace(F, n, n - r, rng)
        hits += has_property_star(U, r, a) is not True
    t = float(q) ** (-r / 8)
    bound = 4 * t / (1 - t)
    notes = {"alpha": a, "vacuous": math.floor(a * n) < 1}
    return MonteCarloReport("lemma5", {"q": q, "n": n, "r": r}, trials, hits, bound, seed, notes)
