"""Small tabulations: CSS pairs and Reed-Solomon pairs are poor expanders."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .. import gf
from ..codes import dual, is_css_pair, parity_code, reed_solomon, repetition_code
from ..errors import CapExceeded
from ..expansion.core import ENUM_CAP, enumeration_size, expansion_factor, min_cost_decomposition
from ..expansion.testability import cover_upper_bound
from ..product import CodeCollection, boxplus_membership
from .reports import fraction_str


def identity_bound(coll: CodeCollection, cap: int = ENUM_CAP) -> tuple[Fraction, str]:
    """Upper bound on rho from the identity matrix (a boxplus word for CSS pairs)."""
    n = coll.shape[0]
    eye = np.eye(n, dtype=np.int64)
    try:
        dec = min_cost_decomposition(eye, coll, cap)
        return Fraction(n, dec.unnormalized_cost), "identity-exact-cost"
    except CapExceeded:
        return cover_upper_bound(eye, coll), "identity-line-cover"


def run_css_demo(ns=range(3, 8), cap: int = ENUM_CAP) -> dict:
    """Repetition code paired with the even-weight code for each length."""
    F = gf.field_create(2)
    rows = []
    for n in ns:
        coll = CodeCollection.of(repetition_code(F, n), parity_code(F, n))
        row = {"n": n, "css": is_css_pair(*coll), "one_over_n": fraction_str(Fraction(1, n))}
        if enumeration_size(coll) <= cap:
            rho = expansion_factor(coll, cap).rho
            row.update(rho=fraction_str(rho), method="exact", at_most_one_over_n=rho <= Fraction(1, n))
        else:
            bound, how = identity_bound(coll, cap)
            row.update(rho_upper=fraction_str(bound), method=how, at_most_one_over_n=bound <= Fraction(1, n))
        rows.append(row)
    return {"experiment": "demo-css", "rows": rows}


def rs_pairs(q: int) -> list[tuple[int, int]]:
    return [(1, 1), (2, q - 3), (2, q - 2), (q // 2, q - q // 2)]


def run_rs_demo(qs=(5, 7, 8), cap: int = ENUM_CAP) -> dict:
    """For Reed-Solomon pairs, k1 + k2 >= q makes the dual of the first code
    sit inside the second, and then the identity matrix bounds rho by 1/q."""
    rows = []
    for q in qs:
        for k1, k2 in rs_pairs(q):
            R1, R2 = reed_solomon(q, k1), reed_solomon(q, k2)
            contained = dual(R1).space.issubspace(R2.space)
            coll = CodeCollection.of(R1, R2)
            row = {
                "q": q,
                "k1": k1,
                "k2": k2,
                "rate_sum_at_least_one": k1 + k2 >= q,
                "dual_contained": contained,
                "dual_is_rs": dual(R1) == reed_solomon(q, q - k1),
            }
            if boxplus_membership(np.eye(q, dtype=np.int64), coll):
                bound, how = identity_bound(coll, cap)
                row.update(rho_upper=fraction_str(bound), method=how)
            rows.append(row)
    return {"experiment": "demo-rs", "rows": rows}
