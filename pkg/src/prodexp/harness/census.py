"""Censuses of the expansion factor over random code pairs."""

from __future__ import annotations

import concurrent.futures
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .. import gf
from ..codes import code_from_space, format_code, is_css_pair
from ..errors import PreconditionError
from ..expansion.core import ENUM_CAP, enumeration_size, expansion_factor, greedy_decomposition
from ..expansion.structure import rank_bound_check
from ..expansion.testability import (
    certified_upper_bound,
    smb_expansion_check,
    smb_lower_bound,
    smb_parameters,
    rho_formula_value,
)
from ..product import CELL_CAP, CodeCollection, boxplus_basis
from .reports import fraction_str

VIOLATION_KEYS = ("upper_bound", "css_bound", "rank_bound", "smb_forward", "smb_backward")
HEURISTIC_SAMPLES = 32
RANK_SAMPLES = 16
SMB_CAP = 1 << 16


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment; ``seed`` has no default on purpose."""

    name: str
    q: int
    n: int
    k1: int
    k2: int
    trials: int
    seed: int
    cap_enum: int = ENUM_CAP
    cap_cells: int = CELL_CAP
    jobs: int = 1

    def __post_init__(self):
        if self.seed is None:
            raise PreconditionError("a seed is required")
        if self.trials < 0 or self.n < 1:
            raise PreconditionError("trials must be >= 0 and n >= 1")
        if not (0 <= self.k1 <= self.n and 0 <= self.k2 <= self.n):
            raise PreconditionError("need 0 <= k1, k2 <= n")
        if self.cap_enum <= 0 or self.cap_cells <= 0 or self.jobs < 1:
            raise PreconditionError("caps and job count must be positive")
        gf.field_of_order(self.q)


def trial_seed(seed: int, trial: int) -> int:
    """Sub-seed of one trial: the experiment seed XOR the trial index."""
    return int(seed) ^ int(trial)


@dataclass
class CensusReport:
    config: ExperimentConfig
    trials: list[dict] = field(default_factory=list)

    @property
    def violations(self) -> dict[str, int]:
        out = {k: 0 for k in VIOLATION_KEYS}
        for t in self.trials:
            for k, v in t["violations"].items():
                out[k] += v
        return out

    def exact_values(self) -> list[Fraction]:
        return [Fraction(t["rho"]) for t in self.trials if t["mode"] == "exact"]

    def summary(self) -> dict:
        cfg = self.config
        exact = sorted(self.exact_values())
        eps = Fraction(cfg.n - cfg.k1, cfg.n) * Fraction(cfg.n - cfg.k2, cfg.n)
        upper = eps + Fraction(1, cfg.n)
        formula = rho_formula_value(cfg.q, cfg.n, cfg.k1, cfg.k2)
        return {
            "trials": len(self.trials),
            "exact_trials": len(exact),
            "rho_min": fraction_str(exact[0]) if exact else None,
            "rho_median": fraction_str(exact[(len(exact) - 1) // 2]) if exact else None,
            "formula_lower_value": formula,
            "fraction_at_least_formula": (sum(r >= formula for r in exact) / len(exact)) if exact else None,
            "upper_bound_value": fraction_str(upper),
            "fraction_within_upper_bound": (sum(r <= upper for r in exact) / len(exact)) if exact else None,
            "violations": self.violations,
        }

    def to_dict(self) -> dict:
        return {"experiment": "census", "config": asdict(self.config), "summary": self.summary(), "trial_log": self.trials}


def _random_pair(cfg: ExperimentConfig, trial: int) -> CodeCollection:
    F = gf.field_of_order(cfg.q)
    rng = np.random.default_rng(trial_seed(cfg.seed, trial))
    C1 = code_from_space(gf.random_subspace(F, cfg.n, cfg.k1, rng))
    C2 = code_from_space(gf.random_subspace(F, cfg.n, cfg.k2, rng))
    return CodeCollection.of(C1, C2)


def run_trial(cfg: ExperimentConfig, trial: int) -> dict:
    coll = _random_pair(cfg, trial)
    n = cfg.n
    C1, C2 = coll
    eps = C1.redundancy * C2.redundancy
    upper = eps + Fraction(1, n)
    css = is_css_pair(C1, C2)
    viol = {k: 0 for k in VIOLATION_KEYS}
    rec = {
        "trial": trial,
        "seed": trial_seed(cfg.seed, trial),
        "c1": format_code(C1).strip().split("\n"),
        "c2": format_code(C2).strip().split("\n"),
        "css": css,
        "certified_upper": fraction_str(certified_upper_bound(coll, cfg.cap_enum)),
    }
    rng = np.random.default_rng(trial_seed(cfg.seed, trial) + (1 << 32))
    if enumeration_size(coll) <= cfg.cap_enum:
        rep = expansion_factor(coll, cfg.cap_enum, cfg.cap_cells)
        rho = rep.rho
        rec.update(mode="exact", rho=fraction_str(rho), estimated=None)
        viol["upper_bound"] = int(rho > upper)
        viol["css_bound"] = int(css and rho > Fraction(1, n))
        box = boxplus_basis(coll, cfg.cap_cells)
        if cfg.q**box.k <= SMB_CAP and box.k:
            s, m, beta = smb_parameters(rho, n)
            viol["smb_forward"] = int(not smb_expansion_check(coll, s, m, beta, SMB_CAP).holds)
            # any parameters that pass must imply a lower bound below rho
            for s2, m2, b2 in ((s, m, beta), (s / 2, m, beta / 2), (Fraction(1), Fraction(0), Fraction(1, n))):
                if smb_expansion_check(coll, s2, m2, b2, SMB_CAP).holds and smb_lower_bound(s2, b2, n) > rho:
                    viol["smb_backward"] += 1
    else:
        rec.update(mode="heuristic", rho=None)
        box = boxplus_basis(coll, cfg.cap_cells)
        ratios = []
        for _ in range(HEURISTIC_SAMPLES):
            msg = rng.integers(0, cfg.q, size=box.k)
            x = coll.field.matmul(msg, box.basis).reshape(coll.shape)
            if not x.any():
                continue
            dec = greedy_decomposition(x, coll)
            if dec is not None:
                ratios.append(int(np.count_nonzero(x)) / dec.unnormalized_cost)
        # a greedy cost only bounds one word's optimum from above, so this is an estimate
        rec["estimated"] = min(ratios) if ratios else None
    box = boxplus_basis(coll, cfg.cap_cells)
    for _ in range(RANK_SAMPLES):
        msg = rng.integers(0, cfg.q, size=box.k)
        x = coll.field.matmul(msg, box.basis).reshape(coll.shape)
        viol["rank_bound"] += int(not rank_bound_check(x, coll).holds)
    rec["violations"] = viol
    return rec


def run_expansion_census(cfg: ExperimentConfig) -> CensusReport:
    report = CensusReport(cfg)
    if cfg.jobs > 1 and cfg.trials > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            report.trials = list(pool.map(run_trial, [cfg] * cfg.trials, range(cfg.trials)))
    else:
        report.trials = [run_trial(cfg, t) for t in range(cfg.trials)]
    return report
