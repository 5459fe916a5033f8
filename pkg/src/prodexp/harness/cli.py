"""Command-line entry point.

Exit codes: 0 success, 2 precondition or cap failure, 3 a mathematical
statement failed (including nonzero rigorous-bound violation counters),
64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from ..codes import load_code
from ..complexes import cheeger_constant, collection_complex
from ..errors import CapExceeded, PreconditionError, TheoryViolation
from ..expansion.core import ENUM_CAP, expansion_factor, greedy_decomposition, min_cost_decomposition
from ..expansion.testability import agreement_test_constant, robustness_constant
from ..product import CELL_CAP, CodeCollection, load_word
from . import census, demos, montecarlo
from .reports import fraction_str, to_csv, to_json, word_str

EXIT_OK, EXIT_PRECONDITION, EXIT_THEORY, EXIT_USAGE = 0, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, seed_required: bool = False):
    p.add_argument("--seed", type=int, required=seed_required, help="random seed (unsigned 64-bit)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cap-cells", type=int, default=CELL_CAP)
    p.add_argument("--cap-enum", type=int, default=ENUM_CAP)
    p.add_argument("--out", help="write the report here instead of stdout")


def _codes(p):
    p.add_argument("--c1", required=True, help="code file for the first code")
    p.add_argument("--c2", required=True, help="code file for the second code")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prodexp", description="Expansion of tensor and dual tensor codes")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    for name, helptext in (
        ("rho", "exact product-expansion factor"),
        ("robust", "exact robust-testability constant"),
        ("agree", "exact agreement-testability constant"),
        ("cheeger", "Cheeger constant of the code pair's complex"),
    ):
        p = sub.add_parser(name, help=helptext)
        _codes(p)
        p.add_argument("--c3", help="optional third code")
        _common(p)
        if name == "agree":
            p.add_argument("--method", choices=("reduction", "direct"), default="reduction")

    p = sub.add_parser("census", help="expansion census over random code pairs")
    for flag in ("--q", "--n", "--k1", "--k2", "--trials"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _common(p, seed_required=True)

    p = sub.add_parser("mc-lemma3", help="intersection dimension of random subspaces")
    for flag in ("--q", "--n", "--u", "--v", "--k", "--trials"):
        p.add_argument(flag, type=int, required=True)
    _common(p, seed_required=True)

    p = sub.add_parser("mc-lemma4", help="fixed high-rank word in random boxplus codes")
    for flag in ("--q", "--n", "--r1", "--r2", "--trials"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--word", help="word file (default: identity matrix)")
    _common(p, seed_required=True)

    p = sub.add_parser("mc-lemma5", help="sparse-subspace property of random codes")
    for flag in ("--q", "--n", "--r", "--trials"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--alpha", type=float, help="override the sparseness threshold")
    _common(p, seed_required=True)

    p = sub.add_parser("demo-css", help="CSS pairs have expansion at most 1/n")
    _common(p)
    p = sub.add_parser("demo-rs", help="Reed-Solomon pairs with rate sum at least one")
    _common(p)

    p = sub.add_parser("decompose", help="decompose a boxplus word")
    _codes(p)
    p.add_argument("--c3", help="optional third code")
    p.add_argument("--word", required=True)
    p.add_argument("--method", choices=("exact", "greedy"), default="exact")
    _common(p)
    return parser


def _collection(args) -> CodeCollection:
    codes = [load_code(args.c1), load_code(args.c2)]
    if getattr(args, "c3", None):
        codes.append(load_code(args.c3))
    return CodeCollection(tuple(codes))


def _run(args) -> tuple[dict | list, int]:
    cmd = args.command
    if cmd in ("rho", "robust", "agree", "cheeger", "decompose"):
        coll = _collection(args)
        inst = coll.describe()
        if cmd == "rho":
            return expansion_factor(coll, args.cap_enum, args.cap_cells).to_dict(), EXIT_OK
        if cmd == "robust":
            value = robustness_constant(coll, args.cap_enum)
            return {"experiment": "robust", "instance": inst, "robustness": fraction_str(value)}, EXIT_OK
        if cmd == "agree":
            value = agreement_test_constant(coll, args.method, args.cap_enum)
            return {"experiment": "agree", "instance": inst, "method": args.method, "agreement": fraction_str(value)}, EXIT_OK
        if cmd == "cheeger":
            cx = collection_complex(coll)
            h = cheeger_constant(cx, coll.m - 1, args.cap_enum)
            doc = {"experiment": "cheeger", "instance": inst, "complex": cx.summary(), "cheeger": fraction_str(h)}
            doc["rho_from_cheeger"] = None if h is None else fraction_str(h / coll.m)
            return doc, EXIT_OK
        q, x = load_word(args.word)
        if q != coll.field.q:
            raise PreconditionError("word and codes use different fields")
        dec = min_cost_decomposition(x, coll, args.cap_enum) if args.method == "exact" else greedy_decomposition(x, coll)
        doc = {"experiment": "decompose", "instance": inst, "method": args.method, "word": word_str(x, q)}
        if dec is None:
            doc.update(success=False)
        else:
            doc.update(
                success=True,
                components=[word_str(a, q) for a in dec.components],
                cost=fraction_str(dec.cost),
                ratio=fraction_str(Fraction(int(np.count_nonzero(x)), dec.unnormalized_cost)) if np.any(x) else None,
            )
        return doc, EXIT_OK
    if cmd == "census":
        cfg = census.ExperimentConfig(
            "census", args.q, args.n, args.k1, args.k2, args.trials, args.seed, args.cap_enum, args.cap_cells, args.jobs
        )
        rep = census.run_expansion_census(cfg)
        code = EXIT_THEORY if any(rep.violations.values()) else EXIT_OK
        return (rep.trials if args.format == "csv" else rep.to_dict()), code
    if cmd.startswith("mc-"):
        if cmd == "mc-lemma3":
            rep = montecarlo.run_lemma3_montecarlo(args.q, args.n, args.u, args.v, args.k, args.trials, args.seed)
        elif cmd == "mc-lemma4":
            x = load_word(args.word)[1] if args.word else np.eye(args.n, dtype=np.int64)
            rep = montecarlo.run_lemma4_montecarlo(args.q, x, args.r1, args.r2, args.trials, args.seed)
        else:
            rep = montecarlo.run_lemma5_montecarlo(args.q, args.n, args.r, args.trials, args.seed, args.alpha)
        doc = rep.to_dict()
        bad = not rep.within_bound or doc.get("cross_check_mismatches", 0)
        return doc, EXIT_THEORY if bad else EXIT_OK
    if cmd == "demo-css":
        doc = demos.run_css_demo(cap=args.cap_enum)
        return doc, EXIT_OK if all(r["at_most_one_over_n"] for r in doc["rows"]) else EXIT_THEORY
    if cmd == "demo-rs":
        doc = demos.run_rs_demo(cap=args.cap_enum)
        ok = all(r["dual_contained"] == r["rate_sum_at_least_one"] for r in doc["rows"])
        return doc, EXIT_OK if ok else EXIT_THEORY
    raise PreconditionError(f"unknown command {cmd}")


def _emit(doc, fmt: str, out: str | None):
    if fmt == "csv":
        rows = doc if isinstance(doc, list) else doc.get("rows", [doc])
        text = to_csv(rows)
    else:
        text = to_json(doc if isinstance(doc, dict) else {"rows": doc})
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        doc, code = _run(args)
    except (PreconditionError, CapExceeded, OSError) as exc:
        print(f"prodexp: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except TheoryViolation as exc:
        print(f"prodexp: theory violation: {exc}", file=sys.stderr)
        return EXIT_THEORY
    _emit(doc, args.format, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
