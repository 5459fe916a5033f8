import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from prodexp import gf
from prodexp.codes import format_code, parity_code, repetition_code
from prodexp.errors import PreconditionError, TheoryViolation
from prodexp.harness import cli, census, montecarlo
from prodexp.harness.demos import run_css_demo, run_rs_demo
from prodexp.harness.reports import SCHEMA, fraction_str, to_csv, to_json, word_str
from prodexp.product import format_word

F2 = gf.field_create(2)


def _cfg(**kw):
    base = dict(name="t", q=2, n=3, k1=1, k2=1, trials=4, seed=7)
    base.update(kw)
    return census.ExperimentConfig(**base)


def test_reports_serialization():
    assert fraction_str(Fraction(5, 9)) == "5/9" and fraction_str(Fraction(1)) == "1/1"
    assert word_str(np.array([[0, 0, 1], [1, 1, 0], [1, 1, 0]]), 2) == "3x3:001110110"
    doc = json.loads(to_json({"b": Fraction(1, 3), "a": np.int64(2)}))
    assert doc["schema"] == SCHEMA and doc["a"] == 2 and doc["b"] == "1/3"
    rows = list(csv.DictReader(io.StringIO(to_csv([{"x": 1, "y": {"z": 2}}]))))
    assert rows == [{"x": "1", "y.z": "2"}]


def test_config_validation():
    with pytest.raises(PreconditionError):
        _cfg(seed=None)
    with pytest.raises(PreconditionError):
        _cfg(k1=4)
    with pytest.raises(PreconditionError):
        _cfg(q=6)


def test_census_is_deterministic():
    a = census.run_expansion_census(_cfg(trials=6))
    b = census.run_expansion_census(_cfg(trials=6))
    assert json.dumps(a.to_dict(), default=str) == json.dumps(b.to_dict(), default=str)
    assert census.trial_seed(7, 3) == 7 ^ 3
    c = census.run_expansion_census(_cfg(trials=6, seed=8))
    assert [t["c1"] for t in c.trials] != [t["c1"] for t in a.trials]


def test_census_with_no_trials():
    rep = census.run_expansion_census(_cfg(trials=0))
    s = rep.summary()
    assert s["trials"] == 0 and s["rho_min"] is None
    assert all(v == 0 for v in s["violations"].values())


def test_census_degenerate_pairs_give_one_over_n():
    rep = census.run_expansion_census(_cfg(k2=3, trials=5))
    assert {t["rho"] for t in rep.trials} == {"1/3"}
    assert all(v == 0 for v in rep.violations.values())


def test_census_heuristic_mode_when_capped():
    rep = census.run_expansion_census(_cfg(n=4, k1=2, k2=2, trials=2, cap_enum=16))
    assert all(t["mode"] == "heuristic" and t["rho"] is None for t in rep.trials)


def test_intersection_frequency_trivial_and_exact_cases():
    always = montecarlo.run_lemma3_montecarlo(2, 4, 2, 2, 0, 50, 1)
    assert always.hits == 50
    never = montecarlo.run_lemma3_montecarlo(2, 4, 0, 2, 1, 50, 1)
    assert never.hits == 0
    # a random line in F_2^3 equals a fixed one with probability 1/7
    rep = montecarlo.run_lemma3_montecarlo(2, 3, 1, 1, 1, 20_000, 3)
    p = 1 / 7
    assert abs(rep.frequency - p) <= 5 * np.sqrt(p * (1 - p) / 20_000)
    assert rep.within_bound


def test_fixed_word_frequency_and_cross_checks():
    eye = np.eye(4, dtype=np.int64)
    rep = montecarlo.run_lemma4_montecarlo(2, eye, 4, 4, 30, 2)
    assert rep.hits == 0  # both codes are zero
    rep = montecarlo.run_lemma4_montecarlo(2, eye, 2, 2, 200, 2)
    assert rep.notes["cross_checked"] == 100 and rep.notes["cross_check_mismatches"] == 0
    with pytest.raises(PreconditionError):
        montecarlo.run_lemma4_montecarlo(2, np.diag([1, 0, 0, 0]), 2, 2, 10, 2)


def test_sparse_property_report_flags_vacuity():
    rep = montecarlo.run_lemma5_montecarlo(2, 6, 3, 20, 4)
    assert rep.notes["vacuous"] and rep.hits == 0
    forced = montecarlo.run_lemma5_montecarlo(2, 6, 3, 20, 4, alpha=0.34)
    assert not forced.notes["vacuous"]


def test_css_demo_rows():
    doc = run_css_demo(range(3, 6))
    assert [r["n"] for r in doc["rows"]] == [3, 4, 5]
    assert all(r["css"] and r["at_most_one_over_n"] for r in doc["rows"])


def test_rs_demo_containment():
    doc = run_rs_demo((5,))
    for r in doc["rows"]:
        assert r["dual_contained"] == r["rate_sum_at_least_one"]
        assert r["dual_is_rs"]
        if r["dual_contained"]:
            assert Fraction(r["rho_upper"]) <= Fraction(1, 5)


# -- command line ---------------------------------------------------------------


@pytest.fixture
def code_files(tmp_path):
    rep, even = tmp_path / "rep3.code", tmp_path / "even3.code"
    rep.write_text(format_code(repetition_code(F2, 3)))
    even.write_text(format_code(parity_code(F2, 3)))
    return str(rep), str(even)


def test_cli_rho(code_files, capsys):
    rep, _ = code_files
    assert cli.main(["rho", "--c1", rep, "--c2", rep]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rho"] == "5/9" and doc["argmin"] == "3x3:001110110" and doc["schema"] == SCHEMA


def test_cli_other_constants(code_files, capsys):
    rep, even = code_files
    assert cli.main(["robust", "--c1", rep, "--c2", rep]) == 0
    assert json.loads(capsys.readouterr().out)["robustness"] == "1/2"
    assert cli.main(["agree", "--c1", rep, "--c2", even, "--method", "direct"]) == 0
    assert json.loads(capsys.readouterr().out)["agreement"] == "1/3"
    assert cli.main(["cheeger", "--c1", rep, "--c2", rep]) == 0
    assert json.loads(capsys.readouterr().out)["rho_from_cheeger"] == "5/9"


def test_cli_decompose(code_files, tmp_path, capsys):
    rep, _ = code_files
    word = tmp_path / "x.word"
    word.write_text(format_word(np.array([[0, 0, 1], [1, 1, 0], [1, 1, 0]]), 2))
    assert cli.main(["decompose", "--c1", rep, "--c2", rep, "--word", str(word)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["success"] and doc["ratio"] == "5/9"


def test_cli_census_csv(tmp_path):
    out = tmp_path / "census.csv"
    args = ["census", "--q", "2", "--n", "3", "--k1", "1", "--k2", "2", "--trials", "3", "--seed", "5"]
    assert cli.main(args + ["--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 and "violations.upper_bound" in rows[0]


def test_cli_exit_codes(code_files, tmp_path, monkeypatch):
    rep, _ = code_files
    assert cli.main([]) == 64
    with pytest.raises(SystemExit) as exc:
        cli.main(["rho", "--c1", rep])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        cli.main(["census", "--q", "2", "--n", "3", "--k1", "1", "--k2", "1", "--trials", "1"])
    assert exc.value.code == 64  # seed is mandatory
    assert cli.main(["rho", "--c1", rep, "--c2", str(tmp_path / "missing")]) == 2
    assert cli.main(["rho", "--c1", rep, "--c2", rep, "--cap-enum", "4"]) == 2

    def broken(*a, **k):
        raise TheoryViolation("forced")

    monkeypatch.setattr(cli, "expansion_factor", broken)
    assert cli.main(["rho", "--c1", rep, "--c2", rep]) == 3


def test_cli_montecarlo(capsys):
    assert cli.main(["mc-lemma3", "--q", "2", "--n", "4", "--u", "2", "--v", "2", "--k", "1", "--trials", "200", "--seed", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["trials"] == 200 and doc["within_bound"]


def test_census_parallel_matches_serial():
    serial = census.run_expansion_census(_cfg(trials=4))
    parallel = census.run_expansion_census(_cfg(trials=4, jobs=2))
    assert serial.trials == parallel.trials
