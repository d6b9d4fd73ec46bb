import json
from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from watsonlab import closedform
from watsonlab.mpnum import PrecisionCtx
from watsonlab.verify import (CASE_ORDER, GRID, RELATIONS, SUITE_ORDER,
                              SamplingExhausted, SplitMix64, UnknownRelation,
                              _case_id, _recurrence_constraints, _relation_seed,
                              check_debranges, check_macrobert, check_relation,
                              check_thomae, sample_params, transcription_diff)

CTX = PrecisionCtx(digits=30)
FAST = PrecisionCtx(digits=20)


def test_splitmix64_reference_vectors():
    # canonical outputs of the splitmix64 update for seeds 0 and 1234567
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(3)] == [
        16294208416658607535, 7960286522194355700, 487617019471545679]
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_sample_params_deterministic_and_in_window():
    cons = _recurrence_constraints(0, 0)
    t1 = sample_params(42, 7, cons, CTX)
    t2 = sample_params(42, 7, cons, CTX)
    assert t1 == t2
    a, b, c = t1
    with CTX.working():
        s = float(c + mpf(1) / 2 - (a + b) / 2)
    assert 0.75 - 1e-9 <= s <= 3.0 + 1e-9


def test_sample_params_exhausts_on_empty_window():
    from dataclasses import replace
    cons = replace(_recurrence_constraints(0, 0), s_lo=2.0, s_hi=1.0)
    with pytest.raises(SamplingExhausted):
        sample_params(1, 1, cons, CTX)


def test_grid_and_case_list():
    assert len(GRID) == 77
    assert len(CASE_ORDER) == 19
    assert CASE_ORDER[0] == (0, 0) and CASE_ORDER[-1] == (-1, -2)
    assert _case_id(2, -1) == "case_2_m1"
    assert _case_id(-5, 0) == "case_m5_0"


def test_unknown_relation():
    with pytest.raises(UnknownRelation):
        check_relation("nosuch", 5, 0, CTX)


def test_watson_identity_and_registry_promotion():
    closedform.reset_registry()
    rep = check_relation("watson_00", 100, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"
    assert rep.n_converged >= 100
    assert float(rep.worst_rel_residual) <= 10 ** (-FAST.digits / 3)
    assert closedform.registry_verdict("watson_00").status == "verified"
    closedform.reset_registry()


def test_lavoie_minus_refuted_with_probe_counterexample():
    closedform.reset_registry()
    rep = check_relation("lavoie_minus", 12, 0xC0FFEE, FAST)
    assert rep.verdict == "not_identity"
    ce = rep.counterexample
    assert ce.params == {"a": Fraction(1, 2), "b": Fraction(1, 2), "c": Fraction(2)}
    assert float(ce.rel_residual) > 0.01
    assert closedform.registry_verdict("lavoie_minus").status == "refuted"
    closedform.reset_registry()


def test_three_term_printed_counterexample_is_first_probe():
    rep = check_relation("three_term_printed", 6, 0xC0FFEE, FAST)
    assert rep.verdict == "not_identity"
    ce = rep.counterexample
    assert ce.kind == "probe"
    assert ce.lattice_indices == (0, 0)
    assert ce.params["a"] == 0 and ce.params["b"] == 1 and ce.params["c"] == 2
    assert ce.lhs == 1 and ce.rhs == 2


def test_three_term_corrected_identity():
    rep = check_relation("three_term_corrected", 25, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"
    assert float(rep.worst_rel_residual) <= 1e-6


def test_recurrence_probes_exact_and_identity():
    rep = check_relation("recurrence_16", 15, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"
    probes = [s for s in rep.samples if s.kind == "probe"]
    assert probes, "deterministic probes must be prepended"
    assert all(s.exact and s.abs_residual == 0 for s in probes)


def test_transcription_diff_flags_only_case_2_m1():
    for (i, j) in CASE_ORDER:
        flags = transcription_diff(i, j)
        if (i, j) == (2, -1):
            assert len(flags) == 1
            assert "(a+b+4)/2" in flags[0] and "(a+b+5)/2" in flags[0]
        else:
            assert flags == []


def test_case_report_carries_flags():
    rep = check_relation("case_2_m1", 5, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"     # the regenerated relation is true
    assert any("(a+b+4)/2" in f for f in rep.transcription_flags)
    rep = check_relation("case_0_0", 5, 0xC0FFEE, FAST)
    assert rep.transcription_flags == ()


def test_thomae_and_macrobert():
    rep = check_thomae(10, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"
    # the a = 0 probe is recorded but cannot converge (prefactor zero times a
    # divergent series); it must not count toward the verdict
    assert any(not s.converged for s in rep.samples if s.kind == "probe")
    rep = check_macrobert(10, 0xC0FFEE, FAST)
    assert rep.verdict == "identity"
    x0 = [s for s in rep.samples if s.kind == "probe"][0]
    assert x0.abs_residual == 0          # x = 0 makes both sides exactly 1


def test_debranges_grid():
    rep = check_debranges(None, FAST)
    assert rep.verdict == "identity"
    assert rep.n_converged == len(rep.samples) == 1270
    assert all(s.exact for s in rep.samples)
    assert all(s.lhs > 0 for s in rep.samples)
    # spec'd spot value: n=1, alpha=1, x=1/2 gives 3/4
    spot = [s for s in rep.samples
            if s.params["n"] == 1 and s.params["alpha"] == 1 and s.params["x"] == Fraction(1, 2)]
    assert spot and spot[0].lhs == Fraction(3, 4)


def test_debranges_custom_grid():
    rep = check_debranges({"n_max": 3,
                           "alphas": (Fraction(-1, 2), Fraction(2)),
                           "xs": (Fraction(0), Fraction(1, 2))}, FAST)
    assert rep.verdict == "identity"
    assert len(rep.samples) == 16


def test_check_relation_deterministic():
    r1 = check_relation("macrobert", 8, 0xBEEF, FAST)
    r2 = check_relation("macrobert", 8, 0xBEEF, FAST)
    assert json.dumps(r1.as_dict(include_samples=True)) == \
        json.dumps(r2.as_dict(include_samples=True))


def test_monotone_precision_watson():
    lo = check_relation("watson_00", 10, 0xC0FFEE, FAST)
    hi = check_relation("watson_00", 10, 0xC0FFEE, PrecisionCtx(digits=40))
    assert lo.verdict == "identity" and hi.verdict == "identity"
    closedform.reset_registry()


def test_relation_seed_mixing_stable():
    assert _relation_seed(0, "watson_00") == _relation_seed(0, "watson_00")
    assert _relation_seed(0, "watson_00") != _relation_seed(0, "gauss")


def test_suite_order_and_expectations():
    assert SUITE_ORDER[0] == "gauss"
    assert SUITE_ORDER[4] == "recurrence_16"
    assert SUITE_ORDER[5] == "case_0_0"
    assert SUITE_ORDER[-1] == "debranges"
    assert len(SUITE_ORDER) == 5 + 19 + 5
    assert RELATIONS["three_term_printed"].expected_identity is False
    assert RELATIONS["lavoie_minus"].expected_identity is False
    assert RELATIONS["lavoie_plus"].expected_identity is True


def test_parallel_tasks_match_sequential():
    seq = check_relation("case_1_0", 6, 0xC0FFEE, FAST, threads=1)
    par = check_relation("case_1_0", 6, 0xC0FFEE, FAST, threads=2)
    assert json.dumps(seq.as_dict(include_samples=True)) == \
        json.dumps(par.as_dict(include_samples=True))
