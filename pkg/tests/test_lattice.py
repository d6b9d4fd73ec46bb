import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from watsonlab import closedform
from watsonlab.lattice import (DivergentPoint, PreconditionViolation,
                               UnsupportedIndex, WatsonPoint, eval_point,
                               margin, recurrence_residual, reduce_to_watson,
                               three_term_corrected, three_term_printed, to_pfq)
from watsonlab.mpnum import PrecisionCtx
from watsonlab.series import eval_unit

CTX = PrecisionCtx(digits=30)

PI2_4 = "2.4674011002723396547086227499690377838284248518102"
PI2_4_M1 = "1.4674011002723396547086227499690377838284248518102"

rational = st.fractions(min_value=Fraction(1, 10), max_value=3, max_denominator=24)


def test_to_pfq_examples():
    f = to_pfq(WatsonPoint(1, 1, 1, 0, 0))
    assert f.numerators == (1, 1, 1)
    assert f.denominators == (Fraction(3, 2), 2)
    f = to_pfq(WatsonPoint(1, 1, 1, 0, 1))
    assert f.denominators == (Fraction(3, 2), 3)
    f = to_pfq(WatsonPoint(Fraction(1, 2), Fraction(1, 2), 2, 0, -1))
    assert f.denominators == (Fraction(1), 3)
    assert f.argument == 1


@pytest.mark.parametrize("point, expected", [
    (WatsonPoint(1, 1, 1, 0, 0), Fraction(1, 2)),
    (WatsonPoint(1, 1, 1, 0, 1), Fraction(3, 2)),
    (WatsonPoint(Fraction(1, 2), Fraction(1, 2), 2, 0, -1), Fraction(1)),
])
def test_margin_examples(point, expected):
    assert margin(point) == expected


@given(rational, rational, rational,
       st.integers(min_value=-5, max_value=5), st.integers(min_value=-3, max_value=3))
@settings(max_examples=100, deadline=None)
def test_margin_invariant_under_unit_shift(a, b, c, i, j):
    # the shift (a,b,c) -> (a+1,b+1,c+1) leaves the excess fixed, which is what
    # makes the main recurrence self-consistent
    p = WatsonPoint(a, b, c, i, j)
    assert margin(p.shift_abc(1)) == margin(p)


def test_eval_point_exact_zero():
    res = eval_point(WatsonPoint(Fraction(-1), Fraction(1), Fraction(1), 0, 0), CTX)
    assert res.exact_value == 0 and res.method == "exact_rational"


def test_eval_point_watson_value():
    res = eval_point(WatsonPoint(1, 1, 1, 0, 0), CTX, tol=mpf(10) ** -25)
    with CTX.working(5):
        assert abs(res.value - mpf(PI2_4)) <= mpf(10) ** -25


def test_eval_point_series_row_away_from_base():
    # (i, j) = (2, 0) has no closed form; a loose direct summation is the oracle
    from watsonlab.series import _direct_unit
    p = WatsonPoint(1, 1, 1, 2, 0)
    res = eval_point(p, CTX, tol=mpf(10) ** -20)
    with CTX.working():
        # algebraic n**-2.5 tail: 1e-5 is what 10k direct terms can certify
        oracle = _direct_unit(to_pfq(p), CTX, mpf(10) ** -5, 10000, mpf(1.5))
        assert oracle is not None and oracle.converged
        assert abs(res.value - oracle.value) <= oracle.abs_err_bound + res.abs_err_bound


def test_eval_point_divergent():
    with pytest.raises(DivergentPoint):
        eval_point(WatsonPoint(2, 2, 1, 0, 0), CTX)


def test_eval_point_closed_form_fast_path_requires_verified():
    closedform.reset_registry()
    p = WatsonPoint(1, 1, 1, 0, 0)
    assert eval_point(p, CTX).method == "accelerated"
    try:
        closedform.record_adjudication("watson_00", "identity", 150, mpf("1e-25"), ("t", 0, 30, 150))
        res = eval_point(p, CTX)
        assert res.method == "closed_form"
        with CTX.working(5):
            assert abs(res.value - mpf(PI2_4)) <= mpf(10) ** (8 - CTX.digits)
        # series-only callers bypass the fast path even when verified
        assert eval_point(p, CTX, use_closed_forms=False).method == "accelerated"
    finally:
        closedform.reset_registry()


def test_recurrence_exact_probes():
    inst = recurrence_residual(WatsonPoint(Fraction(-1), Fraction(1), Fraction(1), 0, 0), CTX)
    assert inst.exact and inst.abs_residual == 0
    assert inst.lhs == Fraction(2, 3) and inst.rhs == Fraction(2, 3)
    # a = 0 collapses both sides to (2c+j) and kills the shifted term
    inst = recurrence_residual(WatsonPoint(Fraction(0), Fraction(3, 2), Fraction(5, 4), 0, 0), CTX)
    assert inst.exact and inst.abs_residual == 0


def test_recurrence_numeric_at_base():
    inst = recurrence_residual(WatsonPoint(1, 1, 1, 0, 0), CTX, tol=mpf(10) ** -20)
    assert inst.converged
    assert float(inst.rel_residual) <= 1e-18
    # lhs = 2 (pi^2/4 - 1), rhs = 2 pi^2/4 - (2/9) * 9
    with CTX.working(5):
        assert abs(inst.lhs - 2 * (mpf(PI2_4) - 1)) <= mpf(10) ** -18


def test_recurrence_preconditions():
    with pytest.raises(PreconditionViolation):
        # 2c + j = 0
        recurrence_residual(WatsonPoint(Fraction(1), Fraction(1), Fraction(1, 2), 0, -1), CTX)
    with pytest.raises(PreconditionViolation):
        # a + b + i + 1 = 0
        recurrence_residual(WatsonPoint(Fraction(1), Fraction(1), Fraction(2), -3, 0), CTX)


def test_three_term_printed_counterexample():
    inst = three_term_printed(WatsonPoint(Fraction(0), Fraction(1), Fraction(2), 0, 0), CTX)
    assert inst.exact
    assert inst.lhs == 1 and inst.rhs == 2
    assert inst.rel_residual == Fraction(1, 2)


def test_three_term_printed_single_point_coincidence():
    # one lucky zero residual, which is why multi-point sampling is mandatory
    inst = three_term_printed(WatsonPoint(Fraction(0), Fraction(1), Fraction(1), 0, 0), CTX)
    assert inst.exact and inst.abs_residual == 0


def test_three_term_corrected_probes():
    inst = three_term_corrected(WatsonPoint(Fraction(0), Fraction(1), Fraction(2), 0, 0), CTX)
    assert inst.exact and inst.abs_residual == 0
    inst = three_term_corrected(WatsonPoint(1, 1, 1, 0, 1), CTX, tol=mpf(10) ** -20)
    assert inst.converged and float(inst.rel_residual) <= 1e-18


@given(rational, rational,
       st.integers(min_value=-4, max_value=4), st.integers(min_value=-2, max_value=3))
@settings(max_examples=25, deadline=None)
def test_three_term_corrected_holds_randomly(a, b, i, j):
    c = Fraction(3, 2) - j + Fraction(i, 2) + (a + b) / 2   # margin 1 at the tight points
    # mirror the sampler's admissibility: every constituent parameter must stay
    # clear of the nonpositive integers, else guard-truncation changes the series
    checked = [a, b, c, a - 1, b + 1, c + 1,
               (a + b + i + 1) / 2, (a + b + i + 3) / 2,
               2 * c + j, 2 * c + j + 1]
    if any(CTX.near_nonpos_int(v) is not None for v in checked):
        return
    p = WatsonPoint(a, b, c, i, j)
    try:
        inst = three_term_corrected(p, CTX, tol=mpf(10) ** -18)
    except PreconditionViolation:
        return
    if not inst.converged:
        return
    assert float(inst.rel_residual) <= max(1e-10, 100 * float(inst.eval_bounds))


def test_reduce_single_term():
    plan = reduce_to_watson(WatsonPoint(Fraction(1), Fraction(1), Fraction(1), 0, 0), CTX)
    assert plan.terms == ((0, Fraction(1)),)


def test_reduce_one_step_weights_and_value():
    plan = reduce_to_watson(WatsonPoint(Fraction(1), Fraction(1), Fraction(1), 0, 1), CTX)
    assert plan.terms == ((0, Fraction(1)), (1, Fraction(-1, 9)))
    with CTX.working(5):
        assert abs(plan.value - mpf(PI2_4_M1)) <= mpf(10) ** (8 - CTX.digits)


def test_reduce_merges_shifts():
    plan = reduce_to_watson(WatsonPoint(Fraction(1), Fraction(1), Fraction(1), 0, 2), CTX)
    assert [k for k, _ in plan.terms] == [0, 1, 2]


def test_reduce_rejects_unsupported_indices():
    with pytest.raises(UnsupportedIndex):
        reduce_to_watson(WatsonPoint(1, 1, 1, 1, 1), CTX)
    with pytest.raises(UnsupportedIndex):
        reduce_to_watson(WatsonPoint(1, 1, 1, 0, -1), CTX)


def test_reduce_matches_series_across_j():
    ctx = PrecisionCtx(digits=25)
    rng = random.Random(8080)
    with ctx.working():
        for j in range(0, 7):
            done = 0
            while done < 50:
                a = mpf(rng.uniform(0.1, 3.0))
                b = mpf(rng.uniform(0.1, 3.0))
                s0 = mpf(rng.uniform(0.3, 2.0))
                c = s0 - mpf(1) / 2 + (a + b) / 2
                p = WatsonPoint(a, b, c, 0, j)
                f = to_pfq(p)
                bad = any(ctx.near_nonpos_int(v) is not None
                          for v in list(f.numerators) + list(f.denominators))
                if bad:
                    continue
                try:
                    plan = reduce_to_watson(p, ctx)
                except PreconditionViolation:
                    continue
                series = eval_unit(f, ctx, tol=mpf(10) ** -18)
                if not series.converged:
                    continue
                scale = max(1, abs(series.value))
                assert abs(plan.value - series.value) <= (
                    series.abs_err_bound + scale * mpf(10) ** (10 - ctx.digits))
                done += 1


def test_point_symmetric_in_a_b():
    rng = random.Random(17)
    with CTX.working():
        for _ in range(10):
            a = mpf(rng.uniform(0.1, 3.0))
            b = mpf(rng.uniform(0.1, 3.0))
            s = mpf(rng.uniform(0.75, 2.0))
            i, j = rng.choice([(0, 0), (1, 0), (0, 1), (2, -1)])
            c = s - j - mpf(i + 1) / 2 + (a + b) / 2
            p = WatsonPoint(a, b, c, i, j)
            q = WatsonPoint(b, a, c, i, j)
            f = to_pfq(p)
            if any(CTX.near_nonpos_int(v) is not None
                   for v in list(f.numerators) + list(f.denominators)):
                continue
            ra = eval_point(p, CTX, tol=mpf(10) ** -20, use_closed_forms=False)
            rb = eval_point(q, CTX, tol=mpf(10) ** -20, use_closed_forms=False)
            assert abs(ra.value - rb.value) <= ra.abs_err_bound + rb.abs_err_bound
