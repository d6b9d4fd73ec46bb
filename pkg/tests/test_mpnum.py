import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from watsonlab.mpnum import (GammaFactor, NumeratorPole, PrecisionCtx,
                             gamma_product, ln_gamma, pochhammer)

CTX = PrecisionCtx(digits=30)

# reference literals stay strings; an mpf parsed at import time would be
# silently truncated to the 53-bit default precision
LN_PI_HALF = "0.57236494292470008707171367567652935582364740645766"
LN_24 = "3.1780538303479456196469416012970554088739909609035"
PI = "3.1415926535897932384626433832795028841971693993751"


def test_ctx_validation():
    with pytest.raises(ValueError):
        PrecisionCtx(digits=14)
    with pytest.raises(ValueError):
        PrecisionCtx(digits=30, pole_guard=0.6)
    assert CTX.prec >= 30 * 3.33


def test_ctx_text_roundtrip():
    rng = random.Random(7)
    for _ in range(200):
        with CTX.working():
            x = mpf(rng.random()) * 10 ** rng.randint(-8, 8)
            x = +x
        assert CTX.from_text(CTX.to_text(x)) == x


@pytest.mark.parametrize("alpha, n, expected", [
    (Fraction(5, 2), 0, Fraction(1)),
    (1, 4, 24),
    (-3, 5, 0),
    (Fraction(1, 2), 2, Fraction(3, 4)),
])
def test_pochhammer_values(alpha, n, expected):
    assert pochhammer(alpha, n) == expected


@given(st.fractions(min_value=-20, max_value=20, max_denominator=64),
       st.integers(min_value=0, max_value=200))
@settings(max_examples=80, deadline=None)
def test_pochhammer_recurrence(alpha, n):
    # (alpha)_{n+1} = (alpha)_n (alpha + n), exactly
    assert pochhammer(alpha, n + 1) == pochhammer(alpha, n) * (alpha + n)


@pytest.mark.parametrize("alpha", ["0.3", "1.7", "4.25"])
def test_pochhammer_matches_gamma_quotient(alpha):
    tol = mpf(10) ** (8 - CTX.digits)
    with CTX.working():
        a = mpf(alpha)
        for n in range(1, 51):
            direct = pochhammer(a, n, CTX)
            via_gamma = mpmath.exp(ln_gamma(a + n, CTX).value_ln - ln_gamma(a, CTX).value_ln)
            assert abs(direct - via_gamma) / direct <= tol


def test_ln_gamma_basics():
    g = ln_gamma(1, CTX)
    assert g.pole is False and g.sign == 1
    with CTX.working(10):
        ln24 = mpf(LN_24)
        lnpih = mpf(LN_PI_HALF)
        assert abs(g.value_ln) <= mpf(10) ** (5 - CTX.digits)
        assert abs(ln_gamma(5, CTX).value_ln - ln24) <= mpf(10) ** (5 - CTX.digits) * ln24
        assert abs(ln_gamma(Fraction(1, 2), CTX).value_ln - lnpih) <= mpf(10) ** (25 - CTX.digits)


def test_ln_gamma_poles():
    assert ln_gamma(-1, CTX).pole is True
    assert ln_gamma(0, CTX).pole is True
    assert ln_gamma(-2.03, CTX).pole is True       # within the 0.05 guard
    assert ln_gamma(-2.2, CTX).pole is False
    assert ln_gamma(0.04, CTX).pole is True        # guard applies near 0 from above


def test_ln_gamma_reflection_signs():
    # Gamma alternates sign between consecutive negative integers
    assert ln_gamma(-0.5, CTX).sign == -1
    assert ln_gamma(-1.5, CTX).sign == 1
    assert ln_gamma(-2.5, CTX).sign == -1
    g = ln_gamma(-0.5, CTX)
    # Gamma(-1/2) = -2 sqrt(pi)
    with CTX.working():
        assert abs(mpmath.exp(g.value_ln) - 2 * mpmath.sqrt(mpf(PI))) <= mpf(10) ** (7 - CTX.digits)


def test_ln_gamma_recurrence_sweep():
    # ln Gamma(x+1) = ln Gamma(x) + ln x over (0.05, 50), 1000 seeded draws
    ctx = PrecisionCtx(digits=25)
    tol = mpf(10) ** (6 - ctx.digits)
    rng = random.Random(20240817)
    with ctx.working():
        for _ in range(1000):
            x = mpf(rng.uniform(0.0501, 50.0))
            if ctx.near_nonpos_int(x) is not None:
                continue
            lhs = ln_gamma(x + 1, ctx).value_ln
            rhs = ln_gamma(x, ctx).value_ln + mpmath.log(x)
            assert abs(lhs - rhs) / max(1, abs(lhs)) <= tol


@pytest.mark.parametrize("nums, dens, expected", [
    ([Fraction(1)], [Fraction(1)], 1),
    ([Fraction(3)], [Fraction(2)], 2),
])
def test_gamma_product_simple(nums, dens, expected):
    with CTX.working():
        assert abs(gamma_product(nums, dens, CTX) - expected) <= mpf(10) ** (6 - CTX.digits) * expected


def test_gamma_product_pi():
    with CTX.working():
        v = gamma_product([Fraction(1, 2), Fraction(1, 2)], [Fraction(1)], CTX)
        pi = mpf(PI)
        assert abs(v - pi) <= mpf(10) ** (6 - CTX.digits) * pi


def test_gamma_product_zero_and_pole():
    assert gamma_product([Fraction(1, 2)], [Fraction(0)], CTX) == 0
    with pytest.raises(NumeratorPole):
        gamma_product([Fraction(-1)], [Fraction(1, 2)], CTX)
    # pole on both sides is still inapplicable, never silently cancelled
    with pytest.raises(NumeratorPole):
        gamma_product([Fraction(0)], [Fraction(0)], CTX)


def test_gamma_product_factor_move_invariance():
    # ([a,b],[c]) equals ([a],[c]) * Gamma(b), reconstructed from ln_gamma
    rng = random.Random(99)
    tol = mpf(10) ** (8 - CTX.digits)
    with CTX.working():
        for _ in range(25):
            a = mpf(rng.uniform(0.2, 6.0))
            b = mpf(rng.uniform(0.2, 6.0))
            c = mpf(rng.uniform(0.2, 6.0))
            whole = gamma_product([a, b], [c], CTX)
            part = gamma_product([a], [c], CTX) * mpmath.exp(ln_gamma(b, CTX).value_ln)
            assert abs(whole - part) / abs(whole) <= tol


def test_gamma_factor_is_data():
    g = ln_gamma(-3, CTX)
    assert isinstance(g, GammaFactor)
    assert g.pole is True and g.value_ln == mpmath.inf
