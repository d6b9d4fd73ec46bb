"""Extended-precision real arithmetic context and the log-gamma / Pochhammer kernel.

Values are plain mpmath ``mpf`` floats created under a :class:`PrecisionCtx`.
The context fixes the working mantissa (at least ``digits * 3.33`` bits, so the
decimal ``digits`` are honest) and the pole guard used to decide when a gamma
argument counts as a pole.  Decimal text is presentation only; all arithmetic
is binary floating point.

Everything here is a pure function of its inputs plus the context, so values
can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Union

import mpmath
from mpmath import mpf

XReal = mpf
Realish = Union[int, float, str, Fraction, mpf]

_LN_DIGITS_GUARD = 12   # extra decimal digits carried inside ln_gamma
_PRODUCT_GUARD = 15     # extra decimal digits carried inside gamma_product


class NumeratorPole(ValueError):
    """A gamma pole in the numerator of a gamma product; no structural cancellation."""


def as_rational(x) -> Optional[Fraction]:
    """Fraction view of x when x is exact (int or Fraction), else None.

    Binary floats are deliberately treated as inexact even though they are
    dyadic rationals; exactness must be requested explicitly by the caller.
    """
    if isinstance(x, bool):
        return None
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x)
    return None


def bits_for_digits(digits: int) -> int:
    return int(digits * 3.3322) + 8


def to_mpf_ambient(x) -> mpf:
    """Convert to mpf rounding at the precision currently in effect."""
    r = as_rational(x)
    if r is not None:
        return mpf(r.numerator) / r.denominator
    if isinstance(x, mpf):
        return x
    return +mpf(x)


@dataclass(frozen=True)
class PrecisionCtx:
    """Working precision (decimal digits) plus the pole-detection guard."""

    digits: int = 50
    pole_guard: float = 0.05

    def __post_init__(self):
        if self.digits < 15:
            raise ValueError(f"digits must be >= 15, got {self.digits}")
        if not (0 <= self.pole_guard < 0.5):
            raise ValueError(f"pole_guard must lie in [0, 0.5), got {self.pole_guard}")

    @property
    def prec(self) -> int:
        """Mantissa bits of the working precision."""
        return bits_for_digits(self.digits)

    def working(self, extra_digits: int = 0):
        """Context manager running mpmath at this precision plus guard digits."""
        return mpmath.workprec(self.prec + int(extra_digits * 3.3322))

    def mpf(self, x: Realish) -> mpf:
        """Convert to mpf, correctly rounded at the context precision."""
        with self.working():
            return +to_mpf_ambient(x)

    def to_text(self, x: mpf) -> str:
        """Decimal text form; round-trips through from_text without value change."""
        return mpmath.nstr(x, int(self.prec * 0.30103) + 3)

    def from_text(self, s: str) -> mpf:
        with self.working():
            return +mpf(s)

    def near_nonpos_int(self, x) -> Optional[int]:
        """The nonpositive integer within pole_guard of x, or None.

        Exact inputs are tested exactly; mpf inputs at their own precision.
        """
        r = as_rational(x)
        if r is not None:
            k = min(0, round(r))
            return k if abs(r - k) <= Fraction(self.pole_guard) else None
        with self.working(8):
            v = mpf(x) if not isinstance(x, mpf) else x
            k = min(0, int(mpmath.nint(v)))
            return k if abs(v - k) <= self.pole_guard else None


@dataclass(frozen=True)
class GammaFactor:
    """ln|Gamma(x)| together with the sign of Gamma(x); pole means x was too close
    to a nonpositive integer for the value to be trusted."""

    value_ln: mpf
    sign: int
    pole: bool


def pochhammer(alpha, n: int, ctx: Optional[PrecisionCtx] = None):
    """Rising factorial alpha (alpha+1) ... (alpha+n-1), empty product for n = 0.

    Computed as a running product, never via gamma quotients, so a zero factor
    gives an exact zero.  Exact (int/Fraction) input yields an exact Fraction.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    r = as_rational(alpha)
    if r is not None:
        out = Fraction(1)
        for k in range(n):
            out *= r + k
        return out
    if ctx is None:
        acc = mpf(1)
        for k in range(n):
            acc *= alpha + k
        return acc
    with ctx.working():
        acc = mpf(1)
        a = ctx.mpf(alpha)
        for k in range(n):
            acc *= a + k
        return +acc


def _stirling_ln_gamma(x: mpf, digits: int) -> mpf:
    """ln Gamma(x) for x >= 0.5 via upward recurrence then the asymptotic series.

    The promotion threshold 0.8 * digits keeps the series remainder near
    exp(-2 pi * 0.8 * digits), far below the 10^-digits scale, without any
    precomputed constant table.
    """
    thresh = max(12, int(0.8 * digits) + 1)
    shift = mpf(0)
    while x < thresh:
        shift += mpmath.log(x)
        x += 1
    res = (x - mpf(1) / 2) * mpmath.log(x) - x + mpmath.log(2 * mpmath.pi) / 2
    eps = mpf(10) ** (-(digits + _LN_DIGITS_GUARD))
    x2 = x * x
    xpow = x
    prev = None
    for k in range(1, 4 * digits + 4):
        term = mpmath.bernoulli(2 * k) / ((2 * k) * (2 * k - 1) * xpow)
        mag = abs(term)
        if prev is not None and mag >= prev:
            break
        res += term
        prev = mag
        if mag < eps:
            break
        xpow *= x2
    return res - shift


def ln_gamma(x, ctx: PrecisionCtx) -> GammaFactor:
    """ln|Gamma(x)| with sign tracking; reflection below 1/2, poles flagged as data.

    A pole is reported exactly when x lies within ctx.pole_guard of a
    nonpositive integer; value_ln is then +inf so accidental use fails loudly.
    """
    if ctx.near_nonpos_int(x) is not None:
        return GammaFactor(value_ln=mpmath.inf, sign=1, pole=True)
    with ctx.working(_LN_DIGITS_GUARD):
        v = to_mpf_ambient(x)
        if v >= mpf(1) / 2:
            raw = _stirling_ln_gamma(+v, ctx.digits)
            sign = 1
        else:
            m = int(mpmath.floor(v))
            r = v - m
            s = mpmath.sinpi(r)
            raw = mpmath.log(mpmath.pi) - mpmath.log(s) - _stirling_ln_gamma(1 - v, ctx.digits)
            sign = 1 if m % 2 == 0 else -1
    with ctx.working():
        return GammaFactor(value_ln=+raw, sign=sign, pole=False)


def gamma_product(numerators: Sequence, denominators: Sequence, ctx: PrecisionCtx) -> mpf:
    """prod Gamma(n_i) / prod Gamma(d_j) via summed log-gammas with sign bookkeeping.

    A pole among the denominators (with a pole-free numerator) is an exact
    structural zero.  Any numerator pole raises NumeratorPole: the caller must
    treat the closed form as inapplicable, since limit evaluation is out of
    scope here.

    Log terms are summed in sorted order so permuting arguments cannot change
    the rounded result.
    """
    with ctx.working(_PRODUCT_GUARD):
        num = [ln_gamma(v, ctx) for v in numerators]
        den = [ln_gamma(v, ctx) for v in denominators]
        num_poles = [v for v, g in zip(numerators, num) if g.pole]
        if num_poles:
            raise NumeratorPole(f"gamma pole in numerator at {num_poles}")
        if any(g.pole for g in den):
            zero = mpf(0)
        else:
            total = mpf(0)
            for ln in sorted(g.value_ln for g in num):
                total += ln
            for ln in sorted(g.value_ln for g in den):
                total -= ln
            sign = 1
            for g in num + den:
                sign *= g.sign
            zero = None
            raw = sign * mpmath.exp(total)
    with ctx.working():
        return mpf(0) if zero is not None else +raw
