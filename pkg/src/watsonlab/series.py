"""Generalized hypergeometric series: model plus exact, direct, and accelerated evaluation.

Terms are always generated through the ratio recurrence

    t_{n+1} / t_n = prod_i (a_i + n) * z / ( prod_j (b_j + n) * (n + 1) ),

never through quotients of factorials, so the work per term is O(1) and a zero
numerator factor truncates the series exactly.

At unit argument the tail decays algebraically like n**-(1+s) where s is the
parametric excess (sum of denominator parameters minus sum of numerator
parameters).  Direct summation is used when its tail bound can reach the
requested tolerance within the term budget; otherwise partial sums are fed to
a Levin-type sequence extrapolation that carries its own error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import mpmath
from mpmath import mpf

from .mpnum import PrecisionCtx, as_rational, to_mpf_ambient

DIRECT_MAX_TERMS = 10_000
ACCEL_MAX_PARTIAL_SUMS = 2_000
_ACCEL_START = 32


class SeriesError(ValueError):
    pass


class ArgumentNotUnity(SeriesError):
    pass


class NotTerminating(SeriesError):
    pass


class NonRationalInput(SeriesError):
    pass


class DivergentSeries(SeriesError):
    pass


class OutsideRadius(SeriesError):
    pass


@dataclass(frozen=True)
class PFQ:
    """A pFq series: numerator parameters, denominator parameters, argument."""

    numerators: Tuple
    denominators: Tuple
    argument: object = 1

    def __post_init__(self):
        object.__setattr__(self, "numerators", tuple(self.numerators))
        object.__setattr__(self, "denominators", tuple(self.denominators))
        if len(self.numerators) > len(self.denominators) + 1:
            raise SeriesError("need p <= q + 1 numerator parameters")

    def all_rational(self) -> bool:
        vals = self.numerators + self.denominators + (self.argument,)
        return all(as_rational(v) is not None for v in vals)


@dataclass(frozen=True)
class EvalResult:
    """A value with an honest absolute error bound and the route that produced it."""

    value: mpf
    abs_err_bound: mpf
    terms_used: int
    method: str            # exact_rational | direct | accelerated | closed_form
    converged: bool
    exact_value: Optional[Fraction] = None


def _nearest_nonpos_int(x, guard) -> Optional[int]:
    r = as_rational(x)
    if r is not None:
        k = min(0, round(r))
        return k if abs(r - k) <= Fraction(guard) else None
    v = to_mpf_ambient(x)
    k = min(0, int(mpmath.nint(v)))
    return k if abs(v - k) <= guard else None


def convergence_margin(f: PFQ):
    """Parametric excess s = sum(denominators) - sum(numerators) at unit argument.

    The series converges at z = 1 iff s > 0 or it terminates.
    """
    if not _is_one(f.argument):
        raise ArgumentNotUnity(f"argument is {f.argument!r}, not 1")
    if f.all_rational():
        s = Fraction(0)
        for b in f.denominators:
            s += as_rational(b)
        for a in f.numerators:
            s -= as_rational(a)
        return s
    s = mpf(0)
    for b in f.denominators:
        s += to_mpf_ambient(b)
    for a in f.numerators:
        s -= to_mpf_ambient(a)
    return s


def _is_one(z) -> bool:
    r = as_rational(z)
    if r is not None:
        return r == 1
    return to_mpf_ambient(z) == 1


def termination_degree(f: PFQ, pole_guard: float = 0.05) -> Optional[int]:
    """Least m with some numerator within pole_guard of -m, or None.

    When present the series is the finite sum over n = 0..m; parameters that
    arrive as floats within the guard of a nonpositive integer are treated as
    that integer.
    """
    best = None
    for a in f.numerators:
        k = _nearest_nonpos_int(a, pole_guard)
        if k is not None and (best is None or -k < best):
            best = -k
    return best


def _check_denominators(f: PFQ, degree: Optional[int], guard: float):
    for d in f.denominators:
        k = _nearest_nonpos_int(d, guard)
        if k is None:
            continue
        if degree is None or -k < degree:
            raise SeriesError(
                f"denominator parameter {d} lies within {guard} of nonpositive "
                f"integer {k} reached before the series terminates"
            )


def eval_exact(f: PFQ) -> Fraction:
    """Exact rational sum of a terminating series with rational data. No rounding."""
    if not f.all_rational():
        raise NonRationalInput("eval_exact needs rational parameters and argument")
    m = termination_degree(f, pole_guard=0)
    if m is None:
        raise NotTerminating("no numerator is a nonpositive integer")
    _check_denominators(f, m, guard=0)
    z = as_rational(f.argument)
    nums = [as_rational(a) for a in f.numerators]
    dens = [as_rational(b) for b in f.denominators]
    t = Fraction(1)
    total = Fraction(1)
    for n in range(m):
        for a in nums:
            t *= a + n
        for b in dens:
            t /= b + n
        t = t * z / (n + 1)
        total += t
    return total


def _round_to_ctx(ctx: PrecisionCtx, x) -> mpf:
    with ctx.working():
        return +to_mpf_ambient(x)


def _finite_sum_result(f: PFQ, ctx: PrecisionCtx, m: int) -> EvalResult:
    if f.all_rational():
        # sum n = 0..m directly; m may come from guard proximity, in which case
        # the near-integer numerator is deliberately treated as that integer
        z = as_rational(f.argument)
        nums = [as_rational(a) for a in f.numerators]
        dens = [as_rational(b) for b in f.denominators]
        t = Fraction(1)
        exact = Fraction(1)
        for n in range(m):
            for a in nums:
                t *= a + n
            for b in dens:
                t /= b + n
            t = t * z / (n + 1)
            exact += t
        value = ctx.mpf(exact)
        bound = abs(value) * mpf(10) ** (-ctx.digits) if value != 0 else mpf(0)
        return EvalResult(value, _round_to_ctx(ctx, bound), m + 1, "exact_rational",
                          True, exact_value=exact)
    with ctx.working(10):
        nums = [to_mpf_ambient(a) for a in f.numerators]
        dens = [to_mpf_ambient(b) for b in f.denominators]
        z = to_mpf_ambient(f.argument)
        t = mpf(1)
        total = mpf(1)
        for n in range(m):
            num = mpf(1)
            for a in nums:
                num *= a + n
            den = mpf(n + 1)
            for b in dens:
                den *= b + n
            t = t * num / den * z
            total += t
        bound = abs(total) * mpf(10) ** (-(ctx.digits + 2))
    return EvalResult(_round_to_ctx(ctx, total), _round_to_ctx(ctx, bound),
                      m + 1, "direct", True)


def default_tolerance(ctx: PrecisionCtx) -> mpf:
    return mpf(10) ** (2 - ctx.digits)


def eval_unit(f: PFQ, ctx: PrecisionCtx, tol=None, max_terms: Optional[int] = None) -> EvalResult:
    """Evaluate a pFq at z = 1.

    Terminating series are summed exactly (rational data) or term by term.
    Convergent series go through direct summation when the algebraic tail
    bound can reach tol inside the budget, otherwise through the accelerator.
    If tol is unreachable, the best estimate is returned with converged False
    and an honest bound.
    """
    if not _is_one(f.argument):
        raise ArgumentNotUnity(f"argument is {f.argument!r}, not 1")
    if tol is None:
        tol = default_tolerance(ctx)
    tol = ctx.mpf(tol)
    m = termination_degree(f, ctx.pole_guard)
    _check_denominators(f, m, ctx.pole_guard)
    if m is not None:
        return _finite_sum_result(f, ctx, m)
    with ctx.working(8):
        s = convergence_margin(f)
        s_mpf = to_mpf_ambient(s)
    if s_mpf <= 0:
        raise DivergentSeries(f"parametric excess {s_mpf} <= 0 for non-terminating series")
    if s_mpf > 1:
        budget = DIRECT_MAX_TERMS if max_terms is None else max_terms
        direct = _direct_unit(f, ctx, tol, budget, s_mpf)
        if direct is not None:
            return direct
    budget = ACCEL_MAX_PARTIAL_SUMS if max_terms is None else max_terms
    return _accelerated_unit(f, ctx, tol, budget)


def eval_general(f: PFQ, ctx: PrecisionCtx, tol=None, max_terms: Optional[int] = None) -> EvalResult:
    """Evaluate a pFq inside the unit disk (|z| < 1) or a terminating one anywhere."""
    if tol is None:
        tol = default_tolerance(ctx)
    tol = ctx.mpf(tol)
    m = termination_degree(f, ctx.pole_guard)
    _check_denominators(f, m, ctx.pole_guard)
    if m is not None:
        return _finite_sum_result(f, ctx, m)
    with ctx.working(8):
        z_abs = abs(to_mpf_ambient(f.argument))
    if z_abs >= 1:
        raise OutsideRadius(f"|z| = {z_abs} >= 1 and the series does not terminate")
    if max_terms is None:
        max_terms = DIRECT_MAX_TERMS
    with ctx.working(10):
        nums = [to_mpf_ambient(a) for a in f.numerators]
        dens = [to_mpf_ambient(b) for b in f.denominators]
        z = to_mpf_ambient(f.argument)
        t = mpf(1)
        total = mpf(1)
        bound = mpmath.inf
        used = 1
        for n in range(max_terms):
            num = mpf(1)
            for a in nums:
                num *= a + n
            den = mpf(n + 1)
            for b in dens:
                den *= b + n
            t = t * num / den * z
            total += t
            used = n + 2
            # geometric tail: future ratios head toward |z| < 1
            rnum = mpf(1)
            for a in nums:
                rnum *= a + n + 1
            rden = mpf(n + 2)
            for b in dens:
                rden *= b + n + 1
            q = max(abs(rnum / rden * z), z_abs)
            if q < 1:
                bound = 2 * abs(t) * q / (1 - q) + abs(total) * mpf(10) ** (-(ctx.digits + 4))
                if bound <= tol:
                    break
    return EvalResult(_round_to_ctx(ctx, total), _round_to_ctx(ctx, bound), used,
                      "direct", bool(bound <= tol))


def _direct_unit(f: PFQ, ctx: PrecisionCtx, tol, max_terms: int, s) -> Optional[EvalResult]:
    """Direct summation for excess s > 1; None when tol is out of reach in budget."""
    with ctx.working(10):
        nums = [to_mpf_ambient(a) for a in f.numerators]
        dens = [to_mpf_ambient(b) for b in f.denominators]
        t = mpf(1)
        total = mpf(1)
        decreasing = 0
        bound = mpmath.inf
        used = 1
        for n in range(max_terms):
            num = mpf(1)
            for a in nums:
                num *= a + n
            den = mpf(n + 1)
            for b in dens:
                den *= b + n
            t_next = t * num / den
            decreasing = decreasing + 1 if abs(t_next) < abs(t) else 0
            t = t_next
            total += t
            used = n + 2
            if decreasing >= 8 and n >= 24:
                # tail of an n**-(1+s) decay compares against the integral: ~ |t| * n / s
                bound = 2 * abs(t) * (n + 2) / s + abs(total) * mpf(10) ** (-(ctx.digits + 4))
                if bound <= tol:
                    break
                if n >= 64 and n % 32 == 0:
                    # projected index where the bound reaches tol
                    needed = (n + 2) * (bound / tol) ** (1 / s)
                    if needed > max_terms:
                        return None
        if bound > tol:
            return None
    return EvalResult(_round_to_ctx(ctx, total), _round_to_ctx(ctx, bound), used,
                      "direct", True)


def _levin_coeff(k: int, n: int, beta: int = 1) -> mpf:
    # (beta+n) (beta+n+k-1)^(k-2) / (beta+n+k)^(k-1), exact integer powers
    if k == 1:
        return mpf(1)
    return mpf((beta + n) * (beta + n + k - 1) ** (k - 2)) / mpf((beta + n + k) ** (k - 1))


def _levin_scan(terms, tol, beta: int = 1):
    """Levin u-type extrapolation over the partial sums of ``terms``.

    The estimate at order k is trusted by the spread of the last two orders,
    bound = 2 (|e_k - e_{k-1}| + |e_{k-1} - e_{k-2}|); the returned order
    minimizes that spread, so a single lucky gap coincidence cannot shrink
    the bound on its own.  Scanning stops early only after three consecutive
    orders already agree within tol/4, which forces bound <= tol at the break.
    """
    M = len(terms)
    partial = []
    acc = mpf(0)
    for t in terms:
        acc += t
        partial.append(acc)
    N = [partial[n] / ((beta + n) * terms[n]) for n in range(M)]
    D = [mpf(1) / ((beta + n) * terms[n]) for n in range(M)]
    prev_est = None
    gaps = [mpmath.inf]
    ests = [None]
    small_streak = 0
    for k in range(1, M):
        for n in range(M - k):
            b = _levin_coeff(k, n, beta)
            N[n] = N[n + 1] - b * N[n]
            D[n] = D[n + 1] - b * D[n]
        est = N[0] / D[0] if D[0] != 0 else None
        ests.append(est)
        if est is None or prev_est is None:
            gaps.append(mpmath.inf)
        else:
            gap = abs(est - prev_est)
            gaps.append(gap)
            small_streak = small_streak + 1 if gap <= tol / 4 else 0
            if small_streak >= 3 and k >= 6:
                break
        if est is not None:
            prev_est = est
    best_k = None
    best_pair = mpmath.inf
    for k in range(4, len(gaps)):
        if ests[k] is None:
            continue
        pair = gaps[k] + gaps[k - 1]
        if pair < best_pair:
            best_pair = pair
            best_k = k
    if best_k is None:
        return None, mpmath.inf, 0
    return ests[best_k], 2 * best_pair, best_k


def _accelerated_unit(f: PFQ, ctx: PrecisionCtx, tol, max_partial: int) -> EvalResult:
    """Levin-accelerated unit-argument evaluation with adaptive depth."""
    target_digits = max(ctx.digits, int(-mpmath.log10(tol)) + 2)
    M = min(_ACCEL_START, max_partial)
    value, bound = None, mpmath.inf
    while True:
        internal = target_digits + int(0.55 * M) + 15
        with mpmath.workprec(int(internal * 3.3322) + 20):
            nums = [to_mpf_ambient(a) for a in f.numerators]
            dens = [to_mpf_ambient(b) for b in f.denominators]
            t = mpf(1)
            terms = [t]
            for n in range(M - 1):
                num = mpf(1)
                for a in nums:
                    num *= a + n
                den = mpf(n + 1)
                for b in dens:
                    den *= b + n
                t = t * num / den
                terms.append(t)
            value, bound, _ = _levin_scan(terms, tol)
        if value is not None and bound <= tol:
            break
        if M >= max_partial:
            break
        M = min(2 * M, max_partial)
    if value is None:
        raise SeriesError("extrapolation produced no estimate")
    converged = bool(bound <= tol)
    return EvalResult(_round_to_ctx(ctx, value), _round_to_ctx(ctx, bound), M,
                      "accelerated", converged)
