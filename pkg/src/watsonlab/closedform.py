"""Gamma-product closed forms for distinguished lattice rows, plus the trust registry.

Each function computes exactly what its source formula prints.  Correctness is
never assumed: the verify layer adjudicates every form against series
evaluation and records a verdict here.  Printed misprints must stay observable,
so nothing in this module "fixes" a formula.

All four forms follow the row j of the lattice 3F2(a, b, c; (a+b+1)/2, 2c+j; 1)
at j = 0 (watson_00), j = +1 (lavoie_plus), j = -1 (lavoie_minus); gauss is the
2F1 unit-argument summation used as a building block elsewhere.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Tuple

import mpmath
from mpmath import mpf

from .mpnum import PrecisionCtx, as_rational, gamma_product, to_mpf_ambient

FORM_IDS = ("gauss", "watson_00", "lavoie_plus", "lavoie_minus")

# safety margin added to each printed strict inequality so adjudication never
# happens in the slow-convergence limit
VALIDITY_MARGIN = 0.05

FORM_EQUATIONS = {
    "gauss": "2F1(a,b;c;1) = G(c)G(c-a-b) / (G(c-a)G(c-b))",
    "watson_00": "3F2(a,b,c;(a+b+1)/2,2c;1) = G(1/2)G(c+1/2)G(a/2+b/2+1/2)G(c-a/2-b/2+1/2)"
                 " / (G(a/2+1/2)G(b/2+1/2)G(c-a/2+1/2)G(c-b/2+1/2))",
    "lavoie_plus": "3F2(a,b,c;(a+b+1)/2,2c+1;1) = 2^(a+b-2) G(c+1/2)G(a/2+b/2+1/2)"
                   "G(c-a/2-b/2+1/2) / (G(1/2)G(a)G(b)) * { G(a/2)G(b/2)/(G(c-a/2+1/2)"
                   "G(c-b/2+1/2)) - G(a/2+1/2)G(b/2+1/2)/(G(c-a/2+1)G(c-b/2+1)) }",
    "lavoie_minus": "3F2(a,b,c;(a+b+1)/2,2c-1;1) = 2^(a+b-2) G(c-1/2)G(a/2+b/2+1/2)"
                    "G(c-a/2-b/2-1/2) / (G(1/2)G(a)G(b)) * { G(a/2)G(b/2)/(G(c-a/2-1/2)"
                    "G(c-b/2-1/2)) - G(a/2+1/2)G(b/2+1/2)/(G(c-a/2)G(c-b/2)) }",
}


class DivergenceRegion(ValueError):
    """Parameters violate the form's convergence inequality (with safety margin)."""


class ParameterPole(ValueError):
    """a or b too close to a nonpositive integer; the form would need a limit."""


class UnknownForm(KeyError):
    pass


@dataclass(frozen=True)
class FormVerdict:
    form_id: str
    status: str = "unverified"      # unverified | verified | refuted
    n_samples: int = 0
    worst_rel_residual: object = None
    evidence: Tuple = ()


_REGISTRY = {fid: FormVerdict(fid) for fid in FORM_IDS}
_REGISTRY_LOCK = threading.Lock()


def registry_verdict(form_id: str) -> FormVerdict:
    try:
        with _REGISTRY_LOCK:
            return _REGISTRY[form_id]
    except KeyError:
        raise UnknownForm(form_id) from None


def record_adjudication(form_id: str, verdict: str, n_converged: int,
                        worst_rel_residual, evidence_ref) -> FormVerdict:
    """Map a relation verdict onto the registry; verified needs >= 100 samples."""
    if form_id not in FORM_IDS:
        raise UnknownForm(form_id)
    if verdict == "identity" and n_converged >= 100:
        status = "verified"
    elif verdict == "not_identity":
        status = "refuted"
    else:
        status = "unverified"
    with _REGISTRY_LOCK:
        prev = _REGISTRY[form_id]
        fv = FormVerdict(form_id, status, n_converged, worst_rel_residual,
                         prev.evidence + (evidence_ref,))
        _REGISTRY[form_id] = fv
        return fv


def reset_registry():
    with _REGISTRY_LOCK:
        for fid in FORM_IDS:
            _REGISTRY[fid] = FormVerdict(fid)


def registry_as_dicts():
    from .report import fmt_num
    with _REGISTRY_LOCK:
        snap = [_REGISTRY[fid] for fid in FORM_IDS]
    return [
        {
            "form_id": fv.form_id,
            "source_equation": FORM_EQUATIONS[fv.form_id],
            "status": fv.status,
            "n_samples": fv.n_samples,
            "worst_rel_residual": fmt_num(fv.worst_rel_residual),
        }
        for fv in snap
    ]


def _coerce3(ctx: PrecisionCtx, a, b, c):
    ra, rb, rc = as_rational(a), as_rational(b), as_rational(c)
    if None not in (ra, rb, rc):
        return ra, rb, rc
    with ctx.working(8):
        return to_mpf_ambient(a), to_mpf_ambient(b), to_mpf_ambient(c)


def _require_excess(value, floor_value, form_id):
    if not float(value) > floor_value + VALIDITY_MARGIN:
        raise DivergenceRegion(
            f"{form_id}: convergence excess {float(value):.6g} not above "
            f"{floor_value} + {VALIDITY_MARGIN}"
        )


def gauss_2f1_unit(a, b, c, ctx: PrecisionCtx) -> mpf:
    """Unit-argument 2F1 summation: G(c)G(c-a-b) / (G(c-a)G(c-b)), needs c-a-b > 0."""
    a, b, c = _coerce3(ctx, a, b, c)
    _require_excess(c - a - b, 0.0, "gauss")
    with ctx.working(8):
        nums = [c, c - a - b]
        dens = [c - a, c - b]
    return gamma_product(nums, dens, ctx)


def watson_00(a, b, c, ctx: PrecisionCtx) -> mpf:
    """The j = 0 row closed form, valid for 2c - a - b > -1.

    A pole among the denominator gammas makes the value an exact zero, which
    matches the terminating series whenever both sides are defined.
    """
    a, b, c = _coerce3(ctx, a, b, c)
    _require_excess(2 * c - a - b, -1.0, "watson_00")
    h = Fraction(1, 2)
    with ctx.working(8):
        nums = [h, c + h, (a + b) / 2 + h, c - (a + b) / 2 + h]
        dens = [(a + 1) / 2, (b + 1) / 2, c - a / 2 + h, c - b / 2 + h]
    return gamma_product(nums, dens, ctx)


def _lavoie(a, b, c, ctx: PrecisionCtx, down: bool) -> mpf:
    form_id = "lavoie_minus" if down else "lavoie_plus"
    if ctx.near_nonpos_int(a) is not None or ctx.near_nonpos_int(b) is not None:
        raise ParameterPole(f"{form_id}: a or b within pole_guard of a nonpositive integer")
    a, b, c = _coerce3(ctx, a, b, c)
    _require_excess(2 * c - a - b, 1.0 if down else -3.0, form_id)
    h = Fraction(1, 2)
    sgn = -1 if down else 1
    # the braces cancel, so the constituent quotients carry guard digits
    inner = replace(ctx, digits=ctx.digits + 12)
    with inner.working():
        pref_gamma = gamma_product(
            [c + sgn * h, (a + b) / 2 + h, c - (a + b) / 2 + sgn * h],
            [h, a, b], inner)
        pow2 = mpmath.power(2, to_mpf_ambient(a + b) - 2)
        first = gamma_product([a / 2, b / 2],
                              [c - a / 2 + sgn * h, c - b / 2 + sgn * h], inner)
        second = gamma_product([(a + 1) / 2, (b + 1) / 2],
                               [c - a / 2 + (0 if down else 1),
                                c - b / 2 + (0 if down else 1)], inner)
        raw = pow2 * pref_gamma * (first - second)
    with ctx.working():
        return +raw


def lavoie_plus(a, b, c, ctx: PrecisionCtx) -> mpf:
    """The j = +1 row closed form as printed, valid for 2c - a - b > -3."""
    return _lavoie(a, b, c, ctx, down=False)


def lavoie_minus(a, b, c, ctx: PrecisionCtx) -> mpf:
    """The j = -1 row closed form, computed exactly as printed.

    This form is typo-suspect; whether it holds is decided by the adjudication
    suite, not assumed here.
    """
    return _lavoie(a, b, c, ctx, down=True)


FORM_FUNCS = {
    "gauss": gauss_2f1_unit,
    "watson_00": watson_00,
    "lavoie_plus": lavoie_plus,
    "lavoie_minus": lavoie_minus,
}
