"""Sample records and per-relation reports shared by the lattice and verify layers."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Tuple

import mpmath

_FMT_DIGITS = 20


def fmt_num(x) -> Optional[str]:
    """Deterministic string form: Fractions exactly, mpf to 20 significant digits."""
    if x is None:
        return None
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, Fraction) or isinstance(x, int):
        return str(x)
    return mpmath.nstr(x, _FMT_DIGITS)


@dataclass(frozen=True)
class RelationInstance:
    """One evaluated sample of a relation: both sides, residuals, and bounds.

    rel_residual = abs_residual / max(|lhs|, |rhs|, 1).  eval_bounds is the
    combined evaluation error of both sides on the same relative scale, so a
    residual is only meaningful when it clears the bounds.  Values stay exact
    Fractions whenever every constituent series terminated with rational data.
    """

    relation_id: str
    index: int
    kind: str                       # probe | sample | grid
    lattice_indices: Optional[Tuple[int, int]]
    params: dict
    lhs: object
    rhs: object
    abs_residual: object
    rel_residual: object
    eval_bounds: object
    converged: bool
    exact: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "lattice_indices": list(self.lattice_indices) if self.lattice_indices else None,
            "params": {k: fmt_num(v) for k, v in self.params.items()},
            "lhs": fmt_num(self.lhs),
            "rhs": fmt_num(self.rhs),
            "abs_residual": fmt_num(self.abs_residual),
            "rel_residual": fmt_num(self.rel_residual),
            "eval_bounds": fmt_num(self.eval_bounds),
            "converged": self.converged,
            "exact": self.exact,
            "note": self.note,
        }


@dataclass(frozen=True)
class RelationReport:
    """Adjudication outcome for one relation under one seed and precision."""

    relation_id: str
    anchor: str
    seed: int
    digits: int
    n_requested: int
    samples: Tuple[RelationInstance, ...]
    verdict: str                    # identity | not_identity | inconclusive
    worst_rel_residual: object
    counterexample: Optional[RelationInstance]
    transcription_flags: Tuple[str, ...] = ()
    n_converged: int = 0

    def as_dict(self, include_samples: bool = False) -> dict:
        out = {
            "relation_id": self.relation_id,
            "paper_anchor": self.anchor,
            "verdict": self.verdict,
            "n_samples": len(self.samples),
            "n_converged": self.n_converged,
            "worst_rel_residual": fmt_num(self.worst_rel_residual),
            "counterexample": self.counterexample.as_dict() if self.counterexample else None,
            "transcription_flags": list(self.transcription_flags),
        }
        if include_samples:
            out["samples"] = [s.as_dict() for s in self.samples]
        return out

    def csv_rows(self):
        for s in self.samples:
            i, j = s.lattice_indices if s.lattice_indices else (None, None)
            yield {
                "relation_id": self.relation_id,
                "index": s.index,
                "kind": s.kind,
                "i": i,
                "j": j,
                **{f"param_{k}": fmt_num(v) for k, v in s.params.items()},
                "lhs": fmt_num(s.lhs),
                "rhs": fmt_num(s.rhs),
                "abs_residual": fmt_num(s.abs_residual),
                "rel_residual": fmt_num(s.rel_residual),
                "eval_bounds": fmt_num(s.eval_bounds),
                "converged": s.converged,
                "exact": s.exact,
            }


def reindexed(inst: RelationInstance, index: int) -> RelationInstance:
    return replace(inst, index=index)
