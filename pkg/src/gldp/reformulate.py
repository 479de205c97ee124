"""Reformulation passes from disjunctive programs to flat MILPs.

Three passes are provided:

``reformulate_bigm``
    Relaxes each disjunct row by a big-M term that vanishes when the
    disjunct's indicator is on.  Compact but with a weak LP relaxation.

``reformulate_hull``
    Disaggregates the continuous variables appearing in each disjunction and
    links the copies to the indicators, so the LP relaxation of each
    disjunction is the convex hull of its box-clipped disjuncts.

``reformulate_rhr``
    For disjunctions whose disjuncts share one coefficient matrix and differ
    only in right-hand sides, collapses the hull's disaggregated variables by
    summing the per-disjunct rows, leaving one inequality per shared row with
    an indicator-weighted right-hand side.  Adds no continuous variables.

``align_disjunction`` upgrades a disjunction to the shared-coefficient form
by embedding box-implied bounds into every disjunct, which enables the
reaggregated pass on models that do not have the structure natively.
"""

from __future__ import annotations

import math
from typing import Dict, List, Mapping, Tuple

from .model import (
    EQ,
    GE,
    LE,
    Disjunct,
    Disjunction,
    GdpModel,
    LinRow,
    MilpModel,
    _MilpBuilder,
    canonicalize_rows,
    validate,
)

Boxes = Mapping[int, Tuple[float, float]]


class SharedLhsViolation(ValueError):
    """A disjunction lacks the shared left-hand-side structure needed for RHR."""


def interval_max(coeffs: Mapping[int, float], boxes: Boxes) -> float:
    """Exact maximum of ``sum(a_v * x_v)`` over the variable boxes."""
    total = 0.0
    for v, a in coeffs.items():
        lo, hi = boxes[v]
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"variable {v} has an unbounded box")
        total += a * (hi if a > 0 else lo)
    return total


def big_m_bound(row: LinRow, boxes: Boxes) -> float:
    """Maximum violation of a ``<=`` row over the variable boxes.

    Returns ``max_x (a^T x - rhs)``, which may be negative when the row can
    never be violated inside the box; the big-M pass clamps at zero.
    """
    if row.sense != LE:
        raise ValueError("big_m_bound expects a canonical <= row")
    return interval_max(row.coeffs, boxes) - row.rhs


def _coeff_key(row: LinRow) -> tuple:
    return tuple(sorted(row.coeffs.items()))


def shared_lhs(disjunction: Disjunction) -> bool:
    """True iff all disjuncts carry identical coefficient matrices.

    Rows are canonicalized first; the comparison is positional and requires
    exact coefficient equality (no rescaling detection).
    """
    canon = [canonicalize_rows(d) for d in disjunction.disjuncts]
    first = [_coeff_key(r) for r in canon[0].rows]
    for d in canon[1:]:
        if [_coeff_key(r) for r in d.rows] != first:
            return False
    return True


def align_disjunction(disjunction: Disjunction, boxes: Boxes) -> Disjunction:
    """Embed box-implied bounds so all disjuncts share one coefficient matrix.

    For every coefficient vector appearing in any disjunct, each disjunct
    receives that row with right-hand side equal to the interval maximum of
    the row's left-hand side over the box (a valid, non-cutting bound); where
    the disjunct already carries the row, the tighter right-hand side is
    kept.  The result satisfies ``shared_lhs`` and has the same feasible set
    within the box; the operation is idempotent.
    """
    canon = [canonicalize_rows(d) for d in disjunction.disjuncts]
    keys = sorted({_coeff_key(r) for d in canon for r in d.rows})
    aligned = []
    for d in canon:
        existing: Dict[tuple, float] = {}
        for r in d.rows:
            k = _coeff_key(r)
            existing[k] = min(existing.get(k, math.inf), r.rhs)
        rows = [
            LinRow(dict(k), min(existing.get(k, math.inf), interval_max(dict(k), boxes)), LE)
            for k in keys
        ]
        aligned.append(Disjunct(d.indicator, rows))
    return Disjunction(aligned, disjunction.label)


def _require_valid(model: GdpModel) -> None:
    diags = validate(model)
    if diags:
        raise ValueError("invalid model: " + "; ".join(diags))


def _base_builder(model: GdpModel, pass_name: str) -> Tuple[_MilpBuilder, List[int]]:
    """Copy variables, globals, logic, and objective shared by every pass."""
    b = _MilpBuilder(f"{model.name or 'model'}_{pass_name}")
    for v in model.vars:
        b.add_cont(v.name, v.lower, v.upper)
    ymap = [b.add_bin(nm) for nm in model.bools]
    for gi, row in enumerate(model.global_rows):
        b.add_row(row.coeffs, row.sense, row.rhs, f"global[{gi}]")
    for li, lrow in enumerate(model.logic):
        b.add_row(
            {ymap[v]: float(a) for v, a in lrow.coeffs.items()},
            lrow.sense,
            float(lrow.rhs),
            f"logic[{li}]",
        )
    b.objective = {v: float(a) for v, a in model.objective.items()}
    return b, ymap


def _xor_row(b: _MilpBuilder, ymap: List[int], disj: Disjunction, tag: str) -> None:
    b.add_row({ymap[d.indicator]: 1.0 for d in disj.disjuncts}, EQ, 1.0, tag)


def _disj_tag(k: int, disj: Disjunction) -> str:
    return f"d{k}" + (f"({disj.label})" if disj.label else "")


def reformulate_bigm(model: GdpModel) -> MilpModel:
    """Big-M reformulation.

    Each disjunct row ``a^T x <= rhs`` becomes ``a^T x - rhs <= M (1 - y)``
    with ``M`` the row's maximum violation over the box, clamped at zero, plus
    one assignment equality per disjunction.  No continuous variables are
    added.
    """
    _require_valid(model)
    boxes = model.boxes()
    b, ymap = _base_builder(model, "bigm")
    for k, disj in enumerate(model.disjunctions):
        tag = _disj_tag(k, disj)
        for j, d in enumerate(disj.disjuncts):
            y = ymap[d.indicator]
            for ri, row in enumerate(canonicalize_rows(d).rows):
                m = max(0.0, big_m_bound(row, boxes))
                coeffs = dict(row.coeffs)
                coeffs[y] = m
                b.add_row(coeffs, LE, row.rhs + m, f"bigm:{tag}:j{j}:r{ri}")
        _xor_row(b, ymap, disj, f"bigm:{tag}:xor")
    return b.build()


def reformulate_hull(model: GdpModel) -> MilpModel:
    """Hull reformulation via variable disaggregation.

    Only variables that actually appear in a disjunction's rows are
    disaggregated for that disjunction; variables with zero coefficients
    would contribute vacuous copies.
    """
    _require_valid(model)
    b, ymap = _base_builder(model, "hull")
    for k, disj in enumerate(model.disjunctions):
        tag = _disj_tag(k, disj)
        canon = [canonicalize_rows(d) for d in disj.disjuncts]
        dvars = sorted({v for d in canon for r in d.rows for v in r.coeffs})
        copies: Dict[Tuple[int, int], int] = {}
        for j, d in enumerate(canon):
            y = ymap[d.indicator]
            for v in dvars:
                lo, hi = model.vars[v].lower, model.vars[v].upper
                copies[(j, v)] = b.add_cont(
                    f"{model.vars[v].name}__{tag}_j{j}", min(lo, 0.0), max(hi, 0.0)
                )
            for ri, row in enumerate(d.rows):
                coeffs = {copies[(j, v)]: a for v, a in row.coeffs.items()}
                coeffs[y] = -row.rhs
                b.add_row(coeffs, LE, 0.0, f"hull:{tag}:j{j}:r{ri}")
            for v in dvars:
                lo, hi = model.vars[v].lower, model.vars[v].upper
                xh = copies[(j, v)]
                b.add_row({xh: 1.0, y: -hi}, LE, 0.0, f"hull:{tag}:j{j}:ub[{v}]")
                b.add_row({xh: -1.0, y: lo}, LE, 0.0, f"hull:{tag}:j{j}:lb[{v}]")
        for v in dvars:
            coeffs = {v: 1.0}
            for j in range(len(canon)):
                coeffs[copies[(j, v)]] = -1.0
            b.add_row(coeffs, EQ, 0.0, f"hull:{tag}:agg[{v}]")
        _xor_row(b, ymap, disj, f"hull:{tag}:xor")
    return b.build()


def reformulate_rhr(model: GdpModel, auto_align: bool = False) -> MilpModel:
    """Reaggregated hull reformulation for shared-coefficient disjunctions.

    Emits one row per shared coefficient vector, ``a^T x <= sum_j rhs_j y_j``,
    plus the assignment equality.  The MILP has exactly as many continuous
    variables as the input model.  Disjunctions failing ``shared_lhs`` raise
    :class:`SharedLhsViolation` unless ``auto_align`` is set, in which case
    :func:`align_disjunction` is applied first.
    """
    _require_valid(model)
    boxes = model.boxes()
    b, ymap = _base_builder(model, "rhr")
    for k, disj in enumerate(model.disjunctions):
        tag = _disj_tag(k, disj)
        if not shared_lhs(disj):
            if not auto_align:
                raise SharedLhsViolation(
                    f"disjunction {k}"
                    + (f" ({disj.label})" if disj.label else "")
                    + " does not share a left-hand side; align it first"
                )
            disj = align_disjunction(disj, boxes)
        canon = [canonicalize_rows(d) for d in disj.disjuncts]
        for ri in range(len(canon[0].rows)):
            coeffs = dict(canon[0].rows[ri].coeffs)
            for j, d in enumerate(canon):
                coeffs[ymap[d.indicator]] = -d.rows[ri].rhs
            b.add_row(coeffs, LE, 0.0, f"rhr:{tag}:r{ri}")
        _xor_row(b, ymap, disj, f"rhr:{tag}:xor")
    return b.build()
