"""LP relaxations and branch-and-bound for the reformulated MILPs.

``solve_lp`` solves the LP relaxation (binaries relaxed to [0, 1]) through
SciPy's HiGHS dual simplex, which returns a deterministic optimal basic
solution.  ``solve_bb`` wraps it in a best-bound branch-and-bound that
branches on the most fractional binary and terminates on a relative
optimality gap, matching how the case-study runs are reported.

No cutting planes and no model tightening are applied anywhere: node
relaxations are exactly the formulation being measured, so bound
comparisons between reformulations are meaningful.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .model import EQ, GE, LE, MilpModel

INT_TOL = 1e-6
FEAS_TOL = 1e-7
GAP_EPS = 1e-9
PRUNE_TOL = 1e-9

LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


@dataclass
class LpResult:
    """Outcome of one LP relaxation solve."""

    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: Optional[float]
    x: Optional[np.ndarray]


@dataclass
class BBConfig:
    rel_gap: float = 1e-4
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    keep_trace: bool = False


@dataclass
class SolveResult:
    """Outcome of a branch-and-bound run.

    ``status`` is one of:

    - ``optimal``: the search tree was exhausted; the incumbent is proven
      optimal and ``bound`` equals the incumbent.
    - ``gap_limit``: open nodes remain but the relative gap dropped to the
      configured tolerance; the incumbent is optimal within that gap.
    - ``time_limit`` / ``node_limit``: a resource limit fired first.
    - ``infeasible``: the tree was exhausted without any feasible point.

    ``objective`` is the incumbent value (``inf`` when none exists), ``gap``
    is ``(objective - bound) / max(|objective|, 1e-9)`` and ``inf`` without
    an incumbent.  ``trace`` (with ``keep_trace``) records
    ``(nodes, bound, incumbent)`` at every processed node.
    """

    status: str
    objective: float
    bound: float
    gap: float
    nodes: int
    wall_time: float
    x: Optional[np.ndarray]
    trace: Optional[List[Tuple[int, float, float]]] = None


class _CompiledLp:
    """Matrices for a model's LP relaxation, reused across node solves."""

    def __init__(self, model: MilpModel):
        n = len(model.variables)
        self.n = n
        self.c = np.zeros(n)
        for v, a in model.objective.items():
            self.c[v] = a
        self.bounds = np.array(
            [(v.lower, v.upper) for v in model.variables], dtype=float
        ).reshape(n, 2)
        ub_rows: List[Tuple[Dict[int, float], float]] = []
        eq_rows: List[Tuple[Dict[int, float], float]] = []
        for r in model.rows:
            if not r.coeffs:
                continue  # empty rows carry no information for the LP
            if r.sense == LE:
                ub_rows.append((r.coeffs, r.rhs))
            elif r.sense == GE:
                ub_rows.append(({v: -a for v, a in r.coeffs.items()}, -r.rhs))
            else:
                eq_rows.append((r.coeffs, r.rhs))
        self.A_ub, self.b_ub = self._assemble(ub_rows)
        self.A_eq, self.b_eq = self._assemble(eq_rows)

    def _assemble(self, rows) -> Tuple[Optional[sp.csr_matrix], Optional[np.ndarray]]:
        if not rows:
            return None, None
        ri, ci, vals, rhs = [], [], [], []
        for idx, (coeffs, b) in enumerate(rows):
            rhs.append(b)
            for v, a in coeffs.items():
                ri.append(idx)
                ci.append(v)
                vals.append(a)
        mat = sp.csr_matrix((vals, (ri, ci)), shape=(len(rows), self.n))
        return mat, np.asarray(rhs, dtype=float)

    def solve(self, bounds: Optional[np.ndarray] = None) -> LpResult:
        res = linprog(
            self.c,
            A_ub=self.A_ub,
            b_ub=self.b_ub,
            A_eq=self.A_eq,
            b_eq=self.b_eq,
            bounds=self.bounds if bounds is None else bounds,
            method="highs-ds",
            options=LP_OPTIONS,
        )
        if res.status == 0:
            return LpResult("optimal", float(res.fun), np.asarray(res.x, dtype=float))
        if res.status == 2:
            return LpResult("infeasible", None, None)
        if res.status == 3:
            return LpResult("unbounded", None, None)
        raise RuntimeError(f"LP solve failed: {res.message}")


def solve_lp(
    model: MilpModel,
    bound_overrides: Optional[Mapping[int, Tuple[float, float]]] = None,
) -> LpResult:
    """Solve the LP relaxation of ``model`` (binary integrality dropped).

    ``bound_overrides`` replaces selected variable boxes, e.g. to fix a
    variable to a point.  All boxes must be finite, which rules out
    unbounded LPs.
    """
    compiled = _CompiledLp(model)
    bounds = compiled.bounds
    if bound_overrides:
        bounds = bounds.copy()
        for v, (lo, hi) in bound_overrides.items():
            bounds[v] = (lo, hi)
    return compiled.solve(bounds)


def max_violation(model: MilpModel, x: np.ndarray) -> float:
    """Largest constraint or box violation of a point (0 when feasible)."""
    worst = 0.0
    for i, v in enumerate(model.variables):
        worst = max(worst, v.lower - x[i], x[i] - v.upper)
    for r in model.rows:
        lhs = sum(a * x[v] for v, a in r.coeffs.items())
        if r.sense == LE:
            worst = max(worst, lhs - r.rhs)
        elif r.sense == GE:
            worst = max(worst, r.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - r.rhs))
    return worst


def _relative_gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    return (incumbent - bound) / max(abs(incumbent), GAP_EPS)


def solve_bb(model: MilpModel, config: Optional[BBConfig] = None) -> SolveResult:
    """Branch-and-bound over LP relaxations.

    Best-bound node selection (ties broken toward deeper nodes, then
    insertion order); branching fixes the most fractional binary (lowest
    index on ties) to 0 and to 1.  Nodes are pruned by bound, infeasibility,
    and integrality.  Deterministic for a given model and configuration,
    apart from ``wall_time``.
    """
    cfg = config or BBConfig()
    t0 = time.perf_counter()
    compiled = _CompiledLp(model)
    bins = np.array(model.binary_indices, dtype=int)
    trace: Optional[List[Tuple[int, float, float]]] = [] if cfg.keep_trace else None

    nodes = 0
    incumbent = math.inf
    inc_x: Optional[np.ndarray] = None

    def result(status: str, bound: float) -> SolveResult:
        bound = min(bound, incumbent)
        return SolveResult(
            status=status,
            objective=incumbent,
            bound=bound,
            gap=max(0.0, _relative_gap(incumbent, bound)),
            nodes=nodes,
            wall_time=time.perf_counter() - t0,
            x=inc_x,
            trace=trace,
        )

    root = compiled.solve()
    nodes += 1
    if root.status == "infeasible":
        return result("infeasible", math.inf)
    if root.status != "optimal":
        raise RuntimeError("LP relaxation unbounded despite finite boxes")

    def most_fractional(x: np.ndarray) -> Optional[int]:
        if bins.size == 0:
            return None
        frac = np.abs(x[bins] - np.round(x[bins]))
        best = int(np.argmax(frac))
        return None if frac[best] <= INT_TOL else int(bins[best])

    counter = itertools.count()
    heap: List[Tuple[float, int, int, np.ndarray, np.ndarray]] = []
    branch0 = most_fractional(root.x)
    if branch0 is None:
        incumbent = root.objective
        inc_x = root.x
        if trace is not None:
            trace.append((nodes, incumbent, incumbent))
        return result("optimal", incumbent)
    heapq.heappush(heap, (root.objective, 0, next(counter), root.x, compiled.bounds))

    while heap:
        bound, neg_depth, _, x, node_bounds = heapq.heappop(heap)
        if bound >= incumbent - PRUNE_TOL:
            continue
        if trace is not None:
            trace.append((nodes, bound, incumbent))
        if _relative_gap(incumbent, bound) <= cfg.rel_gap:
            return result("gap_limit", bound)
        if cfg.time_limit is not None and time.perf_counter() - t0 >= cfg.time_limit:
            return result("time_limit", bound)
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            return result("node_limit", bound)

        branch = most_fractional(x)
        assert branch is not None  # integral nodes never enter the heap
        for val in (0.0, 1.0):
            child_bounds = node_bounds.copy()
            child_bounds[branch] = (val, val)
            res = compiled.solve(child_bounds)
            nodes += 1
            if res.status != "optimal":
                continue
            child_bound = max(res.objective, bound)  # keep bounds monotone
            if child_bound >= incumbent - PRUNE_TOL:
                continue
            frac_var = most_fractional(res.x)
            if frac_var is None:
                incumbent = res.objective
                inc_x = res.x
            else:
                heapq.heappush(
                    heap,
                    (child_bound, neg_depth - 1, next(counter), res.x, child_bounds),
                )

    if inc_x is None:
        return result("infeasible", math.inf)
    return result("optimal", incumbent)
