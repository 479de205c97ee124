"""Instance I/O, benchmark orchestration, and performance-profile emission.

Instances are stored as JSON: ``{"jobs": [{"p":..,"r":..,"d":..}, ...]}``
for scheduling and ``{"W":.., "UB":.., "rects":[{"L":..,"H":..}, ...]}`` for
strip packing (``UB`` optional, defaulting to the summed widths).

``run_bench`` runs a factorial (instance x concept x reformulation) sweep
and returns one record per completed run plus an explicit report of the
concept/reformulation pairs that were rejected as incompatible.  Gaps are
reported in percent with the incumbent in the denominator, and ``inf``
marks runs that ended without an incumbent.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .builders import (
    Job,
    Rect,
    SchedulingInstance,
    StripInstance,
    build_gp,
    build_gp_strengthened,
    build_ip,
    build_strip,
    build_ts,
)
from .milp import GAP_EPS, BBConfig, SolveResult, solve_bb
from .model import GdpModel, MilpModel
from .reformulate import reformulate_bigm, reformulate_hull, reformulate_rhr

Instance = Union[SchedulingInstance, StripInstance]

SCHED_CONCEPTS: Dict[str, Callable[[SchedulingInstance], GdpModel]] = {
    "GP": build_gp,
    "GP_S": build_gp_strengthened,
    "IP": build_ip,
    "TS": build_ts,
}
STRIP_CONCEPTS: Dict[str, Callable[[StripInstance], GdpModel]] = {
    v: partial(build_strip, variant=v) for v in ("S_original", "S_symbreak", "S0", "S1")
}
CONCEPTS: Dict[str, Callable] = {**SCHED_CONCEPTS, **STRIP_CONCEPTS}

REFORMULATIONS = ("BM", "HR", "RHR")

# Concepts whose disjunctions share a left-hand side as built.
RHR_NATIVE = {"GP_S", "TS", "S0", "S1"}
# Concepts that reach shared form through the alignment pass.
RHR_ALIGNABLE = {"GP", "S_original", "S_symbreak"}

SOLVED_STATUSES = ("optimal", "gap_limit")

CSV_FIELDS = (
    "instance",
    "concept",
    "reformulation",
    "status",
    "objective",
    "bound",
    "gap",
    "nodes",
    "wall_time",
)


class InstanceFormatError(ValueError):
    """An instance file violates the JSON schema or an instance invariant."""


@dataclass(frozen=True)
class BenchRecord:
    instance: str
    concept: str
    reformulation: str
    status: str
    objective: float  # incumbent; inf when none was found
    bound: float
    gap: float  # percent, inf when no incumbent
    nodes: int
    wall_time: float


def load_instance(path: Union[str, Path]) -> Instance:
    """Parse an instance file, with field-level diagnostics on bad input."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path}: top level must be an object")

    def number(obj: dict, key: str, where: str) -> float:
        if key not in obj:
            raise InstanceFormatError(f"{path}: {where}: missing field {key!r}")
        val = obj[key]
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise InstanceFormatError(f"{path}: {where}: field {key!r} must be a number")
        return float(val)

    if "jobs" in data:
        if not isinstance(data["jobs"], list) or not data["jobs"]:
            raise InstanceFormatError(f"{path}: 'jobs' must be a nonempty list")
        jobs = []
        for i, obj in enumerate(data["jobs"]):
            if not isinstance(obj, dict):
                raise InstanceFormatError(f"{path}: job {i}: must be an object")
            jobs.append(
                Job(number(obj, "p", f"job {i}"), number(obj, "r", f"job {i}"), number(obj, "d", f"job {i}"))
            )
        try:
            return SchedulingInstance(jobs)
        except ValueError as exc:
            raise InstanceFormatError(f"{path}: {exc}")
    if "rects" in data:
        if not isinstance(data["rects"], list) or not data["rects"]:
            raise InstanceFormatError(f"{path}: 'rects' must be a nonempty list")
        rects = []
        for i, obj in enumerate(data["rects"]):
            if not isinstance(obj, dict):
                raise InstanceFormatError(f"{path}: rectangle {i}: must be an object")
            rects.append(
                Rect(number(obj, "L", f"rectangle {i}"), number(obj, "H", f"rectangle {i}"))
            )
        W = number(data, "W", "strip")
        UB = number(data, "UB", "strip") if "UB" in data else None
        try:
            return StripInstance(rects, W, UB)
        except ValueError as exc:
            raise InstanceFormatError(f"{path}: {exc}")
    raise InstanceFormatError(f"{path}: expected a 'jobs' or 'rects' field")


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    if isinstance(inst, SchedulingInstance):
        data = {"jobs": [{"p": j.p, "r": j.r, "d": j.d} for j in inst.jobs]}
    else:
        data = {
            "W": inst.W,
            "UB": inst.UB,
            "rects": [{"L": r.L, "H": r.H} for r in inst.rects],
        }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def build_model(instance: Instance, concept: str) -> GdpModel:
    if concept not in CONCEPTS:
        raise ValueError(f"unknown concept {concept!r}; expected one of {sorted(CONCEPTS)}")
    if concept in SCHED_CONCEPTS and not isinstance(instance, SchedulingInstance):
        raise TypeError(f"concept {concept} needs a scheduling instance")
    if concept in STRIP_CONCEPTS and not isinstance(instance, StripInstance):
        raise TypeError(f"concept {concept} needs a strip instance")
    return CONCEPTS[concept](instance)


def reformulate_model(model: GdpModel, reformulation: str, auto_align: bool = False) -> MilpModel:
    if reformulation == "BM":
        return reformulate_bigm(model)
    if reformulation == "HR":
        return reformulate_hull(model)
    if reformulation == "RHR":
        return reformulate_rhr(model, auto_align=auto_align)
    raise ValueError(f"unknown reformulation {reformulation!r}")


def check_compatible(concept: str, reformulation: str, auto_align: bool) -> Optional[str]:
    """Reason the pair cannot run, or None when it can."""
    if reformulation != "RHR":
        return None
    if concept == "IP":
        return "IP disjuncts use different coefficient matrices; RHR is not applied"
    if concept in RHR_NATIVE:
        return None
    if concept in RHR_ALIGNABLE and auto_align:
        return None
    return f"{concept} needs --auto-align for RHR (disjuncts do not share a left-hand side)"


def _record_from_result(
    instance_id: str, concept: str, reformulation: str, res: SolveResult
) -> BenchRecord:
    if math.isfinite(res.objective):
        gap_pct = max(0.0, 100.0 * (res.objective - res.bound) / max(abs(res.objective), GAP_EPS))
    else:
        gap_pct = math.inf
    return BenchRecord(
        instance=instance_id,
        concept=concept,
        reformulation=reformulation,
        status=res.status,
        objective=res.objective,
        bound=res.bound,
        gap=gap_pct,
        nodes=res.nodes,
        wall_time=res.wall_time,
    )


def run_single(
    instance_id: str,
    instance: Instance,
    concept: str,
    reformulation: str,
    config: Optional[BBConfig] = None,
    auto_align: bool = False,
) -> BenchRecord:
    model = build_model(instance, concept)
    milp = reformulate_model(model, reformulation, auto_align)
    res = solve_bb(milp, config)
    return _record_from_result(instance_id, concept, reformulation, res)


def _bench_task(args) -> BenchRecord:
    return run_single(*args)


def run_bench(
    instances: Sequence[Tuple[str, Instance]],
    concepts: Sequence[str],
    reformulations: Sequence[str],
    config: Optional[BBConfig] = None,
    auto_align: bool = False,
    workers: int = 1,
) -> Tuple[List[BenchRecord], List[Tuple[str, str, str]]]:
    """Full factorial sweep.

    Returns ``(records, rejections)`` where each rejection is a
    ``(concept, reformulation, reason)`` triple for a pair that cannot run;
    rejected pairs are reported rather than silently skipped.  Record order
    follows the input orders of instances, concepts, and reformulations.
    """
    rejections: List[Tuple[str, str, str]] = []
    runnable: List[Tuple[str, str]] = []
    for concept in concepts:
        for reform in reformulations:
            reason = check_compatible(concept, reform, auto_align)
            if reason is None:
                runnable.append((concept, reform))
            else:
                rejections.append((concept, reform, reason))
    tasks = [
        (iid, inst, concept, reform, config, auto_align)
        for iid, inst in instances
        for concept, reform in runnable
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_bench_task, tasks))
    else:
        records = [_bench_task(t) for t in tasks]
    return records, rejections


def _fmt(value: float) -> str:
    return repr(float(value))


def records_to_csv(records: Sequence[BenchRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow(
            [
                r.instance,
                r.concept,
                r.reformulation,
                r.status,
                _fmt(r.objective),
                _fmt(r.bound),
                _fmt(r.gap),
                r.nodes,
                _fmt(r.wall_time),
            ]
        )
    return out.getvalue()


def records_from_csv(text: str) -> List[BenchRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        BenchRecord(
            instance=row["instance"],
            concept=row["concept"],
            reformulation=row["reformulation"],
            status=row["status"],
            objective=float(row["objective"]),
            bound=float(row["bound"]),
            gap=float(row["gap"]),
            nodes=int(row["nodes"]),
            wall_time=float(row["wall_time"]),
        )
        for row in reader
    ]


def _profile_metric(record: BenchRecord, axis: str) -> Optional[float]:
    if axis == "time":
        return record.wall_time if record.status in SOLVED_STATUSES else None
    if axis == "gap":
        return record.gap if math.isfinite(record.objective) else None
    raise ValueError(f"unknown profile axis {axis!r}")


def emit_profile(records: Sequence[BenchRecord], axis: str = "time") -> str:
    """Cumulative step-function profile per variant, as CSV.

    One column per (concept, reformulation) variant plus virtual-best and
    virtual-worst envelopes taken per instance across variants.  A run with
    no metric on the axis (unsolved on the time axis, incumbent-free on the
    gap axis) never contributes, so its column plateaus; the virtual-worst
    envelope drops any instance some variant failed on.
    """
    if not records:
        raise ValueError("no records to profile")
    variants = sorted({(r.concept, r.reformulation) for r in records})
    instances = sorted({r.instance for r in records})
    metric: Dict[Tuple[str, str], Dict[str, Optional[float]]] = {
        v: {i: None for i in instances} for v in variants
    }
    for r in records:
        metric[(r.concept, r.reformulation)][r.instance] = _profile_metric(r, axis)

    columns: Dict[str, List[float]] = {}
    for concept, reform in variants:
        vals = [m for m in metric[(concept, reform)].values() if m is not None]
        columns[f"{concept}_{reform}"] = sorted(vals)
    best: List[float] = []
    worst: List[float] = []
    for i in instances:
        per_variant = [metric[v][i] for v in variants]
        finite = [m for m in per_variant if m is not None]
        if finite:
            best.append(min(finite))
        if len(finite) == len(per_variant):
            worst.append(max(finite))
    columns["virtual_best"] = sorted(best)
    columns["virtual_worst"] = sorted(worst)

    thresholds = sorted({m for vals in columns.values() for m in vals})
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["threshold"] + list(columns))
    for th in thresholds:
        row = [_fmt(th)]
        for vals in columns.values():
            row.append(str(sum(1 for m in vals if m <= th)))
        writer.writerow(row)
    return out.getvalue()
