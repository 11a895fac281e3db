"""Model files, random benchmark systems, result/report files, safety specs.

Model file layout (JSON)::

    {"A": [[...], ...],                       row-major system matrix
     "X0": {"center": [...], "generators": [[...], ...]},
     "U":  {"center": [...], "generators": [[...], ...]},
     "T": 3.0,
     "specs": [{"name": "...", "direction": [...], "bound": 0.0}, ...]}

Generator matrices are stored as lists of columns (one generator per entry).
Result files are JSON lines, one reachable segment per line. Floats are
emitted with shortest round-trip precision, so save/load is bit-exact.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .reach import (ExponentialAccumulator, LinearSystem, ReachSegment,
                    build_step_sets, minkowski_sum, propagate_step,
                    propagated_error)
from .taylor import MatrixPowers
from .tuner import ErrorLedger, ReachResult, StepRecord, run
from .zonotope import Zonotope, interval_hull, reduce_order, support


class ModelError(ValueError):
    """A model or result file failed to parse or validate."""


@dataclass(frozen=True)
class SafetySpec:
    """Halfspace requirement: every reachable set must satisfy
    ``support(set, direction) <= bound``."""

    name: str
    direction: np.ndarray
    bound: float

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=float).reshape(-1)
        if not np.all(np.isfinite(direction)):
            raise ModelError(f"spec {self.name!r}: direction must be finite")
        if not math.isfinite(self.bound):
            raise ModelError(f"spec {self.name!r}: bound must be finite")
        object.__setattr__(self, "direction", direction)


@dataclass(frozen=True)
class SpecVerdict:
    name: str
    satisfied: bool
    violating_index: int | None = None
    violating_time: float | None = None
    support_value: float | None = None
    bound: float = 0.0


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModelError(message)


def _zonotope_from_json(obj, label: str, dim: int | None = None) -> Zonotope:
    _require(isinstance(obj, dict), f"field {label} must be an object")
    _require("center" in obj, f"missing field {label}.center")
    center = np.asarray(obj["center"], dtype=float).reshape(-1)
    _require(np.all(np.isfinite(center)), f"field {label}.center must be finite")
    n = center.shape[0]
    if dim is not None:
        _require(n == dim, f"field {label}.center has length {n}, expected {dim}")
    columns = obj.get("generators", [])
    if columns:
        gens = np.asarray(columns, dtype=float)
        _require(gens.ndim == 2 and gens.shape[1] == n,
                 f"field {label}.generators must be a list of length-{n} columns")
        _require(bool(np.all(np.isfinite(gens))),
                 f"field {label}.generators must be finite")
        gens = gens.T
    else:
        gens = np.zeros((n, 0))
    return Zonotope(center, gens)


def _zonotope_to_json(z: Zonotope) -> dict:
    return {"center": z.center.tolist(), "generators": z.generators.T.tolist()}


def load_model(path) -> tuple[LinearSystem, list[SafetySpec]]:
    """Read and validate a model file; returns the system and its specs."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc
    _require(isinstance(raw, dict), f"{path}: top level must be an object")
    for name in ("A", "X0", "U", "T"):
        _require(name in raw, f"missing field {name}")
    a = np.asarray(raw["A"], dtype=float)
    _require(a.ndim == 2 and a.shape[0] == a.shape[1],
             f"field A must be a square matrix, got shape {a.shape}")
    _require(bool(np.all(np.isfinite(a))), "field A must be finite")
    n = a.shape[0]
    x0 = _zonotope_from_json(raw["X0"], "X0", n)
    u = _zonotope_from_json(raw["U"], "U", n)
    horizon = raw["T"]
    _require(isinstance(horizon, (int, float)) and math.isfinite(horizon)
             and horizon > 0, "field T must be a positive number")
    specs = []
    for i, entry in enumerate(raw.get("specs", [])):
        _require(isinstance(entry, dict), f"specs[{i}] must be an object")
        for name in ("direction", "bound"):
            _require(name in entry, f"missing field specs[{i}].{name}")
        spec = SafetySpec(name=str(entry.get("name", f"spec{i}")),
                          direction=entry["direction"], bound=float(entry["bound"]))
        _require(spec.direction.shape[0] == n,
                 f"specs[{i}].direction has length {spec.direction.shape[0]}, "
                 f"expected {n}")
        specs.append(spec)
    try:
        system = LinearSystem(a, x0, u, float(horizon))
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
    return system, specs


def save_model(path, system: LinearSystem, specs: tuple[SafetySpec, ...] = ()) -> None:
    payload = {
        "A": system.a.tolist(),
        "X0": _zonotope_to_json(system.initial_set),
        "U": _zonotope_to_json(system.input_set),
        "T": system.horizon,
    }
    if specs:
        payload["specs"] = [{"name": s.name, "direction": s.direction.tolist(),
                             "bound": s.bound} for s in specs]
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def random_system(dim: int, seed: int) -> LinearSystem:
    """Random stable-ish benchmark system with hypercube initial/input sets.

    Eigenvalues come in conjugate pairs with real part uniform on [-1, 1]
    and imaginary part uniform on [0, 1] (mirrored); an odd dimension gets
    one extra real eigenvalue. The block-diagonal real form is conjugated
    by a product of random Givens rotations: ceil(n/2) of them for n <= 10,
    n of them above, so the rotation stays sparse relative to a dense
    orthogonal factor as the dimension grows. X0 is the hypercube centered
    at (10, ..., 10) with edge 0.5, U the one at (1, ..., 1) with edge 0.1,
    and the horizon is 3.
    """
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    blocks = np.zeros((dim, dim))
    for p in range(dim // 2):
        re = rng.uniform(-1.0, 1.0)
        im = rng.uniform(0.0, 1.0)
        i = 2 * p
        blocks[i:i + 2, i:i + 2] = [[re, im], [-im, re]]
    if dim % 2:
        blocks[-1, -1] = rng.uniform(-1.0, 1.0)
    rotations = math.ceil(dim / 2) if dim <= 10 else dim
    q = np.eye(dim)
    for _ in range(rotations):
        i, j = sorted(rng.choice(dim, size=2, replace=False))
        theta = rng.uniform(0.0, 2.0 * math.pi)
        giv = np.eye(dim)
        giv[i, i] = giv[j, j] = math.cos(theta)
        giv[i, j] = -math.sin(theta)
        giv[j, i] = math.sin(theta)
        q = q @ giv
    a = q @ blocks @ q.T
    x0 = Zonotope.box(np.full(dim, 10.0), np.full(dim, 0.25))
    u = Zonotope.box(np.full(dim, 1.0), np.full(dim, 0.05))
    return LinearSystem(a, x0, u, 3.0)


def write_result(path, result: ReachResult) -> None:
    """One JSON line per segment: window, set data and its interval hull."""
    with open(path, "w") as fh:
        for seg in result.segments:
            hull = interval_hull(seg.set)
            line = {"t_lo": seg.t_lo, "t_hi": seg.t_hi,
                    "center": seg.set.center.tolist(),
                    "generators": seg.set.generators.T.tolist(),
                    "interval_lo": hull.lo.tolist(),
                    "interval_hi": hull.hi.tolist()}
            fh.write(json.dumps(line))
            fh.write("\n")


def read_result(path) -> list[ReachSegment]:
    segments = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ModelError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            for name in ("t_lo", "t_hi", "center"):
                _require(name in obj, f"{path}:{lineno}: missing field {name}")
            z = _zonotope_from_json(
                {"center": obj["center"], "generators": obj.get("generators", [])},
                f"{path}:{lineno}")
            segments.append(ReachSegment(float(obj["t_lo"]), float(obj["t_hi"]), z))
    _require(bool(segments), f"{path}: result file is empty")
    return segments


@dataclass(frozen=True)
class RunReport:
    """Summary of one analysis run, serializable as a single JSON object."""

    dimension: int
    steps: int
    dt_min: float
    dt_max: float
    wall_time: float
    tuning_time_fraction: float
    input_error_total: float
    reduction_error_total: float
    max_step_hom_error: float
    budget: dict | None
    series: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension, "steps": self.steps,
            "dt_min": self.dt_min, "dt_max": self.dt_max,
            "wall_time": self.wall_time,
            "tuning_time_fraction": self.tuning_time_fraction,
            "input_error_total": self.input_error_total,
            "reduction_error_total": self.reduction_error_total,
            "max_step_hom_error": self.max_step_hom_error,
            "budget": self.budget, "series": self.series,
        }


def report_from_result(result: ReachResult, dimension: int) -> RunReport:
    records = result.ledger.records
    budget = None
    if result.budget is not None:
        budget = {"hom_max": result.budget.hom_max,
                  "input_max": result.budget.input_max,
                  "reduction_max": result.budget.reduction_max,
                  "total": result.budget.total}
    return RunReport(
        dimension=dimension,
        steps=result.steps,
        dt_min=result.dt_min,
        dt_max=result.dt_max,
        wall_time=result.total_seconds,
        tuning_time_fraction=result.tuning_time_fraction,
        input_error_total=result.ledger.input_acc,
        reduction_error_total=result.ledger.reduction_acc,
        max_step_hom_error=result.ledger.max_hom_error,
        budget=budget,
        series={"t": [r.t_lo for r in records],
                "dt": [r.dt for r in records],
                "taylor_order": [r.taylor_order for r in records],
                "zonotope_order": [r.zonotope_order for r in records],
                "retries": [r.retries for r in records]},
    )


def write_report(path, report: RunReport) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json(), fh)
        fh.write("\n")


def read_report(path) -> RunReport:
    with open(path) as fh:
        obj = json.load(fh)
    return RunReport(**obj)


def check_specs(segments, specs) -> list[SpecVerdict]:
    """Evaluate each halfspace spec against every segment.

    A spec passes when ``support(set, direction) <= bound`` on all segments;
    otherwise the verdict names the first violating segment.
    """
    if isinstance(segments, ReachResult):
        segments = segments.segments
    verdicts = []
    for spec in specs:
        verdict = SpecVerdict(spec.name, True, bound=spec.bound)
        for i, seg in enumerate(segments):
            value = support(seg.set, spec.direction)
            if value > spec.bound:
                verdict = SpecVerdict(spec.name, False, violating_index=i,
                                      violating_time=seg.t_lo,
                                      support_value=value, bound=spec.bound)
                break
        verdicts.append(verdict)
    return verdicts


def run_adaptive(system: LinearSystem, eps_max: float,
                 weights: tuple[float, float, float] | None = None,
                 out_path=None, report_path=None) -> tuple[ReachResult, RunReport]:
    """Adaptive analysis plus optional result/report files."""
    if weights is None:
        result = run(system, eps_max)
    else:
        result = run(system, eps_max, weights)
    report = report_from_result(result, system.dim)
    if out_path is not None:
        write_result(out_path, result)
    if report_path is not None:
        write_report(report_path, report)
    return result, report


def run_fixed_baseline(system: LinearSystem, dt: float, eta: int, rho: float,
                       out_path=None, report_path=None) -> tuple[ReachResult, RunReport]:
    """Same pipeline with tuning disabled: fixed step, order and set order.

    Errors are still tracked in the ledger but no budget is enforced, so
    the reported totals are informational only. The final step is clamped
    when ``dt`` does not divide the horizon.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"baseline dt must be positive, got {dt}")
    if eta < 1:
        raise ValueError(f"baseline eta must be >= 1, got {eta}")
    if rho < 1:
        raise ValueError(f"baseline rho must be >= 1, got {rho}")
    horizon = system.horizon
    powers = MatrixPowers(system.a)
    acc = ExponentialAccumulator.identity(system.dim)
    ledger = ErrorLedger()
    p_accum = Zonotope.point(np.zeros(system.dim))
    segments = []
    sets_cache: dict[float, object] = {}
    t = 0.0
    start = time.perf_counter()
    while t < horizon:
        width = dt
        if t + dt >= horizon * (1.0 - 1e-12) or horizon - (t + dt) < 1e-9:
            width = horizon - t
        sets = sets_cache.get(width)
        if sets is None:
            sets = build_step_sets(system, width, eta, powers)
            sets_cache[width] = sets
        hom_err = propagated_error(acc, sets.hom_error)
        input_err = propagated_error(acc, sets.inh_error)
        window, p_next = propagate_step(acc, sets, p_accum)
        p_next, reduction_err = reduce_order(p_next, rho)
        t_hi = horizon if width == horizon - t else t + width
        segments.append(ReachSegment(t, t_hi, minkowski_sum(window, p_accum)))
        ledger.add(StepRecord(
            t_lo=t, t_hi=t_hi, dt=width, taylor_order=eta,
            zonotope_order=p_next.order, hom_error=hom_err,
            input_error=input_err, reduction_error=reduction_err, retries=0))
        acc = acc.advanced(sets.propagator, sets.remainder, width)
        p_accum = p_next
        t = t_hi
    total = time.perf_counter() - start
    result = ReachResult(segments=segments, ledger=ledger, budget=None,
                         tuning_seconds=0.0, total_seconds=total)
    report = report_from_result(result, system.dim)
    if out_path is not None:
        write_result(out_path, result)
    if report_path is not None:
        write_report(report_path, report)
    return result, report
