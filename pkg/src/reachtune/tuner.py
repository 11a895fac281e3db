"""Runtime self-tuning of all algorithm parameters against an error budget.

The user supplies a single bound ``eps_max``. It is split into three parts:
a per-step cap on the homogeneous error, and two accumulating budgets for
the input-driven error and the order-reduction error. Each step searches
``(dt, eta)`` until both per-step error values pass their bounds, then
reduces the accumulated input set as far as its admissible share allows.
On return the ledger certifies that every tracked error stayed within its
budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .reach import (ExponentialAccumulator, LinearSystem, ReachSegment,
                    StepSets, build_step_sets, minkowski_sum, propagate_step,
                    propagated_error)
from .taylor import MatrixPowers, convergence_ratio, max_taylor_order
from .zonotope import Zonotope, reduce_order

DEFAULT_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
DEFAULT_SHRINK = 0.9

# Relative dt floor below which the step search gives up; only reachable
# when a budget component is zero but its error source is not.
_DT_UNDERFLOW = 1e-15


class TuningFailedError(RuntimeError):
    """The step search underflowed; some bound cannot be met."""


@dataclass(frozen=True)
class ErrorBudget:
    """Split of the global bound into the three tracked error channels."""

    hom_max: float
    input_max: float
    reduction_max: float

    def __post_init__(self):
        for name in ("hom_max", "input_max", "reduction_max"):
            v = getattr(self, name)
            if not (v >= 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be finite and nonnegative")

    @property
    def total(self) -> float:
        return self.hom_max + self.input_max + self.reduction_max

    @classmethod
    def split(cls, eps_max: float,
              weights: tuple[float, float, float] = DEFAULT_WEIGHTS) -> "ErrorBudget":
        """Divide ``eps_max`` by nonnegative weights summing to one."""
        if not (eps_max > 0 and np.isfinite(eps_max)):
            raise ValueError(f"eps_max must be positive, got {eps_max}")
        w = np.asarray(weights, dtype=float)
        if w.shape != (3,) or np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError(
                f"weights must be three nonnegative values summing to 1, got {weights}")
        return cls(eps_max * w[0], eps_max * w[1], eps_max * w[2])


def split_budget(eps_max: float,
                 weights: tuple[float, float, float] = DEFAULT_WEIGHTS) -> ErrorBudget:
    return ErrorBudget.split(eps_max, weights)


@dataclass(frozen=True)
class StepRecord:
    """Accepted parameters and error values of one step."""

    t_lo: float
    t_hi: float
    dt: float
    taylor_order: int
    zonotope_order: float
    hom_error: float
    input_error: float
    reduction_error: float
    retries: int


@dataclass
class ErrorLedger:
    """Accumulated error totals plus the per-step records backing them."""

    input_acc: float = 0.0
    reduction_acc: float = 0.0
    records: list[StepRecord] = field(default_factory=list)

    def add(self, record: StepRecord) -> None:
        self.records.append(record)
        self.input_acc += record.input_error
        self.reduction_acc += record.reduction_error

    @property
    def max_hom_error(self) -> float:
        return max((r.hom_error for r in self.records), default=0.0)


def admissible_input_error(budget: ErrorBudget, ledger: ErrorLedger,
                           dt: float, t: float, horizon: float) -> float:
    """Per-step share of the remaining input-error budget, linear in dt."""
    if not t < horizon:
        raise ValueError(f"t={t} must be below the horizon {horizon}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (budget.input_max - ledger.input_acc) * dt / (horizon - t)


def admissible_reduction_error(budget: ErrorBudget, ledger: ErrorLedger,
                               dt: float, t: float, horizon: float) -> float:
    """Per-step share of the remaining reduction-error budget."""
    if not t < horizon:
        raise ValueError(f"t={t} must be below the horizon {horizon}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (budget.reduction_max - ledger.reduction_acc) * dt / (horizon - t)


@dataclass(frozen=True)
class TunedStep:
    dt: float
    eta: int
    sets: StepSets
    hom_error: float
    input_error: float
    retries: int


class _Workspace:
    """Per-run caches: matrix powers, step sets and order caps by candidate.

    Set construction time is metered separately from the search around it;
    constructed sets are reused whenever the search revisits a candidate.
    """

    def __init__(self, sys: LinearSystem):
        self.sys = sys
        self.powers = MatrixPowers(sys.a)
        self.build_seconds = 0.0
        self._sets: dict[tuple[float, int], StepSets] = {}
        self._caps: dict[float, int] = {}

    def step_sets(self, dt: float, eta: int) -> StepSets:
        key = (dt, eta)
        sets = self._sets.get(key)
        if sets is None:
            mark = time.perf_counter()
            sets = build_step_sets(self.sys, dt, eta, self.powers)
            self.build_seconds += time.perf_counter() - mark
            self._sets[key] = sets
        return sets

    def order_cap(self, dt: float) -> int:
        cap = self._caps.get(dt)
        if cap is None:
            cap = max_taylor_order(self.powers, dt)
            self._caps[dt] = cap
        return cap


def _try_orders(workspace: _Workspace, acc: ExponentialAccumulator,
                budget: ErrorBudget, ledger: ErrorLedger,
                dt: float, admissible: float) -> tuple[TunedStep | None, int]:
    """Sweep eta upward at fixed dt; return the first passing candidate."""
    retries = 0
    for eta in range(1, workspace.order_cap(dt) + 1):
        retries += 1
        if convergence_ratio(workspace.powers, dt, eta) >= 1.0:
            continue
        sets = workspace.step_sets(dt, eta)
        hom_err = propagated_error(acc, sets.hom_error)
        input_err = propagated_error(acc, sets.inh_error)
        if (hom_err <= budget.hom_max and input_err <= admissible
                and ledger.input_acc + input_err <= budget.input_max):
            return TunedStep(dt, eta, sets, hom_err, input_err, retries), retries
    return None, retries


def tune_step(sys: LinearSystem, acc: ExponentialAccumulator,
              budget: ErrorBudget, ledger: ErrorLedger, t: float,
              dt_prev: float, shrink: float = DEFAULT_SHRINK,
              workspace: _Workspace | None = None) -> TunedStep:
    """Find ``(dt, eta)`` meeting both per-step bounds at time ``t``.

    Starts from the previous step enlarged once by ``1/shrink`` with the
    order reset to 1; raises the order up to its cut-off, then shrinks dt
    geometrically, until both the homogeneous error and the admissible
    input error accept the candidate.
    """
    workspace = workspace if workspace is not None else _Workspace(sys)
    dt = dt_prev / shrink
    retries = 0
    while True:
        admissible = admissible_input_error(budget, ledger, dt, t, sys.horizon)
        step, tried = _try_orders(workspace, acc, budget, ledger, dt, admissible)
        retries += tried
        if step is not None:
            return TunedStep(step.dt, step.eta, step.sets,
                             step.hom_error, step.input_error, retries)
        dt *= shrink
        if dt < sys.horizon * _DT_UNDERFLOW:
            raise TuningFailedError(
                "time step underflow: an error bound cannot be met; "
                "check for zero budget weights on a nonzero error source")


def reduce_accumulated(p_accum: Zonotope, budget: ErrorBudget,
                       ledger: ErrorLedger, dt: float, t: float,
                       horizon: float) -> tuple[Zonotope, float]:
    """Lower the order of the accumulated input set within its budget share.

    Tentatively removes one generator per round (the n+1 lowest-scored
    generators collapse to their box); a round is kept only while the
    cumulative certified error of this step stays strictly below the
    admissible share. Reduction is optional, so a zero budget disables it.
    """
    n = p_accum.dim
    if p_accum.num_generators <= n or budget.reduction_max <= 0:
        return p_accum, 0.0
    admissible = admissible_reduction_error(budget, ledger, dt, t, horizon)
    current = p_accum
    total = 0.0
    while current.num_generators > n:
        target = (current.num_generators - 1) / n
        candidate, err = reduce_order(current, target)
        if (total + err >= admissible
                or ledger.reduction_acc + total + err > budget.reduction_max):
            break
        current = candidate
        total += err
    return current, total


def run(sys: LinearSystem, eps_max: float,
        weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
        shrink: float = DEFAULT_SHRINK) -> "ReachResult":
    """Reachability analysis of ``sys`` with all parameters tuned at runtime.

    Returns segments tiling ``[0, horizon]`` together with the error ledger;
    the ledger totals are guaranteed to respect the budget split of
    ``eps_max``.
    """
    budget = ErrorBudget.split(eps_max, weights)
    if not 0 < shrink < 1:
        raise ValueError(f"shrink factor must be in (0, 1), got {shrink}")
    workspace = _Workspace(sys)
    ledger = ErrorLedger()
    acc = ExponentialAccumulator.identity(sys.dim)
    p_accum = Zonotope.point(np.zeros(sys.dim))
    segments: list[ReachSegment] = []
    horizon = sys.horizon
    t = 0.0
    dt_prev = horizon * shrink
    start = time.perf_counter()
    tuning = 0.0
    while t < horizon:
        mark = time.perf_counter()
        built = workspace.build_seconds
        step = tune_step(sys, acc, budget, ledger, t, dt_prev, shrink, workspace)
        final = t + step.dt >= horizon * (1.0 - 1e-12)
        remaining_after = horizon - t - step.dt
        if not final and 0.0 < remaining_after <= 0.25 * step.dt:
            # absorb a sliver of leftover horizon into this step when the
            # bounds still pass at the enlarged width
            absorbed = _retune_clamped(sys, acc, budget, ledger, t,
                                       workspace, step, required=False)
            if absorbed is not None:
                step = absorbed
                final = True
        elif final and t + step.dt != horizon:
            step = _retune_clamped(sys, acc, budget, ledger, t, workspace, step)
        # set construction fills a reusable cache and counts as propagation
        tuning += (time.perf_counter() - mark
                   - (workspace.build_seconds - built))
        t_hi = horizon if final else t + step.dt
        window, p_next = propagate_step(acc, step.sets, p_accum)
        mark = time.perf_counter()
        p_next, reduction_err = reduce_accumulated(
            p_next, budget, ledger, step.dt, t, horizon)
        tuning += time.perf_counter() - mark
        segments.append(ReachSegment(t, t_hi, minkowski_sum(window, p_accum)))
        ledger.add(StepRecord(
            t_lo=t, t_hi=t_hi, dt=step.dt, taylor_order=step.eta,
            zonotope_order=p_next.order, hom_error=step.hom_error,
            input_error=step.input_error, reduction_error=reduction_err,
            retries=step.retries))
        acc = acc.advanced(step.sets.propagator, step.sets.remainder, step.dt)
        p_accum = p_next
        dt_prev = step.dt
        t = t_hi
    total = time.perf_counter() - start
    return ReachResult(segments=segments, ledger=ledger, budget=budget,
                       tuning_seconds=tuning, total_seconds=total)


def _retune_clamped(sys: LinearSystem, acc: ExponentialAccumulator,
                    budget: ErrorBudget, ledger: ErrorLedger, t: float,
                    workspace: _Workspace, accepted: TunedStep,
                    required: bool = True) -> TunedStep | None:
    """Re-tune the final step at the exact remaining width (order only)."""
    dt = sys.horizon - t
    admissible = admissible_input_error(budget, ledger, dt, t, sys.horizon)
    step, tried = _try_orders(workspace, acc, budget, ledger, dt, admissible)
    if step is None:
        if required:
            raise TuningFailedError(
                f"no Taylor order satisfies the bounds at the clamped final "
                f"step dt={dt:.3g}")
        return None
    return TunedStep(step.dt, step.eta, step.sets, step.hom_error,
                     step.input_error, accepted.retries + tried)


@dataclass(frozen=True)
class ReachResult:
    """Ordered reachable segments plus the certifying ledger and timings."""

    segments: list[ReachSegment]
    ledger: ErrorLedger
    budget: ErrorBudget | None
    tuning_seconds: float
    total_seconds: float

    @property
    def steps(self) -> int:
        return len(self.segments)

    @property
    def dt_min(self) -> float:
        return min(r.dt for r in self.ledger.records)

    @property
    def dt_max(self) -> float:
        return max(r.dt for r in self.ledger.records)

    @property
    def tuning_time_fraction(self) -> float:
        if self.total_seconds <= 0:
            return 0.0
        return min(1.0, self.tuning_seconds / self.total_seconds)

    @property
    def final_set(self) -> Zonotope:
        return self.segments[-1].set
