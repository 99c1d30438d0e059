"""Parameter sweeps over (r0, theta_trig, k) and the impulsive baseline."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .metrics import with_metrics
from .model import ImpulsiveParams, ModelParams
from .poincare import (
    PERIOD_LADDER,
    FallBeforeReturn,
    FixedPointRecord,
    boa_scan,
    orbit,
    solve_ladder,
)
from .simulator import DEFAULT_CONFIG, IntegratorConfig

log = logging.getLogger(__name__)

# liftoff points along the slow-to-fast gait branch; they seed cells that
# have no converged neighbour
CANNED_GUESSES = (
    (0.7, 0.35, 0.55),
    (0.36, 0.19, 0.34),
    (0.53, 0.28, 0.47),
    (0.89, 0.45, 0.64),
    (1.15, 0.52, 0.72),
    (1.38, 0.58, 0.74),
)
CANNED_GUESS = CANNED_GUESSES[0]

STATUSES = ("stable", "unstable", "aperiodic", "no_gait")


def _check_range(name, rng):
    lo, hi, n = rng
    if int(n) != n or n < 1:
        raise ValueError(f"{name}: count must be a positive integer")
    if lo > hi:
        raise ValueError(f"{name}: min exceeds max")
    if n == 1 and lo != hi:
        raise ValueError(f"{name}: a single point needs min == max")


def grid(rng) -> np.ndarray:
    lo, hi, n = rng
    return np.linspace(lo, hi, int(n))


@dataclass(frozen=True)
class SweepSpec:
    r0_range: tuple[float, float, int] = (0.0, 0.15, 76)
    theta_trig_range: tuple[float, float, int] = (-0.6, 0.1, 71)
    k_values: tuple[float, ...] = (100.0, 300.0)
    periods: tuple[int, ...] = PERIOD_LADDER
    integrator: IntegratorConfig = DEFAULT_CONFIG
    boa_enabled: bool = False
    base: ModelParams = field(default_factory=ModelParams)
    guesses: tuple[tuple[float, float, float], ...] = CANNED_GUESSES

    def __post_init__(self):
        _check_range("r0_range", self.r0_range)
        _check_range("theta_trig_range", self.theta_trig_range)
        if not self.k_values:
            raise ValueError("k_values must not be empty")
        if not self.periods or any(int(j) != j or j < 1 for j in self.periods):
            raise ValueError("periods must be positive integers")

    def params(self, r0, theta_trig, k) -> ModelParams:
        return self.base.with_(r0=float(r0), theta_trig=float(theta_trig), k=float(k))


@dataclass(frozen=True)
class SweepCell:
    r0: float
    theta_trig: float
    k: float
    status: str
    record: FixedPointRecord | None = None


def _solve_cell(spec, params, neighbours):
    """First stable record from any seed, else the first unstable one.

    Canned seeds whose rollout falls only get a period-1 Newton attempt.
    """
    fallback = None
    survived = False
    tried = []
    seeds = [(q, False) for q in neighbours if q is not None]
    seeds += [(np.asarray(q, dtype=float), True) for q in spec.guesses]
    for seed, canned in seeds:
        if any(np.allclose(seed, s, rtol=0, atol=1e-9) for s in tried):
            continue
        tried.append(seed)
        rec, found = solve_ladder(
            seed, params, spec.integrator, spec.periods, unsettled_periods=spec.periods[:1] if canned else None
        )
        if rec is not None:
            return "stable", rec
        if found and fallback is None:
            fallback = found[0]
        if not survived:
            try:
                orbit(seed, 64, params, spec.integrator)
                survived = True
            except FallBeforeReturn:
                pass
    if fallback is not None:
        return "unstable", fallback
    return ("aperiodic" if survived else "no_gait"), None


def _finish(spec, params, rec):
    try:
        rec = with_metrics(rec, params, spec.integrator)
    except (RuntimeError, ValueError) as exc:
        log.warning("metrics failed at %s: %s", rec.p, exc)
        return rec
    if spec.boa_enabled and rec.stable:
        boa = tuple(boa_scan(rec, i, params, spec.integrator) for i in range(3))
        rec = rec.with_(boa=boa)
    return rec


def _safe_solve(spec, params, neighbours):
    try:
        return _solve_cell(spec, params, neighbours)
    except Exception as exc:  # a broken cell must not abort the sweep
        log.warning("cell r0=%g theta_trig=%g k=%g failed: %s", params.r0, params.theta_trig, params.k, exc)
        return "no_gait", None


def _q(cell):
    status, rec = cell
    return rec.q_star.as_array() if status == "stable" else None


def continue_row(spec: SweepSpec, theta_trig: float, k: float, cells=None, hints=None):
    """r0-continuation along one row.

    An ascending pass seeds each cell from the last stable cell, a
    descending pass revisits cells without a stable gait. ``cells`` carries
    earlier results; ``hints[i]`` lists extra seeds for cell ``i``.
    Returns a list of ``(status, record)``.
    """
    r0s = grid(spec.r0_range)
    n = len(r0s)
    cells = list(cells) if cells is not None else [None] * n
    hints = hints or [[] for _ in range(n)]

    def visit(i, neighbour):
        if cells[i] is not None and cells[i][0] == "stable":
            return
        seeds = [neighbour] + list(hints[i])
        if cells[i] is not None and all(s is None for s in seeds):
            return
        res = _safe_solve(spec, spec.params(r0s[i], theta_trig, k), seeds)
        if cells[i] is None or res[0] == "stable" or (cells[i][1] is None and res[1] is not None):
            cells[i] = res

    last = None
    for i in range(n):
        visit(i, last)
        last = _q(cells[i]) if _q(cells[i]) is not None else last
    nxt = None
    for i in reversed(range(n)):
        if _q(cells[i]) is not None:
            nxt = _q(cells[i])
            continue
        if nxt is not None:
            visit(i, nxt)
            nxt = _q(cells[i]) if _q(cells[i]) is not None else nxt
    return cells


def _row_task(args):
    spec, theta_trig, k, cells, hints = args
    return continue_row(spec, theta_trig, k, cells, hints)


def _finish_task(args):
    spec, theta_trig, k, cells = args
    out = []
    for r0, (status, rec) in zip(grid(spec.r0_range), cells):
        if rec is not None:
            rec = _finish(spec, spec.params(r0, theta_trig, k), rec)
        out.append(SweepCell(float(r0), float(theta_trig), float(k), status, rec))
    return out


def _map(fn, tasks, jobs):
    if jobs == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs if jobs > 0 else None) as ex:
        return list(ex.map(fn, tasks))


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepCell]:
    """All cells, ordered by k, then theta_trig, then r0.

    Rows are first continued independently; a second pass re-seeds cells
    without a stable gait from the stable cells of the adjacent rows of the
    first pass. Neither pass depends on execution order, so the result does
    not depend on ``jobs``.
    """
    ths = grid(spec.theta_trig_range)
    keys = [(float(k), float(th)) for k in spec.k_values for th in ths]
    first = _map(_row_task, [(spec, th, k, None, None) for k, th in keys], jobs)
    second_tasks = []
    for idx, (k, th) in enumerate(keys):
        row = first[idx]
        hints = [[] for _ in row]
        for adj in (idx - 1, idx + 1):
            if 0 <= adj < len(keys) and keys[adj][0] == k:
                for i, cell in enumerate(first[adj]):
                    if _q(cell) is not None and _q(row[i]) is None:
                        hints[i].append(_q(cell))
        second_tasks.append((spec, th, k, row, hints))
    second = _map(_row_task, second_tasks, jobs)
    rows = _map(_finish_task, [(spec, th, k, cells) for (k, th), cells in zip(keys, second)], jobs)
    return [c for row in rows for c in row]


def sweep_row(spec: SweepSpec, theta_trig: float, k: float) -> list[SweepCell]:
    """One row on its own (no cross-row seeding)."""
    return _finish_task((spec, theta_trig, k, continue_row(spec, theta_trig, k)))


# ---------------------------------------------------------------- baseline


@dataclass(frozen=True)
class BaselinePoint:
    impulse: float
    speed: float
    mcot: float
    lambda_max: float
    record: FixedPointRecord


# liftoff points of impulsive-walker gaits (slow to fast)
BASELINE_GUESSES = (
    (0.61, 0.16, 0.54),
    (0.86, 0.23, 0.68),
    (1.2, 0.33, 0.6),
    (1.66, 0.45, 0.41),
)


def baseline_frontier(
    impulse_range,
    params: ModelParams | None = None,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    guesses=BASELINE_GUESSES,
    periods=PERIOD_LADDER,
) -> list[BaselinePoint]:
    """Stable fixed points of the impulsive walker, continued in impulse.

    ``impulse_range`` is ``(min, max, count)`` or an explicit sequence.
    Points come back in impulse order.
    """
    if isinstance(impulse_range, tuple) and len(impulse_range) == 3 and float(impulse_range[2]).is_integer():
        _check_range("impulse_range", impulse_range)
        impulses = grid(impulse_range)
    else:
        impulses = np.asarray(impulse_range, dtype=float)
    base = params if params is not None else ModelParams()

    def make(J):
        return ImpulsiveParams(
            m_b=base.m_b, m=base.m, l=base.l, k=base.k, g=base.g,
            com_offset=base.com_offset, impulse=float(J),
        )

    def solve(J, neighbour):
        p = make(J)
        seeds = [(neighbour, False)] if neighbour is not None else []
        seeds += [(np.asarray(g, dtype=float), True) for g in guesses]
        for seed, canned in seeds:
            rec, _ = solve_ladder(seed, p, cfg, periods, unsettled_periods=periods[:1] if canned else None)
            if rec is not None:
                return rec
        return None

    recs = [None] * len(impulses)
    last = None
    for i, J in enumerate(impulses):
        recs[i] = solve(J, last)
        if recs[i] is not None:
            last = recs[i].q_star.as_array()
    nxt = None
    for i in reversed(range(len(impulses))):
        if recs[i] is not None:
            nxt = recs[i].q_star.as_array()
        elif nxt is not None:
            recs[i] = solve(impulses[i], nxt)
            if recs[i] is not None:
                nxt = recs[i].q_star.as_array()

    out = []
    for J, rec in zip(impulses, recs):
        if rec is None:
            continue
        rec = with_metrics(rec, make(J), cfg)
        out.append(BaselinePoint(float(J), rec.speed, rec.mcot, rec.lambda_max, rec))
    return out
