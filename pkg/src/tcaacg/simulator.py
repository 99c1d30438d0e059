"""Stride-by-stride integration of the hybrid walker.

Each stride starts at liftoff, runs single support (with optional pushoff),
double support, and ends at the next liftoff. The compiled core uses an
adaptive Dormand-Prince 5(4) pair; guards are bracketed on accepted steps
and the crossing is then located by re-integrating the bracketing step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .model import (
    TRACE_COLUMNS,
    LiftoffPoint,
    ModelParams,
    StrideTrace,
)

_OUTCOME_FELL = {K.ST_FELL_BACKWARD, K.ST_FELL_FLIGHT, K.ST_FELL_FORWARD}
_TRACE_ROWS = 20000


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.02
    event_time_tol: float = 1e-12
    max_stride_time: float = 5.0
    max_strides: int = 200

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "event_time_tol", "max_stride_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.event_time_tol > self.max_step:
            raise ValueError("event_time_tol must not exceed max_step")
        if self.max_strides < 1:
            raise ValueError("max_strides must be at least 1")

    def to_array(self) -> np.ndarray:
        C = np.zeros(5)
        C[K.C_RTOL] = self.rel_tol
        C[K.C_ATOL] = self.abs_tol
        C[K.C_MAXSTEP] = self.max_step
        C[K.C_EVTOL] = self.event_time_tol
        C[K.C_MAXTIME] = self.max_stride_time
        return C


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class StrideResult:
    """``outcome`` is ``"completed"``, ``"fell"`` or ``"failed"``."""

    outcome: str
    liftoff: LiftoffPoint | None = None
    trace: StrideTrace | None = None
    reason: str = ""
    status: int = K.ST_OK
    info: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.outcome == "completed"


def outcome_of(status: int) -> str:
    if status == K.ST_OK:
        return "completed"
    if status in _OUTCOME_FELL:
        return "fell"
    return "failed"


def _build_trace(rec, nrec, evt, evk, nev, info, params, x0, t0):
    rows = rec[: min(nrec, rec.shape[0])]
    P = params.to_array()
    l = params.l
    out = np.empty((rows.shape[0], len(TRACE_COLUMNS)))
    phases = []
    y = np.zeros(6)
    for i, row in enumerate(rows):
        phase = int(row[1])
        y[:] = (row[2], row[3], row[4], row[5], row[6], row[7])
        D = row[9]
        x_toe = row[8]
        if phase == K.DS:
            hx, hy, jx, jy, *_ = K.chain(y[K.R], D, l)
            hip_x = x_toe - D + hx
            hip_y = hy
        else:
            rho = K.stance_length(phase, y, P)
            hip_x = x_toe + rho * math.sin(y[K.TS])
            hip_y = rho * math.cos(y[K.TS])
        e = K.energy(phase, y, P, D)
        out[i] = (
            t0 + row[0], phase, y[K.TS], y[K.TN], y[K.DTS], y[K.DTN], y[K.R], y[K.DR],
            x0 + hip_x, hip_y, e,
        )
        phases.append(K.PHASE_NAMES[phase])
    events = tuple((t0 + float(evt[i]), K.LOG_NAMES[int(evk[i])]) for i in range(min(nev, len(evt))))
    flags = set()
    if int(info[K.I_FLAGS]) & K.FLAG_CLAMPED:
        flags.add("clamped")
    if int(info[K.I_FLAGS]) & K.FLAG_COMPRESSION:
        flags.add("compression")
    return StrideTrace(
        samples=out,
        phases=tuple(phases),
        events=events,
        step_length=float(info[K.I_STEP]),
        duration=float(info[K.I_DURATION]),
        energy_in=float(info[K.I_EIN]),
        energy_lost_collision=float(info[K.I_ELOSS]),
        energy_lost_latch=float(info[K.I_ELATCH]),
        flags=frozenset(flags),
    )


def step_stride(
    q_l: LiftoffPoint,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    record: bool = True,
    x0: float = 0.0,
    t0: float = 0.0,
) -> StrideResult:
    """Advance one stride from the liftoff point ``q_l``.

    ``x0``/``t0`` place the stance toe and clock of the returned trace.
    """
    rec = np.zeros((_TRACE_ROWS if record else 0, K.REC_COLS))
    evt = np.zeros(K.MAX_EVENTS)
    evk = np.zeros(K.MAX_EVENTS, dtype=np.int64)
    q = np.asarray(q_l.as_array() if isinstance(q_l, LiftoffPoint) else q_l, dtype=float)
    status, qn, info, nrec = K.run_stride(q, params.to_array(), cfg.to_array(), rec, evt, evk)
    nev = int(info[K.I_NEVENTS])
    trace = _build_trace(rec, nrec, evt, evk, nev, info, params, x0, t0) if record else None
    info_d = {
        "duration": float(info[K.I_DURATION]),
        "step_length": float(info[K.I_STEP]),
        "energy_in": float(info[K.I_EIN]),
        "energy_lost_collision": float(info[K.I_ELOSS]),
        "energy_lost_latch": float(info[K.I_ELATCH]),
    }
    outcome = outcome_of(status)
    if outcome != "completed":
        return StrideResult(outcome, None, trace, K.STATUS_REASONS[status], status, info_d)
    return StrideResult(outcome, LiftoffPoint.from_array(qn), trace, "", status, info_d)


def simulate(
    q_l: LiftoffPoint,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    n: int = 1,
    record: bool = True,
) -> list[StrideResult]:
    """Chain up to ``n`` strides, stopping at the first fall or failure."""
    if n < 1:
        raise ValueError("n must be at least 1")
    results = []
    q, x, t = q_l, 0.0, 0.0
    for _ in range(n):
        res = step_stride(q, params, cfg, record=record, x0=x, t0=t)
        results.append(res)
        if not res.completed:
            break
        q = res.liftoff
        x += res.info["step_length"]
        t += res.info["duration"]
    return results


def section_orbit(q, params: ModelParams, cfg: IntegratorConfig, n: int) -> tuple[np.ndarray, int]:
    """Fast rollout: ``(points[n, 3], status)``; rows past a failure are NaN."""
    out = np.full((n, 3), np.nan)
    status, _ = K.run_strides(np.asarray(q, dtype=float), params.to_array(), cfg.to_array(), n, out)
    return out, int(status)


def section_energy(q: LiftoffPoint, params: ModelParams) -> float:
    """Body mechanical energy at a liftoff point."""
    y = np.zeros(6)
    r0 = 0.0 if int(params.to_array()[K.P_MODE]) == K.MODE_IMPULSIVE else params.r0
    y[K.TS] = K.section_stance_angle(q.theta_n, params.l, r0)
    y[K.DTS] = q.dtheta_s
    return float(K.energy(K.SS, y, params.to_array(), 0.0))


def write_trace_csv(traces, path) -> Path:
    """Write one or more stride traces to a CSV (simulator trace schema)."""
    if isinstance(traces, StrideTrace):
        traces = [traces]
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for tr in traces:
            for row, phase in zip(tr.samples, tr.phases):
                vals = [repr(float(v)) for v in row]
                vals[1] = phase
                w.writerow(vals)
    return path
