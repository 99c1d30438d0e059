"""Gait metrics and region labels computed from stride traces."""

from __future__ import annotations

import numpy as np

from .model import ModelParams, StrideTrace
from .poincare import FixedPointRecord
from .simulator import DEFAULT_CONFIG, IntegratorConfig, simulate

REGIONS = ("R1", "R2", "R3")


def speed(step_lengths, durations) -> float:
    """Average forward speed of a cycle: total distance over total time."""
    d = np.atleast_1d(np.asarray(step_lengths, dtype=float))
    t = np.atleast_1d(np.asarray(durations, dtype=float))
    if d.shape != t.shape or d.size == 0:
        raise ValueError("need matching, non-empty step lengths and durations")
    if np.any(t <= 0):
        raise ValueError("stride durations must be positive")
    return float(d.sum() / t.sum())


def mcot(params: ModelParams, step_lengths, energy_in=None) -> float:
    """Mechanical cost of transport averaged over the cycle's strides.

    The per-stride input is ``k r0^2 / 2`` unless ``energy_in`` gives it
    explicitly (the impulsive walker).
    """
    d = np.atleast_1d(np.asarray(step_lengths, dtype=float))
    if d.size == 0 or np.any(d <= 0):
        raise ValueError("step lengths must be positive")
    if energy_in is None:
        e = np.full(d.shape, 0.5 * params.k * params.r0**2)
    else:
        e = np.broadcast_to(np.asarray(energy_in, dtype=float), d.shape)
    return float(np.mean(e / (params.total_mass * params.g * d)))


def classify_region(trace: StrideTrace) -> str:
    """R1: never armed before the collision; R2: armed but not extended
    before it; R3: extension started in single support."""
    t_coll = trace.event_time("collision")
    if t_coll is None:
        raise ValueError("region needs a stride with a collision")
    armed = pushed = False
    for t, kind in trace.events:
        if kind == "collision":
            break
        armed |= kind == "trigger_armed"
        pushed |= kind == "pushoff_start"
    if pushed:
        return "R3"
    return "R2" if armed else "R1"


def cycle_region(traces) -> str:
    """Strongest label over the strides of a cycle."""
    return max((classify_region(t) for t in traces), key=REGIONS.index)


def cycle_strides(record: FixedPointRecord, params: ModelParams, cfg: IntegratorConfig = DEFAULT_CONFIG):
    """Re-run the ``j`` strides of a record with traces on."""
    res = simulate(record.q_star, params, cfg, n=record.period_j, record=True)
    if len(res) != record.period_j or not res[-1].completed:
        raise RuntimeError("fixed point no longer completes its cycle")
    return res


def with_metrics(record: FixedPointRecord, params: ModelParams, cfg: IntegratorConfig = DEFAULT_CONFIG) -> FixedPointRecord:
    """Fill speed, mCoT and region of a record."""
    res = cycle_strides(record, params, cfg)
    d = [r.info["step_length"] for r in res]
    t = [r.info["duration"] for r in res]
    impulsive = hasattr(params, "impulse")
    e = [r.info["energy_in"] for r in res] if impulsive else None
    region = None if impulsive else cycle_region([r.trace for r in res])
    extra = dict(record.extra, step_lengths=tuple(d), durations=tuple(t))
    return record.with_(speed=speed(d, t), mcot=mcot(params, d, e), region=region, extra=extra)
