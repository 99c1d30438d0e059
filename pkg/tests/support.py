"""Shared helpers for the unit and acceptance suites."""

import numpy as np

from tcaacg import _kernels as K
from tcaacg.model import ModelParams
from tcaacg.simulator import DEFAULT_CONFIG

AUDIT_PARAMS = ModelParams(k=100.0, r0=0.1)
# typical phase durations of a stride (s)
AUDIT_SPAN = {K.SS: 0.8, K.PUSH: 0.25, K.LATCH: 0.4, K.DS: 0.12}


def random_phase_state(phase, rng):
    y = np.zeros(6)
    D = 0.0
    if phase == K.DS:
        y[K.R] = rng.uniform(0.0, 0.05)
        y[K.DR] = rng.uniform(0.0, 0.6)
        D = rng.uniform(0.4, 0.8)
        return y, D
    y[K.TS] = rng.uniform(-0.5, 0.5)
    y[K.TN] = rng.uniform(-0.5, 0.5)
    y[K.DTS] = rng.uniform(0.3, 1.5)
    y[K.DTN] = rng.uniform(-1.0, 1.0)
    if phase == K.PUSH:
        y[K.R] = rng.uniform(0.0, 0.1)
        y[K.DR] = rng.uniform(-0.5, 0.5)
    return y, D


def energy_drifts(phase, n, seed=0, params=AUDIT_PARAMS, cfg=DEFAULT_CONFIG):
    """Max |E(t) - E(0)| over ``n`` random single-phase trajectories.

    Each trajectory spans a typical phase duration, so the drift is the
    per-stride contribution of that phase.
    """
    rng = np.random.default_rng(seed)
    P, C = params.to_array(), cfg.to_array()
    buf = np.zeros(20000)
    out = []
    while len(out) < n:
        y0, D = random_phase_state(phase, rng)
        buf[:] = np.nan
        _, m = K.integrate_phase(phase, y0, P, D, C, AUDIT_SPAN[phase], buf)
        e = buf[: min(m, len(buf))]
        if not np.all(np.isfinite(e)):
            continue  # the chain opened; draw again
        out.append(float(np.max(np.abs(e - e[0]))))
    return np.array(out)


# criterion number -> (title, passed, detail); filled by the acceptance suite
ACCEPTANCE = {}


def record(number, title, passed, detail):
    ACCEPTANCE[number] = (title, bool(passed), detail)
    return passed


def acceptance_lines():
    out = []
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        out.append(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
    return out
