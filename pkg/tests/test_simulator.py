import csv

import numpy as np
import pytest

import support
from tcaacg import _kernels as K
from tcaacg.model import TRACE_COLUMNS, LiftoffPoint, ModelParams
from tcaacg.simulator import (
    IntegratorConfig,
    section_energy,
    section_orbit,
    simulate,
    step_stride,
    write_trace_csv,
)

P = ModelParams(k=100.0, r0=0.05, theta_trig=-0.45)
Q = LiftoffPoint(0.6965142636291756, 0.35625841691436255, 0.5706575746642811)

# legal successors in a stride's event log
LEGAL = {
    None: {"trigger_armed", "pushoff_start", "collision", "fall"},
    "trigger_armed": {"pushoff_start", "collision", "fall"},
    "pushoff_start": {"spring_latched", "collision", "fall"},
    "spring_latched": {"collision", "fall"},
    "collision": {"pushoff_start", "liftoff", "fall"},
    "liftoff": set(),
    "fall": set(),
}


@pytest.mark.parametrize("phase", [K.SS, K.PUSH, K.LATCH, K.DS])
def test_phase_energy_is_conserved(phase):
    assert support.energy_drifts(phase, 20, seed=phase).max() < 1e-8


def test_stride_energy_bookkeeping():
    res = simulate(Q, P, n=5)
    assert all(r.completed for r in res)
    for prev, r in zip([Q] + [x.liftoff for x in res], res):
        i = r.info
        gained = i["energy_in"] - i["energy_lost_collision"] - i["energy_lost_latch"]
        assert section_energy(r.liftoff, P) - section_energy(prev, P) == pytest.approx(gained, abs=1e-8)


def test_fixed_point_repeats():
    r = step_stride(Q, P)
    assert r.completed
    assert np.allclose(r.liftoff.as_array(), Q.as_array(), atol=1e-9)


def test_runs_are_deterministic():
    a = step_stride(Q, P)
    b = step_stride(Q, P)
    assert np.array_equal(a.trace.samples, b.trace.samples)
    assert a.trace.events == b.trace.events


def test_event_order_is_legal():
    for params in (P, P.with_(r0=0.12, theta_trig=-0.2), P.with_(r0=0.02, theta_trig=0.05)):
        for r in simulate(Q, params, n=3):
            prev = None
            collided = False
            for _, kind in r.trace.events:
                # a release at the collision is logged right after it
                ok = kind in LEGAL[prev] or (collided and prev == "pushoff_start" and kind in ("liftoff", "fall"))
                assert ok, (prev, kind)
                assert not (collided and kind == "collision")
                collided |= kind == "collision"
                prev = kind
            if r.completed:
                assert prev == "liftoff"


def test_trace_phases_follow_the_stride():
    tr = step_stride(Q, P).trace
    seen = [p for i, p in enumerate(tr.phases) if i == 0 or p != tr.phases[i - 1]]
    assert seen[0] == "single_support" and seen[-1] == "double_support"
    assert set(seen) <= {"single_support", "pushoff", "double_support"}
    assert np.all(np.diff(tr.samples[:, 0]) >= 0)


def test_events_are_located_on_the_guards():
    tr = step_stride(Q, P).trace
    t_coll = tr.event_time("collision")
    rows = tr.samples[np.isclose(tr.samples[:, 0], t_coll, atol=0, rtol=0)]
    assert len(rows) >= 1
    c = TRACE_COLUMNS.index
    # both toes on the ground at the collision sample
    ts, tn = rows[0, c("theta_s")], rows[0, c("theta_n")]
    assert np.cos(ts) - np.cos(tn) == pytest.approx(0.0, abs=1e-10)
    last = tr.samples[-1]
    assert last[c("r")] == pytest.approx(P.r0, abs=1e-10)


def test_tighter_tolerance_converges():
    loose = step_stride(Q, P, IntegratorConfig(rel_tol=1e-7, abs_tol=1e-9)).liftoff.as_array()
    tight = step_stride(Q, P, IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)).liftoff.as_array()
    ref = step_stride(Q, P).liftoff.as_array()
    assert np.max(np.abs(ref - tight)) < 1e-8
    assert np.max(np.abs(loose - tight)) > np.max(np.abs(ref - tight))


def test_passive_walker_on_level_ground_falls():
    res = simulate(Q, P.with_(r0=0.0), n=200, record=False)
    assert res[-1].outcome == "fell"
    assert res[-1].reason


def test_unreachable_section_point_fails():
    r = step_stride(LiftoffPoint(0.7, 0.05, 0.5), P.with_(r0=0.1))
    assert r.outcome == "failed" and r.liftoff is None


def test_fast_rollout_matches_simulate():
    pts, status = section_orbit(Q.as_array(), P, IntegratorConfig(), 3)
    assert status == K.ST_OK
    res = simulate(Q, P, n=3, record=False)
    assert np.array_equal(pts, np.array([r.liftoff.as_array() for r in res]))


def test_trace_csv(tmp_path):
    res = simulate(Q, P, n=2)
    path = write_trace_csv([r.trace for r in res], tmp_path / "t.csv")
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert len(rows) - 1 == sum(len(r.trace.samples) for r in res)
    # global clock and toe placement carry over between strides
    t = np.array([float(r[0]) for r in rows[1:]])
    assert np.all(np.diff(t) >= 0)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(event_time_tol=1.0)
    with pytest.raises(ValueError):
        simulate(Q, P, n=0)
