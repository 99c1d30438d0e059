"""Worked examples: closed-form values and boundary cases."""

import math

import numpy as np
import pytest

import oracles
from tcaacg import events as E
from tcaacg.dynamics import ds_accel, ds_coefficients, pushoff_accel, ss_accel
from tcaacg.metrics import mcot, with_metrics
from tcaacg.model import (
    DoubleSupportState,
    ImpulsiveParams,
    ModelParams,
    PushoffState,
    SingleSupportState,
    ds_chain_angles,
    hip_position,
    total_energy,
)
from tcaacg.poincare import detect_period, find_fixed_point, jacobian, orbit
from tcaacg.simulator import simulate, step_stride
from tcaacg.sweep import SweepSpec, _solve_cell, sweep_row

P = ModelParams()
Q1 = np.array([0.6965142636291756, 0.35625841691436255, 0.5706575746642811])
P1 = ModelParams(k=100.0, r0=0.05, theta_trig=-0.45)
Q2 = np.array([0.8386976825156632, 0.42220996217707063, 0.6279742889884536])
P2 = P1.with_(r0=0.07)


def test_hip_positions():
    assert hip_position(SingleSupportState(0.0, 0.0, 0.0, 0.0), P) == pytest.approx((0.0, 1.0))
    assert hip_position(PushoffState(0.0, 0.0, 0.0, 0.0, 0.1, 0.0), P) == pytest.approx((0.0, 1.1))
    hx, hy = hip_position(DoubleSupportState(0.0, 0.0, 1.0, x_front=1.0), P)
    assert (hx, hy) == pytest.approx((0.5, math.sqrt(3) / 2), abs=1e-15)


def test_equilateral_chain_angles():
    tf, tr = ds_chain_angles(0.0, 1.0, P)
    assert tf == pytest.approx(-math.pi / 6, abs=1e-15)
    assert tr == pytest.approx(math.pi / 6, abs=1e-15)
    _, tf_ref, tr_ref = oracles.two_circle(0.05, 0.6, 1.0)
    tf, tr = ds_chain_angles(0.05, 0.6, P)
    assert abs(tf - tf_ref) < 1e-12 and abs(tr - tr_ref) < 1e-12


def test_energy_values():
    assert total_energy(SingleSupportState(0.0, 0.0, 0.0, 0.0), P) == pytest.approx(9.81)
    p = P.with_(r0=0.1)
    s = PushoffState(0.0, 0.0, 0.0, 0.0, 0.1, 0.0)
    assert total_energy(s, p) == pytest.approx(1.1 * 9.81)


def test_single_support_values():
    assert ss_accel(SingleSupportState(0.0, 0.0, 0.0, 0.0), P)[2] == 0.0
    assert ss_accel(SingleSupportState(0.1, 0.0, 0.0, 0.0), P)[2] == pytest.approx(9.81 * math.sin(0.1))
    assert 9.81 * math.sin(0.1) == pytest.approx(0.9794, abs=1e-4)


def test_pushoff_force_balance():
    p = P.with_(k=98.1, r0=0.1)
    assert pushoff_accel(PushoffState(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), p)[5] == pytest.approx(0.0, abs=1e-14)
    p = P.with_(k=100.0, r0=0.1)
    s = PushoffState(0.3, -0.1, 0.5, 0.0, 0.0, 0.0)
    want = (p.k * p.r0 + p.l * 0.25 - p.g * math.cos(0.3)) / p.m_b
    assert pushoff_accel(s, p)[5] == pytest.approx(want, rel=1e-14)


def test_double_support_static_balance():
    D, r = 0.6, 0.02
    M, B, G = ds_coefficients(DoubleSupportState(r, 0.0, D), P.with_(k=100.0, r0=0.05))
    # pick k so the spring exactly cancels gravity's chain-projected load
    k = (G + 100.0 * (0.05 - r)) / (0.05 - r)
    assert ds_accel(DoubleSupportState(r, 0.0, D), P.with_(k=k, r0=0.05))[1] == pytest.approx(0.0, abs=1e-12)


def test_trigger_examples():
    assert E.trigger_armed(0.2, -0.19)
    assert not E.trigger_armed(0.0, 0.0)
    # a positive trigger angle arms before the apex, once theta_s > -theta_trig
    assert E.trigger_armed(-0.1, 0.15)
    assert not E.trigger_armed(-0.1, 0.05)


@pytest.mark.parametrize(
    "k,r0,dts,ts,Fp,Fi",
    [(100, 0.078, 0.0, 0.0, 7.8, 9.81), (100, 0.0, 0.0, 0.0, 0.0, 9.81), (100, 0.1, 0.5, 0.3, 10.25, 9.371)],
)
def test_pushoff_force_examples(k, r0, dts, ts, Fp, Fi):
    p = P.with_(k=k, r0=r0)
    F_p, F_i = E.pushoff_forces(SingleSupportState(ts, 0.0, dts, 0.0), p)
    assert F_p == pytest.approx(Fp, abs=1e-12)
    assert F_i == pytest.approx(Fi, abs=1e-3)
    assert E.pushoff_starts(SingleSupportState(ts, 0.0, dts, 0.0), p, True) == (Fp > Fi)


def test_guard_examples():
    assert E.collision_guard(SingleSupportState(0.3, -0.3, 1.0, 0.0), P) == pytest.approx(0.0, abs=1e-15)
    # vertical swing leg: the toe sits l (1 - cos theta_s) below ground
    assert E.collision_guard(SingleSupportState(0.3, 0.0, 1.0, 0.0), P) == pytest.approx(-(1 - math.cos(0.3)))
    assert E.collision_guard(SingleSupportState(0.0, 0.0, 1.0, 0.0), P) == 0.0


def test_one_collision_and_liftoff_per_stride():
    for r in simulate(Q1, P1, n=5):
        kinds = r.trace.event_kinds()
        assert kinds.count("collision") == 1 and kinds.count("liftoff") == 1
        assert r.info["step_length"] > 0


def test_spring_rate_examples():
    p = P.with_(r0=0.05)
    s = SingleSupportState(1e-9, -1e-9, 1.0, 0.0)
    assert E.collision_map_post(s, p).post_state.dr == pytest.approx(0.0, abs=1e-8)
    # legs pi/4 apart, unit stance rate
    s = SingleSupportState(math.pi / 8, -math.pi / 8, 1.0, 0.0)
    assert E.collision_map_post(s, p).post_state.dr == pytest.approx(0.5, abs=1e-15)


def test_latched_impact_lifts_off_at_once():
    p = P.with_(k=100.0, r0=0.05)
    s = PushoffState(0.3, -0.25, 1.0, 0.2, p.r0, 0.0, latched=True)
    post = E.collision_map_pre(s, p).post_state
    assert post.r == p.r0 and post.dr > 0
    q, ss = E.liftoff_map(post, p)
    assert q.stance_angle(p) == pytest.approx(ss.theta_s, abs=1e-12)


def test_passive_limit_lifts_off_at_the_collision():
    r = step_stride(Q1, P1.with_(r0=0.0))
    if r.trace.event_time("collision") is not None and r.completed:
        assert r.trace.event_time("liftoff") == r.trace.event_time("collision")
    res = simulate(Q1, P1.with_(r0=0.0), n=50, record=False)
    assert res[-1].outcome == "fell"


def test_zero_impulse_is_a_plain_impact():
    s = SingleSupportState(0.3, -0.25, 1.1, 0.2)
    post = E.impulsive_pushoff_map(s, 0.0, P)
    assert E.impulsive_energy(s, 0.0, P)[0] == 0.0
    v = P.l * s.dtheta_s * np.array([math.cos(s.theta_s), -math.sin(s.theta_s)])
    v_plus, _, _ = oracles.impact(v, s.theta_n, s.theta_s, P.m_b)
    w = np.array([math.cos(post.theta_s), -math.sin(post.theta_s)])
    assert post.dtheta_s == pytest.approx(float(v_plus @ w), rel=1e-13)


def test_one_stride_simulation_is_step_stride():
    a = simulate(Q1, P1, n=1)[0]
    b = step_stride(Q1, P1)
    assert np.array_equal(a.liftoff.as_array(), b.liftoff.as_array())
    assert np.allclose(b.liftoff.as_array(), Q1, atol=1e-8)


def test_exact_seed_needs_at_most_one_iteration():
    assert find_fixed_point(Q1, 1, P1).iterations <= 1


def test_period_doubled_parameters():
    one = find_fixed_point(Q2, 1, P2)
    two = find_fixed_point(Q2, 2, P2)
    assert one.lambda_max > 1 and two.lambda_max < 1
    q = two.q_star.as_array()
    assert np.allclose(orbit(q, 2, P2)[-1], q, atol=1e-9)
    assert not np.allclose(orbit(q, 1, P2)[-1], q, atol=1e-4)


def test_lambda_is_step_converged():
    lam = lambda h: float(np.max(np.abs(np.linalg.eigvals(jacobian(Q1, 1, P1, h=h)))))
    assert abs(lam(1e-6) - lam(5e-7)) < 1e-4


def test_eigenvalues_predict_convergence_from_larger_kicks():
    rng = np.random.default_rng(1)
    for _ in range(3):
        d = rng.normal(size=3)
        pts = orbit(Q1 + 1e-3 * d / np.linalg.norm(d), 300, P1)
        assert np.linalg.norm(pts[-1] - Q1) < 1e-8


def test_detect_period_ignores_window_start():
    pts = orbit(Q2 + 1e-4, 5, P2)
    assert {detect_period(pts[i], P2) for i in range(3)} == {2}


def test_mcot_examples():
    p = ModelParams(k=100.0, r0=0.1)
    assert mcot(p, 0.5) == pytest.approx(0.10194, abs=1e-5)
    assert mcot(p.with_(r0=0.0), 0.5) == 0.0


@pytest.mark.parametrize("r0,theta_trig,label", [(0.05, -0.5, "R1"), (0.05, -0.2, "R2")])
def test_region_examples(r0, theta_trig, label):
    spec = SweepSpec()
    p = spec.params(r0, theta_trig, 100.0)
    status, rec = _solve_cell(spec, p, [])
    assert status == "stable"
    assert with_metrics(rec, p).region == label


def test_high_precompression_extends_in_single_support():
    # reached by continuation in r0; the row's stable range ends at 0.11
    spec = SweepSpec(r0_range=(0.0, 0.11, 56), k_values=(100.0,))
    last = sweep_row(spec, -0.25, 100.0)[-1]
    assert last.status == "stable" and last.record.region == "R3"


def test_impulsive_params_round_trip():
    p = ImpulsiveParams(impulse=0.4)
    assert p.to_array()[-1] == 1 and p.r0 == 0.0
