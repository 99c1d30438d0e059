"""Guards and jump maps of the hybrid walker.

Impact model: the swing toe strikes inelastically, the massless front leg
carries the only impulse, and the rear leg behaves as a free prismatic joint
(its spring force is finite). The hip therefore keeps just its velocity
component normal to the front leg, and the rear spring rate after impact is
that velocity projected on the rear leg. For a rigid stance leg this gives
``dr+ = (l/2) |dtheta_s-| sin(2 alpha)`` with ``alpha = theta_s - theta_n``
the angle between the legs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels as K
from .model import (
    DoubleSupportState,
    LiftoffPoint,
    ModelParams,
    PushoffState,
    SingleSupportState,
    ds_chain_angles,
)


class FailedStride(RuntimeError):
    """A transition that cannot complete the stride."""


@dataclass(frozen=True)
class EventOutcome:
    kind: str
    post_state: object
    energy_delta: float = 0.0
    flags: frozenset = frozenset()


def trigger_armed(theta_s: float, theta_trig: float) -> bool:
    """Spring trigger condition ``-theta_s < theta_trig``."""
    return -theta_s < theta_trig


def pushoff_forces(state: SingleSupportState, params: ModelParams) -> tuple[float, float]:
    """Propulsive and impeding forces ``(F_p, F_i)`` along the stance leg."""
    F_p = params.k * params.r0 + params.m_b * params.l * state.dtheta_s**2
    F_i = params.m_b * params.g * math.cos(state.theta_s)
    return F_p, F_i


def pushoff_starts(state: SingleSupportState, params: ModelParams, armed: bool) -> bool:
    F_p, F_i = pushoff_forces(state, params)
    return armed and F_p > F_i


def _phase_of(state):
    if isinstance(state, PushoffState):
        return K.LATCH if state.latched else K.PUSH
    return K.SS


def collision_guard(state: SingleSupportState | PushoffState, params: ModelParams) -> float:
    """Signed swing-toe height."""
    return float(K.swing_toe_height(_phase_of(state), state.as_vector(), params.to_array()))


def is_heelstrike(state) -> bool:
    """Touchdown counts as a collision only with the hip strictly between the
    toes and moving forward; touchdowns near the leg crossing are scuffs."""
    return bool(K.is_heelstrike(state.as_vector()))


def inter_leg_angle(state: SingleSupportState | PushoffState) -> float:
    return state.theta_s - state.theta_n


def _to_ds(state, rho, drho, params, clamp, kind):
    dr, D, dke, fl = K.collision_to_ds(
        rho, drho, state.theta_s, state.theta_n, state.dtheta_s, params.l, params.m_b, clamp
    )
    r = state.r if isinstance(state, PushoffState) else 0.0
    flags = set()
    if fl & K.FLAG_CLAMPED:
        flags.add("clamped")
    if fl & K.FLAG_COMPRESSION:
        flags.add("compression")
    post = DoubleSupportState(r=r, dr=dr, D=D, t=state.t, x_front=state.x_stance + D)
    return EventOutcome(kind, post, float(dke), frozenset(flags))


def collision_map_post(state: SingleSupportState, params: ModelParams) -> EventOutcome:
    """Impact with the spring released at the collision (``r- = dr- = 0``).

    A negative spring rate (legs spread beyond a right angle) is clamped to
    zero and flagged ``"clamped"``.
    """
    return _to_ds(state, params.l, 0.0, params, True, "collision_post")


def collision_map_pre(state: PushoffState, params: ModelParams) -> EventOutcome:
    """Impact during single-support pushoff; ``r-`` and ``dr-`` carry over.

    A negative post-impact rate with the spring short of ``r0`` is flagged
    ``"compression"``.
    """
    if state.latched:
        rho, drho = params.l + params.r0, 0.0
        state = PushoffState(
            state.theta_s, state.theta_n, state.dtheta_s, state.dtheta_n,
            params.r0, 0.0, state.t, state.x_stance, True,
        )
    else:
        rho, drho = params.l + state.r, state.dr
    return _to_ds(state, rho, drho, params, False, "collision_pre")


def liftoff_map(state: DoubleSupportState, params: ModelParams, tol: float = 1e-12):
    """Rear toe release at ``r = r0``; the front leg becomes the stance leg.

    The trailing leg's spring is recompressed while it swings, so the new
    stance starts compressed. Returns ``(LiftoffPoint, SingleSupportState)``.
    """
    if abs(state.r - params.r0) > tol:
        raise FailedStride(f"liftoff needs r = r0, got r = {state.r}")
    if state.dr < 0:
        raise FailedStride("spring recompressing at rest length: no liftoff")
    th_f, th_r, dth_f, dth_r = ds_chain_angles(params.r0, state.D, params, rates=True)
    q = LiftoffPoint(dth_f * state.dr, th_r, dth_r * state.dr)
    ss = SingleSupportState(
        theta_s=th_f, theta_n=th_r, dtheta_s=q.dtheta_s, dtheta_n=q.dtheta_n,
        t=state.t, x_stance=state.x_front,
    )
    return q, ss


def impulsive_pushoff_map(state: SingleSupportState, impulse_magnitude: float, params: ModelParams) -> SingleSupportState:
    """Trailing-leg impulse just before a rigid compass impact.

    The swing leg's point mass keeps its momentum normal to the leg, which
    fixes the new swing rate.
    """
    ts, tn, dts, dtn, _, _, D, release = K.impulsive_impact(
        state.theta_s, state.theta_n, state.dtheta_s, state.dtheta_n,
        impulse_magnitude, params.l, params.m_b, params.com_offset,
    )
    if release <= 0:
        raise FailedStride("rear toe pushed into the ground after impact")
    return SingleSupportState(ts, tn, dts, dtn, t=state.t, x_stance=state.x_stance + D)


def impulsive_energy(state: SingleSupportState, impulse_magnitude: float, params: ModelParams) -> tuple[float, float]:
    """``(energy injected by the impulse, energy lost in the impact)``."""
    out = K.impulsive_impact(
        state.theta_s, state.theta_n, state.dtheta_s, state.dtheta_n,
        impulse_magnitude, params.l, params.m_b, params.com_offset,
    )
    return float(out[4]), float(out[5])

