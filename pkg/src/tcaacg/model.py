"""Domain types, coordinate conventions, kinematics and energy.

Angles are measured from the upward vertical at the toe that supports the
leg, positive when the hip is forward of that toe. Forward walking therefore
has ``dtheta_s > 0`` and the single-support apex sits at ``theta_s = 0``.
Ground is ``y = 0``.

Spring extension ``r`` runs from 0 (fully compressed) to ``r0`` (rest length),
so a released spring delivers ``k * r0**2 / 2`` per stride.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Union

import numpy as np

from . import _kernels as K


class ChainGeometryError(ValueError):
    """Double-support triangle (l, l + r, D) cannot be closed."""


@dataclass(frozen=True)
class ModelParams:
    """Physical constants and control parameters of the walker.

    ``com_offset`` is the hip-to-leg-CoM distance; ``None`` means ``l / 2``.
    """

    m_b: float = 1.0
    m: float = 0.0
    l: float = 1.0
    k: float = 100.0
    g: float = 9.81
    r0: float = 0.0
    theta_trig: float = 0.0
    com_offset: float | None = None

    def __post_init__(self):
        if self.com_offset is None:
            object.__setattr__(self, "com_offset", 0.5 * self.l)
        if not self.m_b > 0:
            raise ValueError(f"m_b must be positive, got {self.m_b}")
        if not self.l > 0:
            raise ValueError(f"l must be positive, got {self.l}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if not self.g > 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if not 0 <= self.r0 < self.l:
            raise ValueError(f"r0 must lie in [0, l), got {self.r0}")
        if not 0 < self.com_offset < self.l:
            raise ValueError(f"com_offset must lie in (0, l), got {self.com_offset}")
        if not self.m >= 0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        if not math.isfinite(self.theta_trig):
            raise ValueError("theta_trig must be finite")

    @property
    def total_mass(self) -> float:
        return self.m_b + 2.0 * self.m

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_array(self) -> np.ndarray:
        P = np.zeros(K.N_PARAMS)
        P[K.P_MB] = self.m_b
        P[K.P_M] = self.m
        P[K.P_L] = self.l
        P[K.P_K] = self.k
        P[K.P_G] = self.g
        P[K.P_R0] = self.r0
        P[K.P_TRIG] = self.theta_trig
        P[K.P_COM] = self.com_offset
        P[K.P_MODE] = K.MODE_SPRING
        return P

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class SingleSupportState:
    theta_s: float
    theta_n: float
    dtheta_s: float
    dtheta_n: float
    triggered: bool = False
    t: float = 0.0
    x_stance: float = 0.0

    phase = "single_support"

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta_s, self.theta_n, 0.0, self.dtheta_s, self.dtheta_n, 0.0])


@dataclass(frozen=True)
class PushoffState:
    """Single support with the stance spring extending (leg length l + r).

    ``latched`` marks a spring that reached its rest length and locked.
    """

    theta_s: float
    theta_n: float
    dtheta_s: float
    dtheta_n: float
    r: float
    dr: float
    t: float = 0.0
    x_stance: float = 0.0
    latched: bool = False

    phase = "pushoff"

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta_s, self.theta_n, self.r, self.dtheta_s, self.dtheta_n, self.dr])


@dataclass(frozen=True)
class DoubleSupportState:
    """Both toes down; ``D`` is the toe-to-toe distance fixed at impact."""

    r: float
    dr: float
    D: float
    t: float = 0.0
    x_front: float = 0.0

    phase = "double_support"

    def as_vector(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.r, 0.0, 0.0, self.dr])


HybridState = Union[SingleSupportState, PushoffState, DoubleSupportState]


@dataclass(frozen=True)
class LiftoffPoint:
    """Poincare section coordinates ``[dtheta_s, theta_n, dtheta_n]``.

    The stance angle is implied by both toes touching the ground at liftoff.
    """

    dtheta_s: float
    theta_n: float
    dtheta_n: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dtheta_s, self.theta_n, self.dtheta_n])

    @classmethod
    def from_array(cls, q) -> "LiftoffPoint":
        q = np.asarray(q, dtype=float)
        return cls(float(q[0]), float(q[1]), float(q[2]))

    def stance_angle(self, params: ModelParams) -> float:
        """Recover theta_s from ``l cos(theta_s) = (l + r0) cos(theta_n)``."""
        th = K.section_stance_angle(self.theta_n, params.l, params.r0)
        if math.isnan(th):
            raise ValueError(f"theta_n={self.theta_n} admits no grounded stance angle for r0={params.r0}")
        return th

    def to_state(self, params: ModelParams) -> SingleSupportState:
        return SingleSupportState(
            theta_s=self.stance_angle(params),
            theta_n=self.theta_n,
            dtheta_s=self.dtheta_s,
            dtheta_n=self.dtheta_n,
        )


@dataclass(frozen=True)
class StrideTrace:
    """Dense record of one stride.

    ``samples`` rows follow :data:`TRACE_COLUMNS`; ``events`` holds
    ``(t, kind)`` pairs in time order.
    """

    samples: np.ndarray
    phases: tuple[str, ...]
    events: tuple[tuple[float, str], ...]
    step_length: float
    duration: float
    energy_in: float
    energy_lost_collision: float
    energy_lost_latch: float = 0.0
    flags: frozenset = field(default_factory=frozenset)

    def event_kinds(self) -> list[str]:
        return [k for _, k in self.events]

    def event_time(self, kind: str) -> float | None:
        for t, k in self.events:
            if k == kind:
                return t
        return None

    @property
    def energy(self) -> np.ndarray:
        return self.samples[:, TRACE_COLUMNS.index("energy")]


TRACE_COLUMNS = (
    "t",
    "phase",
    "theta_s",
    "theta_n",
    "dtheta_s",
    "dtheta_n",
    "r",
    "dr",
    "hip_x",
    "hip_y",
    "energy",
)


def ds_chain_angles(r: float, D: float, params: ModelParams, rates: bool = False):
    """Front and rear leg angles of the double-support chain.

    The front leg (length ``l``) becomes the next stance leg; the rear leg has
    length ``l + r``. With ``rates=True`` also returns ``d(theta)/dr`` for both.
    """
    th_f, th_r, dth_f, dth_r = K.chain_angles(r, D, params.l)
    if math.isnan(th_f):
        raise ChainGeometryError(f"no closed chain for r={r}, D={D}, l={params.l}")
    if rates:
        return th_f, th_r, dth_f, dth_r
    return th_f, th_r


def hip_position(state: HybridState, params: ModelParams) -> tuple[float, float]:
    l = params.l
    if isinstance(state, DoubleSupportState):
        hx, hy, *_, hy2 = K.chain(state.r, state.D, l)
        if hy2 <= 0:
            raise ChainGeometryError(f"no closed chain for r={state.r}, D={state.D}")
        return state.x_front - state.D + hx, hy
    rho = l
    if isinstance(state, PushoffState):
        rho = l + state.r
    return state.x_stance + rho * math.sin(state.theta_s), rho * math.cos(state.theta_s)


def toe_positions(state: HybridState, params: ModelParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """(stance or rear toe, swing or front toe) positions."""
    hx, hy = hip_position(state, params)
    l = params.l
    if isinstance(state, DoubleSupportState):
        th_f, th_r = ds_chain_angles(state.r, state.D, params)
        rear = (hx - (l + state.r) * math.sin(th_r), hy - (l + state.r) * math.cos(th_r))
        front = (hx - l * math.sin(th_f), hy - l * math.cos(th_f))
        return rear, front
    swing = (hx - l * math.sin(state.theta_n), hy - l * math.cos(state.theta_n))
    return (state.x_stance, 0.0), swing


def _leg_points(state, params):
    """CoM positions and velocities of the two legs (finite-m bookkeeping)."""
    l, c = params.l, params.com_offset
    hx, hy = hip_position(state, params)
    if isinstance(state, DoubleSupportState):
        th_f, th_r, dth_f, dth_r = ds_chain_angles(state.r, state.D, params, rates=True)
        _, _, jx, jy, *_ = K.chain(state.r, state.D, l)
        vx, vy = jx * state.dr, jy * state.dr
        legs = []
        for th, w in ((th_r, dth_r * state.dr), (th_f, dth_f * state.dr)):
            legs.append(
                (hy - c * math.cos(th), vx - c * w * math.cos(th), vy + c * w * math.sin(th))
            )
        return legs
    rho = l + (state.r if isinstance(state, PushoffState) else 0.0)
    drho = state.dr if isinstance(state, PushoffState) else 0.0
    ts, dts = state.theta_s, state.dtheta_s
    vx = drho * math.sin(ts) + rho * dts * math.cos(ts)
    vy = drho * math.cos(ts) - rho * dts * math.sin(ts)
    a = rho - c
    stance = (
        a * math.cos(ts),
        drho * math.sin(ts) + a * dts * math.cos(ts),
        drho * math.cos(ts) - a * dts * math.sin(ts),
    )
    tn, dtn = state.theta_n, state.dtheta_n
    swing = (hy - c * math.cos(tn), vx - c * dtn * math.cos(tn), vy + c * dtn * math.sin(tn))
    return [stance, swing]


def total_energy(state: HybridState, params: ModelParams) -> float:
    """Kinetic + gravitational + engaged-spring energy (J), ground datum.

    A single-support spring held compressed by the trigger is not counted;
    its energy enters the bookkeeping when it is released.
    """
    P = params.to_array()
    if isinstance(state, DoubleSupportState):
        e = K.energy(K.DS, state.as_vector(), P, state.D)
        if math.isnan(e):
            raise ChainGeometryError(f"no closed chain for r={state.r}, D={state.D}")
    elif isinstance(state, PushoffState):
        e = K.energy(K.LATCH if state.latched else K.PUSH, state.as_vector(), P, 0.0)
    else:
        e = K.energy(K.SS, state.as_vector(), P, 0.0)
    if params.m > 0:
        for y, vx, vy in _leg_points(state, params):
            e += params.m * (0.5 * (vx * vx + vy * vy) + params.g * y)
    return float(e)


@dataclass(frozen=True)
class ImpulsiveParams(ModelParams):
    """Rigid-leg compass walker driven by a trailing-leg impulse at each impact.

    ``k``, ``r0`` and ``theta_trig`` are unused; the section constraint is the
    symmetric ``theta_s = -theta_n``.
    """

    impulse: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.r0 != 0:
            raise ValueError("the impulsive walker has no spring precompression")
        if not self.impulse >= 0:
            raise ValueError(f"impulse must be non-negative, got {self.impulse}")

    def to_array(self) -> np.ndarray:
        P = super().to_array()
        P[K.P_IMPULSE] = self.impulse
        P[K.P_MODE] = K.MODE_IMPULSIVE
        return P
