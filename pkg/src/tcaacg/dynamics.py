"""Smooth vector fields of the three phases.

Default runtime dynamics use the vanishing-leg-mass limit. Writing
``u(th) = (sin th, cos th)`` and ``f`` for the stance-leg force per unit body
mass, the hip satisfies ``H'' + g e_y = f u(theta_s)`` in every single-support
mode:

* single support: ``theta_s'' = (g/l) sin theta_s`` and
  ``f = g cos theta_s - l theta_s'^2``;
* pushoff (leg length ``rho = l + r``): ``r'' = k(r0 - r)/m_b - g cos theta_s
  + rho theta_s'^2`` and ``rho theta_s'' + 2 r' theta_s' = g sin theta_s``,
  with ``f = k (r0 - r) / m_b``.

A leg point mass ``m`` at ``com_offset = c`` below the hip obeys
``m c theta_n'' = m (H'' + g e_y) . (cos theta_n, -sin theta_n)``; ``m``
cancels, leaving ``theta_n'' = f sin(theta_s - theta_n) / c``.

Double support has one coordinate ``r``. With the hip ``H(r)`` on the closed
chain, ``L = m_b |H'(r)|^2 r'^2 / 2 - m_b g H_y(r) - k (r0 - r)^2 / 2`` gives
``M r'' + B r' + G = 0`` with ``M = m_b |H'|^2``, ``B = m_b (H'.H'') r'``,
``G = m_b g H'_y - k (r0 - r)``.

``finite_mass_*`` assemble the full point-mass equations
``M(q) q'' + B(q, q') q' + G(q) = 0`` with legs of mass ``m``; they exist to
cross-check the limit above.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels as K
from .model import (
    ChainGeometryError,
    DoubleSupportState,
    ModelParams,
    PushoffState,
    SingleSupportState,
)

PhaseDerivative = np.ndarray

_SS_SLOTS = [K.TS, K.TN, K.DTS, K.DTN]
_PUSH_SLOTS = [K.TS, K.TN, K.R, K.DTS, K.DTN, K.DR]
_DS_SLOTS = [K.R, K.DR]


def _rhs(phase, vec, params, D=0.0):
    out = np.zeros(6)
    K.rhs(phase, vec, params.to_array(), D, out)
    return out


def ss_accel(state: SingleSupportState, params: ModelParams, finite_mass: bool = False) -> PhaseDerivative:
    """Time derivative of ``[theta_s, theta_n, dtheta_s, dtheta_n]``."""
    if finite_mass:
        q = np.array([state.theta_s, state.theta_n])
        dq = np.array([state.dtheta_s, state.dtheta_n])
        M, Bq, G = finite_mass_ss(q, dq, params)
        ddq = np.linalg.solve(M, -(Bq + G))
        return np.concatenate([dq, ddq])
    return _rhs(K.SS, state.as_vector(), params)[_SS_SLOTS]


def pushoff_accel(state: PushoffState, params: ModelParams, finite_mass: bool = False) -> PhaseDerivative:
    """Time derivative of ``[theta_s, theta_n, r, dtheta_s, dtheta_n, dr]``.

    A latched spring (``state.latched``) freezes ``r`` at ``r0``.
    """
    if finite_mass:
        q = np.array([state.theta_s, state.theta_n, state.r])
        dq = np.array([state.dtheta_s, state.dtheta_n, state.dr])
        M, Bq, G = finite_mass_pushoff(q, dq, params)
        ddq = np.linalg.solve(M, -(Bq + G))
        return np.concatenate([dq, ddq])
    phase = K.LATCH if state.latched else K.PUSH
    return _rhs(phase, state.as_vector(), params)[_PUSH_SLOTS]


def ds_coefficients(state: DoubleSupportState, params: ModelParams) -> tuple[float, float, float]:
    """Scalar ``(M_ds, B_ds, G_ds)`` of the double-support equation."""
    _, _, jx, jy, jpx, jpy, hy2 = K.chain(state.r, state.D, params.l)
    if hy2 <= 0:
        raise ChainGeometryError(f"no closed chain for r={state.r}, D={state.D}")
    M = params.m_b * (jx * jx + jy * jy)
    B = params.m_b * (jx * jpx + jy * jpy) * state.dr
    G = params.m_b * params.g * jy - params.k * (params.r0 - state.r)
    return M, B, G


def ds_accel(state: DoubleSupportState, params: ModelParams, finite_mass: bool = False) -> PhaseDerivative:
    """Time derivative of ``[r, dr]``."""
    if finite_mass:
        M, Bq, G = finite_mass_ds(state.r, state.dr, state.D, params)
        return np.array([state.dr, -(Bq + G) / M])
    M, B, G = ds_coefficients(state, params)
    return np.array([state.dr, -(B * state.dr + G) / M])


# ---------------------------------------------------------------- finite leg mass


def _u(th):
    return np.array([math.sin(th), math.cos(th)])


def _w(th):
    return np.array([math.cos(th), -math.sin(th)])


def _assemble(points, n, g, gen_force):
    M = np.zeros((n, n))
    Bq = np.zeros(n)
    G = -np.asarray(gen_force, dtype=float)
    for mass, J, Jdqd in points:
        M += mass * J.T @ J
        Bq += mass * J.T @ Jdqd
        G += mass * g * J[1]
    return M, Bq, G


def finite_mass_ss(q, dq, params: ModelParams):
    """``(M, B q', G)`` for single support with leg masses ``m > 0``."""
    if not params.m > 0:
        raise ValueError("finite-mass dynamics need m > 0")
    l, c, m = params.l, params.com_offset, params.m
    ts, tn = q
    dts, dtn = dq
    us, ws, un, wn = _u(ts), _w(ts), _u(tn), _w(tn)
    z = np.zeros(2)
    body = (params.m_b, np.column_stack([l * ws, z]), -l * dts**2 * us)
    stance = (m, np.column_stack([(l - c) * ws, z]), -(l - c) * dts**2 * us)
    swing = (m, np.column_stack([l * ws, -c * wn]), -l * dts**2 * us + c * dtn**2 * un)
    return _assemble([body, stance, swing], 2, params.g, np.zeros(2))


def finite_mass_pushoff(q, dq, params: ModelParams):
    """``(M, B q', G)`` for single-support pushoff with leg masses ``m > 0``.

    The stance leg's mass rides with the hip (the spring sits at the ankle).
    """
    if not params.m > 0:
        raise ValueError("finite-mass dynamics need m > 0")
    l, c, m = params.l, params.com_offset, params.m
    ts, tn, r = q
    dts, dtn, dr = dq
    rho = l + r
    us, ws, un, wn = _u(ts), _w(ts), _u(tn), _w(tn)
    z = np.zeros(2)
    cor = 2.0 * dr * dts * ws
    body = (params.m_b, np.column_stack([rho * ws, z, us]), cor - rho * dts**2 * us)
    stance = (m, np.column_stack([(rho - c) * ws, z, us]), cor - (rho - c) * dts**2 * us)
    swing = (m, np.column_stack([rho * ws, -c * wn, us]), cor - rho * dts**2 * us + c * dtn**2 * un)
    spring = np.array([0.0, 0.0, params.k * (params.r0 - r)])
    return _assemble([body, stance, swing], 3, params.g, spring)


def finite_mass_ds(r, dr, D, params: ModelParams):
    """Scalar ``(M, B r', G)`` for double support with leg masses ``m > 0``.

    Both leg masses hang ``com_offset`` below the hip along their legs, so
    every point is a function of ``r`` alone.
    """
    if not params.m > 0:
        raise ValueError("finite-mass dynamics need m > 0")
    l, c, m = params.l, params.com_offset, params.m
    hx, hy, jx, jy, jpx, jpy, hy2 = K.chain(r, D, l)
    if hy2 <= 0:
        raise ChainGeometryError(f"no closed chain for r={r}, D={D}")
    H1 = np.array([jx, jy])
    H2 = np.array([jpx, jpy])
    rho = l + r
    # leg angles and their first two r-derivatives
    th_f = math.atan2(hx - D, hy)
    th_r = math.atan2(hx, hy)
    d1f = (hy * jx - (hx - D) * jy) / (l * l)
    d2f = (hy * jpx - (hx - D) * jpy) / (l * l)
    d1r = (hy * jx - hx * jy) / (rho * rho)
    d2r = (hy * jpx - hx * jpy) / (rho * rho) - 2.0 * d1r / rho
    points = [(params.m_b, H1, H2)]
    for th, d1, d2 in ((th_f, d1f, d2f), (th_r, d1r, d2r)):
        X1 = H1 - c * d1 * _w(th)
        X2 = H2 - c * d2 * _w(th) + c * d1 * d1 * _u(th)
        points.append((m, X1, X2))
    M = sum(mass * X1 @ X1 for mass, X1, _ in points)
    Bq = sum(mass * X1 @ X2 for mass, X1, X2 in points) * dr * dr
    G = sum(mass * params.g * X1[1] for mass, X1, _ in points) - params.k * (params.r0 - r)
    return M, Bq, G
