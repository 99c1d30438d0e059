"""Compiled numerics shared by the public modules.

Everything here works on flat float64 arrays so numba can compile it:

* parameter vector ``P`` (see the ``P_*`` slots),
* a 6-slot phase state ``y = [theta_s, theta_n, r, dtheta_s, dtheta_n, dr]``;
  single support leaves ``r``/``dr`` at zero, double support evolves only
  ``r``/``dr`` and refreshes the two angles from the closed chain,
* integrator settings ``C`` (see the ``C_*`` slots).

Leg mass is taken in the vanishing limit: the body equations ignore the legs
and the swing leg is a pendulum of length ``com_offset`` hung from the hip.
"""

import math

import numpy as np
from numba import njit

P_MB, P_M, P_L, P_K, P_G, P_R0, P_TRIG, P_COM, P_IMPULSE, P_MODE = range(10)
N_PARAMS = 10

C_RTOL, C_ATOL, C_MAXSTEP, C_EVTOL, C_MAXTIME = range(5)

TS, TN, R, DTS, DTN, DR = range(6)

SS, PUSH, LATCH, DS = 0, 1, 2, 3
PHASE_NAMES = ("single_support", "pushoff", "pushoff", "double_support")

MODE_SPRING, MODE_IMPULSIVE = 0, 1

# event function slots
EV_ARM, EV_PUSH, EV_COLL, EV_BACK, EV_FLIGHT, EV_RMAX, EV_RMIN, EV_CHAIN, EV_HIP = range(9)
N_EV = 9
# +1: fires on - to + crossing, -1: on + to -
EV_DIRECTION = np.array([1, 1, -1, -1, -1, 1, -1, -1, -1], dtype=np.int64)

# event log kinds
LOG_ARMED, LOG_PUSHOFF, LOG_COLLISION, LOG_LIFTOFF, LOG_FALL, LOG_LATCH = range(6)
LOG_NAMES = ("trigger_armed", "pushoff_start", "collision", "liftoff", "fall", "spring_latched")

# stride status
ST_OK = 0
ST_FELL_BACKWARD = 1
ST_FELL_FLIGHT = 2
ST_FELL_FORWARD = 3
ST_FAIL_SECTION = 4
ST_FAIL_RECOMPRESS = 5
ST_FAIL_CHAIN = 6
ST_FAIL_TIMEOUT = 7
ST_FAIL_STEP = 8
ST_FAIL_LIFTOFF = 9
ST_FAIL_BACKWARD_SECTION = 10
STATUS_REASONS = (
    "ok",
    "fell backward before apex",
    "stance leg unloaded (flight)",
    "fell forward",
    "section point has no admissible stance angle",
    "spring recompressed to its stop",
    "double-support chain collapsed",
    "stride timeout",
    "integrator step size underflow",
    "rear toe cannot leave the ground",
    "non-forward velocity at liftoff",
)

# info slots returned by run_stride
I_DURATION, I_STEP, I_EIN, I_ELOSS, I_ELATCH, I_XHIP0, I_FLAGS, I_NEVENTS = range(8)
N_INFO = 8
FLAG_CLAMPED = 1
FLAG_COMPRESSION = 2

MAX_EVENTS = 16
MAX_STEPS = 20000
REC_COLS = 10  # t, phase, theta_s, theta_n, r, dtheta_s, dtheta_n, dr, x_toe, D

# Dormand-Prince 5(4) tableau
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


# ---------------------------------------------------------------- geometry


@njit(cache=True)
def chain(r, D, l):
    """Hip of the closed double-support chain, rear toe at the origin.

    Returns ``(hx, hy, jx, jy, jpx, jpy, hy2)`` where ``j = dH/dr`` and
    ``jp = d2H/dr2``. ``hy2 <= 0`` flags an unsolvable triangle (the other
    entries are then NaN).
    """
    rho = l + r
    hx = (rho * rho - l * l + D * D) / (2.0 * D)
    hy2 = rho * rho - hx * hx
    if hy2 <= 0.0:
        nan = np.nan
        return hx, nan, nan, nan, nan, nan, hy2
    hy = math.sqrt(hy2)
    jx = rho / D
    jy = (rho - hx * jx) / hy
    jpx = 1.0 / D
    jpy = (1.0 - jx * jx - hx * jpx - jy * jy) / hy
    return hx, hy, jx, jy, jpx, jpy, hy2


@njit(cache=True)
def chain_angles(r, D, l):
    """(theta_front, theta_rear, dtheta_front/dr, dtheta_rear/dr)."""
    hx, hy, jx, jy, _, _, hy2 = chain(r, D, l)
    if hy2 <= 0.0:
        nan = np.nan
        return nan, nan, nan, nan
    rho = l + r
    th_f = math.atan2(hx - D, hy)
    th_r = math.atan2(hx, hy)
    dth_f = (hy * jx - (hx - D) * jy) / (l * l)
    dth_r = (hy * jx - hx * jy) / (rho * rho)
    return th_f, th_r, dth_f, dth_r


@njit(cache=True)
def stance_length(phase, y, P):
    if phase == SS:
        return P[P_L]
    if phase == LATCH:
        return P[P_L] + P[P_R0]
    return P[P_L] + y[R]


@njit(cache=True)
def swing_toe_height(phase, y, P):
    """Signed swing-toe height above ground (collision guard)."""
    rho = stance_length(phase, y, P)
    return rho * math.cos(y[TS]) - P[P_L] * math.cos(y[TN])


@njit(cache=True)
def swing_toe_ahead(phase, y, P):
    """Horizontal distance of swing toe ahead of the stance toe."""
    rho = stance_length(phase, y, P)
    return rho * math.sin(y[TS]) - P[P_L] * math.sin(y[TN])


@njit(cache=True)
def is_heelstrike(y):
    """Hip strictly between the toes and moving forward; other touchdowns are scuffs."""
    return y[TS] > 0.0 and y[TN] < 0.0 and y[DTS] > 0.0


# ---------------------------------------------------------------- dynamics


@njit(cache=True)
def rhs(phase, y, P, D, out):
    """First-order vector field of ``phase`` written into ``out``."""
    l = P[P_L]
    g = P[P_G]
    c = P[P_COM]
    for i in range(6):
        out[i] = 0.0
    if phase == DS:
        r = y[R]
        dr = y[DR]
        _, _, jx, jy, jpx, jpy, hy2 = chain(r, D, l)
        out[R] = dr
        if hy2 <= 0.0:
            out[DR] = np.nan
            return
        f = P[P_K] * (P[P_R0] - r) / P[P_MB]
        out[DR] = (f - g * jy - (jx * jpx + jy * jpy) * dr * dr) / (jx * jx + jy * jy)
        return
    ts = y[TS]
    tn = y[TN]
    dts = y[DTS]
    out[TS] = dts
    out[TN] = y[DTN]
    if phase == PUSH:
        r = y[R]
        dr = y[DR]
        rho = l + r
        f = P[P_K] * (P[P_R0] - r) / P[P_MB]
        out[R] = dr
        out[DR] = f - g * math.cos(ts) + rho * dts * dts
        out[DTS] = (g * math.sin(ts) - 2.0 * dr * dts) / rho
    else:
        rho = l if phase == SS else l + P[P_R0]
        # leg force per unit body mass
        f = g * math.cos(ts) - rho * dts * dts
        out[DTS] = g * math.sin(ts) / rho
    # hip acceleration plus gravity is f along the stance leg
    out[DTN] = f * math.sin(ts - tn) / c


@njit(cache=True)
def energy(phase, y, P, D):
    """Mechanical energy of the body (and engaged spring), ground datum."""
    mb = P[P_MB]
    g = P[P_G]
    l = P[P_L]
    if phase == DS:
        _, hy, jx, jy, _, _, hy2 = chain(y[R], D, l)
        if hy2 <= 0.0:
            return np.nan
        v2 = (jx * jx + jy * jy) * y[DR] * y[DR]
        s = P[P_R0] - y[R]
        return 0.5 * mb * v2 + mb * g * hy + 0.5 * P[P_K] * s * s
    rho = stance_length(phase, y, P)
    dr = y[DR] if phase == PUSH else 0.0
    v2 = dr * dr + rho * rho * y[DTS] * y[DTS]
    e = 0.5 * mb * v2 + mb * g * rho * math.cos(y[TS])
    if phase == PUSH:
        s = P[P_R0] - y[R]
        e += 0.5 * P[P_K] * s * s
    return e


@njit(cache=True)
def events(phase, y, P, D, out):
    """Evaluate every event function; inactive ones are left at NaN."""
    for i in range(N_EV):
        out[i] = np.nan
    g = P[P_G]
    l = P[P_L]
    if phase == DS:
        out[EV_RMAX] = y[R] - P[P_R0]
        out[EV_RMIN] = y[R]
        out[EV_CHAIN] = chain(y[R], D, l)[6]
        return
    ts = y[TS]
    dts = y[DTS]
    rho = stance_length(phase, y, P)
    out[EV_COLL] = swing_toe_height(phase, y, P)
    out[EV_BACK] = dts
    out[EV_HIP] = math.cos(ts)
    if phase == SS:
        out[EV_ARM] = ts + P[P_TRIG]
        out[EV_PUSH] = P[P_K] * P[P_R0] / P[P_MB] + l * dts * dts - g * math.cos(ts)
        out[EV_FLIGHT] = g * math.cos(ts) - l * dts * dts
    elif phase == PUSH:
        out[EV_RMAX] = y[R] - P[P_R0]
        out[EV_RMIN] = y[R]
    else:
        out[EV_FLIGHT] = g * math.cos(ts) - rho * dts * dts


# ---------------------------------------------------------------- jump maps


@njit(cache=True)
def impact(rho, drho, ts, tn, dts, l, mb):
    """Inelastic front-toe strike with a non-impulsive (prismatic) rear leg.

    Only the new contact delivers an impulse, directed along the massless
    front leg, so the hip loses its velocity component along that leg.

    Returns ``(vx_pre, vy_pre, vx_post, vy_post, D)``.
    """
    st = math.sin(ts)
    ct = math.cos(ts)
    vx = drho * st + rho * dts * ct
    vy = drho * ct - rho * dts * st
    ex = math.sin(tn)
    ey = math.cos(tn)
    vf = vx * ex + vy * ey
    D = rho * st - l * math.sin(tn)
    return vx, vy, vx - vf * ex, vy - vf * ey, D


@njit(cache=True)
def collision_to_ds(rho, drho, ts, tn, dts, l, mb, clamp):
    """Collision into double support: returns ``(dr_post, D, dKE, flags)``."""
    vx, vy, ux, uy, D = impact(rho, drho, ts, tn, dts, l, mb)
    dr = ux * math.sin(ts) + uy * math.cos(ts)
    flags = 0
    if dr < 0.0:
        if clamp:
            dr = 0.0
            flags |= FLAG_CLAMPED
        else:
            flags |= FLAG_COMPRESSION
    # recompute the post-impact kinetic energy from the chain velocity
    dke = 0.5 * mb * ((ux * ux + uy * uy) - (vx * vx + vy * vy))
    if flags & FLAG_CLAMPED:
        dke = -0.5 * mb * (vx * vx + vy * vy)
    return dr, D, dke, flags


@njit(cache=True)
def impulsive_impact(ts, tn, dts, dtn, impulse, l, mb, c):
    """Trailing-leg impulse then rigid front-toe strike.

    Returns ``(ts+, tn+, dts+, dtn+, e_in, e_loss, D, rear_release_speed)``.
    """
    st = math.sin(ts)
    ct = math.cos(ts)
    vx = l * dts * ct
    vy = -l * dts * st
    px = vx + impulse / mb * st
    py = vy + impulse / mb * ct
    ex = math.sin(tn)
    ey = math.cos(tn)
    pf = px * ex + py * ey
    ux = px - pf * ex
    uy = py - pf * ey
    release = ux * st + uy * ct
    ts_new = tn
    tn_new = ts
    dts_new = (ux * math.cos(ts_new) - uy * math.sin(ts_new)) / l
    # swing point mass keeps its momentum normal to the leg
    dtn_new = dts + ((ux - vx) * ct - (uy - vy) * st) / c
    e0 = 0.5 * mb * (vx * vx + vy * vy)
    e1 = 0.5 * mb * (px * px + py * py)
    e2 = 0.5 * mb * (ux * ux + uy * uy)
    D = l * st - l * math.sin(tn)
    return ts_new, tn_new, dts_new, dtn_new, e1 - e0, e1 - e2, D, release


@njit(cache=True)
def section_stance_angle(theta_n, l, r0):
    """Stance angle at liftoff from both toes grounded, or NaN."""
    cs = (l + r0) * math.cos(theta_n) / l
    if cs > 1.0 or cs <= 0.0:
        return np.nan
    a = math.acos(cs)
    return -a if theta_n > 0.0 else a


# ---------------------------------------------------------------- integrator


@njit(cache=True)
def _dp_step(phase, y, h, P, D, C, ks, tmp, yout):
    """One Dormand-Prince step; returns the scaled error estimate."""
    rhs(phase, y, P, D, ks[0])
    for i in range(6):
        tmp[i] = y[i] + h * _A21 * ks[0, i]
    rhs(phase, tmp, P, D, ks[1])
    for i in range(6):
        tmp[i] = y[i] + h * (_A31 * ks[0, i] + _A32 * ks[1, i])
    rhs(phase, tmp, P, D, ks[2])
    for i in range(6):
        tmp[i] = y[i] + h * (_A41 * ks[0, i] + _A42 * ks[1, i] + _A43 * ks[2, i])
    rhs(phase, tmp, P, D, ks[3])
    for i in range(6):
        tmp[i] = y[i] + h * (_A51 * ks[0, i] + _A52 * ks[1, i] + _A53 * ks[2, i] + _A54 * ks[3, i])
    rhs(phase, tmp, P, D, ks[4])
    for i in range(6):
        tmp[i] = y[i] + h * (
            _A61 * ks[0, i] + _A62 * ks[1, i] + _A63 * ks[2, i] + _A64 * ks[3, i] + _A65 * ks[4, i]
        )
    rhs(phase, tmp, P, D, ks[5])
    for i in range(6):
        yout[i] = y[i] + h * (
            _B1 * ks[0, i] + _B3 * ks[2, i] + _B4 * ks[3, i] + _B5 * ks[4, i] + _B6 * ks[5, i]
        )
    rhs(phase, yout, P, D, ks[6])
    err = 0.0
    for i in range(6):
        e = h * (
            _E1 * ks[0, i]
            + _E3 * ks[2, i]
            + _E4 * ks[3, i]
            + _E5 * ks[4, i]
            + _E6 * ks[5, i]
            + _E7 * ks[6, i]
        )
        sc = C[C_ATOL] + C[C_RTOL] * max(abs(y[i]), abs(yout[i]))
        q = abs(e) / sc
        if not q <= err:  # propagates NaN
            err = q
    return err


@njit(cache=True)
def _locate(phase, y, h, P, D, C, ev_index, f0, ks, tmp, ev, yout):
    """Root of event ``ev_index`` inside a step by re-integration from ``y``.

    Illinois regula falsi with bisection fallback on the step length; the
    returned step lands on the far side of the crossing. Returns ``(tau, f)``.
    """
    lo = 0.0
    hi = h
    flo = f0
    _dp_step(phase, y, hi, P, D, C, ks, tmp, yout)
    events(phase, yout, P, D, ev)
    fhi = ev[ev_index]
    side = 0
    width_prev = hi - lo
    it = 0
    while hi - lo > C[C_EVTOL] and it < 200:
        it += 1
        if it % 3 == 0 and hi - lo > 0.5 * width_prev:
            tau = 0.5 * (lo + hi)
        else:
            tau = hi - fhi * (hi - lo) / (fhi - flo)
            if not (lo < tau < hi):
                tau = 0.5 * (lo + hi)
        if it % 3 == 0:
            width_prev = hi - lo
        _dp_step(phase, y, tau, P, D, C, ks, tmp, yout)
        events(phase, yout, P, D, ev)
        f = ev[ev_index]
        if f == 0.0:
            lo = tau
            hi = tau
            fhi = f
            break
        if (f > 0.0) == (fhi > 0.0):
            hi = tau
            fhi = f
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo = tau
            flo = f
            if side == -1:
                fhi *= 0.5
            side = -1
    _dp_step(phase, y, hi, P, D, C, ks, tmp, yout)
    events(phase, yout, P, D, ev)
    return hi, ev[ev_index]


@njit(cache=True)
def _record(rec, n, t, phase, y, x_toe, D):
    if n < rec.shape[0]:
        rec[n, 0] = t
        rec[n, 1] = phase
        rec[n, 2] = y[TS]
        rec[n, 3] = y[TN]
        rec[n, 4] = y[R]
        rec[n, 5] = y[DTS]
        rec[n, 6] = y[DTN]
        rec[n, 7] = y[DR]
        rec[n, 8] = x_toe
        rec[n, 9] = D
    return n + 1


@njit(cache=True)
def _log(evt, evk, n, t, kind):
    if n < evt.shape[0]:
        evt[n] = t
        evk[n] = kind
    return n + 1


@njit(cache=True)
def _ds_refresh(y, D, l):
    th_f, th_r, dth_f, dth_r = chain_angles(y[R], D, l)
    y[TS] = th_f
    y[TN] = th_r
    y[DTS] = dth_f * y[DR]
    y[DTN] = dth_r * y[DR]


@njit(cache=True)
def run_stride(q, P, C, rec, evt, evk):
    """Integrate one stride from a section point.

    ``rec`` receives accepted-step samples (pass a 0-row array to skip
    recording); ``evt``/``evk`` receive the event log. Returns
    ``(status, q_next, info, n_rec)``.
    """
    l = P[P_L]
    mb = P[P_MB]
    r0 = P[P_R0]
    mode = int(P[P_MODE])
    info = np.zeros(N_INFO)
    qn = np.full(3, np.nan)
    y = np.zeros(6)
    y1 = np.zeros(6)
    ks = np.zeros((7, 6))
    tmp = np.zeros(6)
    ybuf = np.zeros(6)
    ev0 = np.zeros(N_EV)
    ev1 = np.zeros(N_EV)
    evs = np.zeros(N_EV)
    yev = np.zeros(6)
    ybest = np.zeros(6)
    nrec = 0
    nev = 0

    r0_sec = r0 if mode == MODE_SPRING else 0.0
    ts0 = section_stance_angle(q[1], l, r0_sec)
    if not (ts0 == ts0) or q[0] <= 0.0:
        info[I_NEVENTS] = nev
        st = ST_FAIL_SECTION if not (ts0 == ts0) else ST_FAIL_BACKWARD_SECTION
        return st, qn, info, nrec
    y[TS] = ts0
    y[TN] = q[1]
    y[DTS] = q[0]
    y[DTN] = q[2]
    info[I_XHIP0] = l * math.sin(ts0)

    phase = SS
    armed = False
    D = 0.0
    x_toe = 0.0
    t = 0.0
    h = min(1e-3, C[C_MAXSTEP])
    ein = 0.0
    eloss = 0.0
    elatch = 0.0
    flags = 0
    tmax = C[C_MAXTIME]

    nrec = _record(rec, nrec, t, phase, y, x_toe, D)
    events(phase, y, P, D, ev0)
    if ev0[EV_FLIGHT] <= 0.0:
        nev = _log(evt, evk, nev, t, LOG_FALL)
        info[I_NEVENTS] = nev
        return ST_FELL_FLIGHT, qn, info, nrec
    if mode == MODE_SPRING:
        if ev0[EV_ARM] > 0.0:
            armed = True
            nev = _log(evt, evk, nev, t, LOG_ARMED)
            if r0 > 0.0 and ev0[EV_PUSH] > 0.0:
                phase = PUSH
                ein += 0.5 * P[P_K] * r0 * r0
                nev = _log(evt, evk, nev, t, LOG_PUSHOFF)

    status = ST_OK
    done = False
    nsteps = 0
    while not done:
        nsteps += 1
        if t > tmax:
            status = ST_FAIL_TIMEOUT
            break
        if h < 1e-14 or nsteps > MAX_STEPS:
            status = ST_FAIL_STEP
            break
        h = min(h, C[C_MAXSTEP])
        err = _dp_step(phase, y, h, P, D, C, ks, tmp, y1)
        if not err <= 1.0:
            if err != err:
                h *= 0.2
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
            continue
        events(phase, y, P, D, ev0)
        events(phase, y1, P, D, ev1)
        best = -1
        best_tau = h + 1.0
        for k in range(N_EV):
            a = ev0[k]
            b = ev1[k]
            if a != a or b != b:
                continue
            if mode == MODE_IMPULSIVE and (k == EV_ARM or k == EV_PUSH):
                continue
            if k == EV_ARM and armed:
                continue
            if k == EV_PUSH and (not armed or r0 <= 0.0):
                continue
            if EV_DIRECTION[k] > 0:
                crossed = a < 0.0 and b >= 0.0
            else:
                crossed = a > 0.0 and b <= 0.0
            if not crossed:
                continue
            tau, _ = _locate(phase, y, h, P, D, C, k, a, ks, tmp, evs, yev)
            if k == EV_COLL and not is_heelstrike(yev):
                continue
            if tau < best_tau - C[C_EVTOL] or (
                abs(tau - best_tau) <= C[C_EVTOL] and k == EV_COLL
            ):
                best = k
                best_tau = tau
                for i in range(6):
                    ybest[i] = yev[i]
        if best < 0:
            for i in range(6):
                y[i] = y1[i]
            t += h
            if phase == DS:
                _ds_refresh(y, D, l)
            nrec = _record(rec, nrec, t, phase, y, x_toe, D)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= fac
            continue

        # an event fired inside the step
        for i in range(6):
            y[i] = ybest[i]
        t += best_tau
        if phase == DS:
            _ds_refresh(y, D, l)
        nrec = _record(rec, nrec, t, phase, y, x_toe, D)
        if best == EV_ARM:
            armed = True
            nev = _log(evt, evk, nev, t, LOG_ARMED)
            events(phase, y, P, D, evs)
            if r0 > 0.0 and evs[EV_PUSH] > 0.0:
                best = EV_PUSH
        if best == EV_PUSH:
            phase = PUSH
            y[R] = 0.0
            y[DR] = 0.0
            ein += 0.5 * P[P_K] * r0 * r0
            nev = _log(evt, evk, nev, t, LOG_PUSHOFF)
        elif best == EV_BACK:
            status = ST_FELL_BACKWARD
            nev = _log(evt, evk, nev, t, LOG_FALL)
            done = True
        elif best == EV_FLIGHT:
            status = ST_FELL_FLIGHT
            nev = _log(evt, evk, nev, t, LOG_FALL)
            done = True
        elif best == EV_HIP:
            status = ST_FELL_FORWARD
            nev = _log(evt, evk, nev, t, LOG_FALL)
            done = True
        elif best == EV_RMIN or (best == EV_CHAIN):
            status = ST_FAIL_RECOMPRESS if best == EV_RMIN else ST_FAIL_CHAIN
            nev = _log(evt, evk, nev, t, LOG_FALL)
            done = True
        elif best == EV_RMAX and phase == PUSH:
            elatch += 0.5 * mb * y[DR] * y[DR]
            y[R] = r0
            y[DR] = 0.0
            phase = LATCH
            nev = _log(evt, evk, nev, t, LOG_LATCH)
            events(phase, y, P, D, evs)
            if evs[EV_FLIGHT] <= 0.0:
                status = ST_FELL_FLIGHT
                nev = _log(evt, evk, nev, t, LOG_FALL)
                done = True
        elif best == EV_RMAX and phase == DS:
            y[R] = r0
            _ds_refresh(y, D, l)
            nev = _log(evt, evk, nev, t, LOG_LIFTOFF)
            nrec = _record(rec, nrec, t, phase, y, x_toe, D)
            done = True
        elif best == EV_COLL:
            nev = _log(evt, evk, nev, t, LOG_COLLISION)
            rho = stance_length(phase, y, P)
            if mode == MODE_IMPULSIVE:
                tsn, tnn, dtsn, dtnn, e_in, e_loss, D, rel = impulsive_impact(
                    y[TS], y[TN], y[DTS], y[DTN], P[P_IMPULSE], l, mb, P[P_COM]
                )
                ein += e_in
                eloss += e_loss
                x_toe = D
                if rel <= 0.0:
                    status = ST_FAIL_LIFTOFF
                else:
                    y[TS] = tsn
                    y[TN] = tnn
                    y[DTS] = dtsn
                    y[DTN] = dtnn
                    nev = _log(evt, evk, nev, t, LOG_LIFTOFF)
                    nrec = _record(rec, nrec, t, SS, y, x_toe, D)
                done = True
            else:
                if phase == SS:
                    # spring released at impact: post-collision pushoff
                    ein += 0.5 * P[P_K] * r0 * r0
                    nev = _log(evt, evk, nev, t, LOG_PUSHOFF)
                    rm = 0.0
                    drm = 0.0
                elif phase == PUSH:
                    rm = y[R]
                    drm = y[DR]
                else:
                    rm = r0
                    drm = 0.0
                dr_post, D, dke, fl = collision_to_ds(
                    rho, drm, y[TS], y[TN], y[DTS], l, mb, phase == SS
                )
                flags |= fl
                eloss += -dke
                x_toe = D
                phase = DS
                y[R] = rm
                y[DR] = dr_post
                _ds_refresh(y, D, l)
                nrec = _record(rec, nrec, t, phase, y, x_toe, D)
                if rm >= r0 and dr_post >= 0.0:
                    nev = _log(evt, evk, nev, t, LOG_LIFTOFF)
                    done = True
                else:
                    rhs(phase, y, P, D, ybuf)
                    if rm <= 0.0 and dr_post <= 0.0 and ybuf[DR] < 0.0:
                        status = ST_FAIL_RECOMPRESS
                        nev = _log(evt, evk, nev, t, LOG_FALL)
                        done = True

    info[I_DURATION] = t
    info[I_STEP] = D
    info[I_EIN] = ein
    info[I_ELOSS] = eloss
    info[I_ELATCH] = elatch
    info[I_FLAGS] = flags
    info[I_NEVENTS] = nev
    if status == ST_OK:
        qn[0] = y[DTS]
        qn[1] = y[TN]
        qn[2] = y[DTN]
        if qn[0] <= 0.0:
            status = ST_FAIL_BACKWARD_SECTION
    return status, qn, info, nrec


@njit(cache=True)
def run_strides(q, P, C, n, out):
    """Chain ``n`` strides without recording; section points go to ``out``.

    Returns ``(status, n_completed)``.
    """
    rec = np.zeros((0, REC_COLS))
    evt = np.zeros(MAX_EVENTS)
    evk = np.zeros(MAX_EVENTS, dtype=np.int64)
    cur = q.copy()
    for i in range(n):
        st, qn, info, _ = run_stride(cur, P, C, rec, evt, evk)
        if st != ST_OK:
            return st, i
        for j in range(3):
            out[i, j] = qn[j]
            cur[j] = qn[j]
    return ST_OK, n


@njit(cache=True)
def integrate_phase(phase, y0, P, D, C, t_end, out_energy):
    """Plain integration of one smooth phase for ``t_end`` seconds.

    No events; used by the energy audits. Fills ``out_energy`` with the
    energy at each accepted step and returns ``(y_end, n_steps)``.
    """
    y = y0.copy()
    y1 = np.zeros(6)
    ks = np.zeros((7, 6))
    tmp = np.zeros(6)
    t = 0.0
    h = min(1e-3, C[C_MAXSTEP])
    n = 0
    if n < out_energy.shape[0]:
        out_energy[n] = energy(phase, y, P, D)
    n += 1
    while t < t_end and h > 1e-14:
        h = min(h, C[C_MAXSTEP], t_end - t)
        err = _dp_step(phase, y, h, P, D, C, ks, tmp, y1)
        if not err <= 1.0:
            h *= 0.2 if err != err else max(0.2, 0.9 * err ** -0.2)
            continue
        for i in range(6):
            y[i] = y1[i]
        t += h
        if n < out_energy.shape[0]:
            out_energy[n] = energy(phase, y, P, D)
        n += 1
        h *= 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
    return y, n
