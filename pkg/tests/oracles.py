"""Independent reference computations used as ground truth by the tests.

Nothing here imports the package's dynamics or jump maps: geometry is
re-derived by the law of cosines, equations of motion come from numerically
differentiated Lagrangians, and impacts from linear impulse-momentum
systems solved with numpy.
"""

import math

import numpy as np

# ---------------------------------------------------------------- geometry


def two_circle(r, D, l):
    """Hip of the double-support chain by the law of cosines.

    Rear toe at the origin (leg length ``l + r``), front toe at ``(D, 0)``
    (leg length ``l``). Returns ``(hip, theta_front, theta_rear)`` with
    angles from the upward vertical, positive when the hip is ahead of the toe.
    """
    a = l + r
    cos_phi = (a * a + D * D - l * l) / (2.0 * a * D)
    if not -1.0 < cos_phi < 1.0:
        raise ValueError("no triangle")
    phi = math.acos(cos_phi)  # angle of the rear leg above the ground line
    hip = np.array([a * math.cos(phi), a * math.sin(phi)])
    th_rear = math.pi / 2 - phi
    th_front = math.atan2(hip[0] - D, hip[1])
    return hip, th_front, th_rear


# ---------------------------------------------------------------- Lagrangians


def _central(f, x, h):
    g = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _grad(f, x, h):
    """Central differences with one Richardson step (fourth order)."""
    return (4.0 * _central(f, x, 0.5 * h) - _central(f, x, h)) / 3.0


def _hess(f, x, hi):
    n = len(x)
    H = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = hi
            ej[j] = hi
            H[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * hi * hi)
    return H


def lagrange_accel(L, q, qd, hq=1e-3, hv=0.5, known=None):
    """Accelerations from ``d/dt dL/dqd - dL/dq = 0`` by central differences.

    L is quadratic in the velocities, so the velocity differences are exact
    for any step and ``hv`` can be large; ``hq`` trades truncation for
    round-off.

    ``known`` maps coordinate index to an already-known acceleration; those
    rows are dropped and their values moved to the right-hand side (used
    for a test mass whose motion cannot feed back on the body).
    """
    q = np.asarray(q, dtype=float)
    qd = np.asarray(qd, dtype=float)
    n = len(q)
    M = _hess(lambda v: L(q, v), qd, hv)
    dLdq = _grad(lambda x: L(x, qd), q, hq)
    C = np.empty((n, n))  # C[i, j] = d2L / dqd_i dq_j
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0

        def p(s):
            return _central(lambda v: L(q + s * e, v), qd, hv)

        d1 = (p(hq) - p(-hq)) / (2 * hq)
        d2 = (p(0.5 * hq) - p(-0.5 * hq)) / hq
        C[:, j] = (4.0 * d2 - d1) / 3.0
    rhs = dLdq - C @ qd
    known = known or {}
    free = [i for i in range(n) if i not in known]
    b = rhs[free].copy()
    for k, a in known.items():
        b -= M[np.ix_(free, [k])][:, 0] * a
    sol = np.linalg.solve(M[np.ix_(free, free)], b)
    out = np.empty(n)
    for k, a in known.items():
        out[k] = a
    out[free] = sol
    return out


def _u(th):
    return np.array([math.sin(th), math.cos(th)])


def _w(th):
    return np.array([math.cos(th), -math.sin(th)])


def ss_accel(ts, tn, dts, dtn, mb, l, g, c):
    """``[ddtheta_s, ddtheta_n]`` in the vanishing leg-mass limit.

    The body Lagrangian gives the stance equation; the swing leg is a unit
    test mass at distance ``c`` below the hip, riding on the body motion.
    """

    def L_body(q, qd):
        v = l * qd[0] * _w(q[0])
        y = l * math.cos(q[0])
        return 0.5 * mb * v @ v - mb * g * y

    (dds,) = lagrange_accel(L_body, [ts], [dts])

    def L_test(q, qd):
        v = l * qd[0] * _w(q[0]) - c * qd[1] * _w(q[1])
        y = l * math.cos(q[0]) - c * math.cos(q[1])
        return 0.5 * v @ v - g * y

    return lagrange_accel(L_test, [ts, tn], [dts, dtn], known={0: dds})


def pushoff_accel(ts, tn, r, dts, dtn, dr, mb, l, g, c, k, r0):
    """``[ddtheta_s, ddtheta_n, ddr]`` in the vanishing leg-mass limit."""

    def hip(q):
        return (l + q[1]) * _u(q[0])

    def L_body(q, qd):
        rho = l + q[1]
        v = qd[1] * _u(q[0]) + rho * qd[0] * _w(q[0])
        return 0.5 * mb * v @ v - mb * g * hip(q)[1] - 0.5 * k * (r0 - q[1]) ** 2

    dds, ddr = lagrange_accel(L_body, [ts, r], [dts, dr])

    def L_test(q, qd):
        rho = l + q[2]
        v = qd[2] * _u(q[0]) + rho * qd[0] * _w(q[0]) - c * qd[1] * _w(q[1])
        y = rho * math.cos(q[0]) - c * math.cos(q[1])
        return 0.5 * v @ v - g * y

    acc = lagrange_accel(L_test, [ts, tn, r], [dts, dtn, dr], known={0: dds, 2: ddr})
    return acc


def ds_accel(r, dr, D, mb, l, g, k, r0):
    """``ddr`` of the hip on the two-circle chain with the rear-leg spring.

    The hip velocity uses a complex-step derivative of the chain so that
    the outer differences are not polluted by inner ones.
    """

    def hip_c(rr):
        a = l + rr
        cos_phi = (a * a + D * D - l * l) / (2.0 * a * D)
        sin_phi = (1 - cos_phi * cos_phi) ** 0.5
        return a * cos_phi, a * sin_phi

    def dhip(rr):
        h = 1e-30
        x, y = hip_c(complex(rr, h))
        return np.array([x.imag / h, y.imag / h])

    def L(q, qd):
        J = dhip(q[0])
        y = hip_c(complex(q[0], 0.0))[1].real
        return 0.5 * mb * (J @ J) * qd[0] ** 2 - mb * g * y - 0.5 * k * (r0 - q[0]) ** 2

    return lagrange_accel(L, [r], [dr])[0]


# ---------------------------------------------------------------- impacts


def impact(v_minus, th_front, th_rear, mb):
    """Hip velocity after a front-toe strike and the rear spring rate.

    Unknowns ``[vx+, vy+, lam]``: ``mb (v+ - v-) = lam * u_front`` (the
    massless front leg carries the only impulse) and ``v+ . u_front = 0``
    (front toe pinned, leg rigid). Returns ``(v_plus, dr_plus, lam)``.
    """
    uf = _u(th_front)
    A = np.zeros((3, 3))
    A[:2, :2] = mb * np.eye(2)
    A[:2, 2] = -uf
    A[2, :2] = uf
    b = np.concatenate([mb * np.asarray(v_minus, dtype=float), [0.0]])
    x = np.linalg.solve(A, b)
    v = x[:2]
    return v, float(v @ _u(th_rear)), float(x[2])


def impulsive_step(ts, tn, dts, impulse, l, mb, c):
    """Trailing-leg impulse then a rigid front-toe strike.

    The body gets ``impulse`` along the stance leg, then :func:`impact`.
    The old stance leg becomes the swing leg: its point mass (distance ``c``
    below the hip, mass ``eps``) is joined to the hip by a massless rod, so
    unknowns ``[vLx, vLy, mu, dtheta+]`` satisfy ``eps (vL+ - vL-) = mu u``
    and ``vL+ = v_hip+ - c dtheta+ w`` (the ``eps`` scales out).
    Returns ``(v_pre, v_push, v_post, dtheta_swing_post)``.
    """
    v0 = l * dts * _w(ts)
    v1 = v0 + impulse / mb * _u(ts)
    v2, _, _ = impact(v1, tn, ts, mb)
    vL = v0 - c * dts * _w(ts)
    A = np.zeros((4, 4))
    A[:2, :2] = np.eye(2)
    A[:2, 2] = -_u(ts)
    A[2:, :2] = np.eye(2)
    A[2:, 3] = c * _w(ts)
    b = np.concatenate([vL, v2])
    x = np.linalg.solve(A, b)
    return v0, v1, v2, float(x[3])
