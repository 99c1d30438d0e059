"""Return map on the liftoff section: fixed points, stability, period, basins.

Section points are compared with an unweighted Euclidean norm over
``[dtheta_s, theta_n, dtheta_n]`` (rad and rad/s mixed; with ``l = 1`` the
magnitudes are commensurate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from .model import LiftoffPoint, ModelParams
from .simulator import DEFAULT_CONFIG, IntegratorConfig

BOA_NORMALIZATION = (5.75, 7.35, 0.195)
PERIOD_LADDER = (1, 2, 4, 8)


class FallBeforeReturn(RuntimeError):
    """A stride fell or failed before the requested number of returns."""

    def __init__(self, status: int, stride: int):
        self.status = status
        self.stride = stride
        super().__init__(f"stride {stride + 1}: {K.STATUS_REASONS[status]}")


class NoConvergence(RuntimeError):
    pass


class JacobianUndefined(RuntimeError):
    pass


@dataclass(frozen=True)
class FixedPointRecord:
    """A period-``j`` fixed point and what is known about it.

    ``orbit`` holds the ``j`` section points of the cycle starting at
    ``q_star``. Metric fields stay ``None`` until filled by the metrics layer.
    """

    p: tuple[float, float]
    k: float
    q_star: LiftoffPoint
    period_j: int
    lambda_max: float
    eigenvalues: np.ndarray
    residual: float
    orbit: np.ndarray
    iterations: int = 0
    region: str | None = None
    speed: float | None = None
    mcot: float | None = None
    boa: tuple[float, float, float] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.lambda_max < 1.0

    def with_(self, **changes) -> "FixedPointRecord":
        return replace(self, **changes)


def _as_array(q) -> np.ndarray:
    if isinstance(q, LiftoffPoint):
        return q.as_array()
    return np.asarray(q, dtype=float).copy()


def orbit(q, j: int, params: ModelParams, cfg: IntegratorConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Section points after strides ``1..j``; raises on any failure."""
    out = np.full((j, 3), np.nan)
    status, n = K.run_strides(_as_array(q), params.to_array(), cfg.to_array(), j, out)
    if status != K.ST_OK:
        raise FallBeforeReturn(int(status), int(n))
    return out


def return_map(q_l, j: int, params: ModelParams, cfg: IntegratorConfig = DEFAULT_CONFIG) -> LiftoffPoint:
    """``j``-fold application of the stride map."""
    if j < 1:
        raise ValueError("j must be at least 1")
    return LiftoffPoint.from_array(orbit(q_l, j, params, cfg)[-1])


def _G(q, j, P, C):
    out = np.full((j, 3), np.nan)
    status, n = K.run_strides(q, P, C, j, out)
    if status != K.ST_OK:
        raise FallBeforeReturn(int(status), int(n))
    return out[-1].copy()


def fd_step(q) -> np.ndarray:
    return 1e-6 * np.maximum(1.0, np.abs(q))


def jacobian(q_star, j: int, params: ModelParams, cfg: IntegratorConfig = DEFAULT_CONFIG, h=None) -> np.ndarray:
    """Central-difference Jacobian of the ``j``-fold map.

    A side that falls is dropped in favour of a one-sided difference;
    if both sides fall the Jacobian is undefined.
    """
    q = _as_array(q_star)
    P, C = params.to_array(), cfg.to_array()
    h = fd_step(q) if h is None else np.broadcast_to(np.asarray(h, dtype=float), (3,))
    g0 = None
    J = np.empty((3, 3))
    for i in range(3):
        qp, qm = q.copy(), q.copy()
        qp[i] += h[i]
        qm[i] -= h[i]
        try:
            gp = _G(qp, j, P, C)
        except FallBeforeReturn:
            gp = None
        try:
            gm = _G(qm, j, P, C)
        except FallBeforeReturn:
            gm = None
        if gp is not None and gm is not None:
            J[:, i] = (gp - gm) / (2.0 * h[i])
            continue
        if gp is None and gm is None:
            raise JacobianUndefined(f"both sides of coordinate {i} fall")
        if g0 is None:
            try:
                g0 = _G(q, j, P, C)
            except FallBeforeReturn as exc:
                raise JacobianUndefined("the base point itself falls") from exc
        J[:, i] = (gp - g0) / h[i] if gp is not None else (g0 - gm) / h[i]
    return J


def _newton(q, j, P, C, tol, max_iter):
    def F(x):
        return _G(x, j, P, C) - x

    f = F(q)
    res = float(np.linalg.norm(f))
    it = 0
    while res >= tol:
        if it >= max_iter:
            raise NoConvergence(f"residual {res:.3e} after {max_iter} iterations")
        it += 1
        h = 1e-7 * np.maximum(1.0, np.abs(q))
        A = np.empty((3, 3))
        for i in range(3):
            qp = q.copy()
            qp[i] += h[i]
            try:
                A[:, i] = (F(qp) - f) / h[i]
            except FallBeforeReturn:
                qp[i] = q[i] - h[i]
                A[:, i] = (f - F(qp)) / h[i]
        try:
            dq = np.linalg.solve(A, -f)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence("singular Newton matrix") from exc
        step = 1.0
        for _ in range(9):
            qn = q + step * dq
            try:
                fn = F(qn)
            except FallBeforeReturn:
                fn = None
            if fn is not None and np.linalg.norm(fn) < res:
                break
            step *= 0.5
        else:
            raise NoConvergence(f"no decrease from residual {res:.3e}")
        q, f = qn, fn
        res = float(np.linalg.norm(f))
    return q, res, it


def find_fixed_point(
    guess,
    j: int,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> FixedPointRecord:
    """Newton solve of ``G^j(q) = q`` followed by the stability analysis."""
    if j < 1:
        raise ValueError("j must be at least 1")
    P, C = params.to_array(), cfg.to_array()
    q, res, it = _newton(_as_array(guess), j, P, C, tol, max_iter)
    J = jacobian(q, j, params, cfg)
    eig = np.linalg.eigvals(J)
    pts = np.vstack([q, orbit(q, j, params, cfg)[:-1]]) if j > 1 else q[None, :]
    return FixedPointRecord(
        p=(params.r0, params.theta_trig),
        k=params.k,
        q_star=LiftoffPoint.from_array(q),
        period_j=j,
        lambda_max=float(np.max(np.abs(eig))),
        eigenvalues=eig,
        residual=res,
        orbit=pts,
        iterations=it,
    )


def minimal_period(record: FixedPointRecord, tol: float = 1e-6) -> int:
    """Smallest divisor ``j'`` of the record's period that already closes the orbit."""
    pts = record.orbit
    j = record.period_j
    for d in range(1, j):
        if j % d == 0 and np.max(np.linalg.norm(pts[d:] - pts[:-d], axis=1)) < tol:
            return d
    return j


def detect_period(
    q,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    transient: int = 64,
    window: int = 64,
    tol: float = 1e-6,
) -> int | None:
    """Period of the attractor reached from ``q``; ``None`` when aperiodic.

    Raises :class:`FallBeforeReturn` if the rollout falls.
    """
    n = transient + window + max(PERIOD_LADDER)
    pts = orbit(q, n, params, cfg)[transient:]
    for j in PERIOD_LADDER:
        d = np.linalg.norm(pts[j : window + j] - pts[:window], axis=1)
        if np.max(d) < tol:
            return j
    return None


# ---------------------------------------------------------------- basins


def converges(q, cycle: np.ndarray, params: ModelParams, cfg: IntegratorConfig, strides: int = 50, tol: float = 1e-4) -> bool:
    """True if the rollout from ``q`` comes within ``tol`` of ``cycle``'s
    section points within ``strides`` strides without falling first."""
    out = np.full((strides, 3), np.nan)
    K.run_strides(_as_array(q), params.to_array(), cfg.to_array(), strides, out)
    ok = ~np.isnan(out[:, 0])
    if not ok.any():
        return False
    d = np.min(np.linalg.norm(out[ok][:, None, :] - cycle[None, :, :], axis=2), axis=1)
    return bool(np.any(d < tol))


def _edge(q0, i, sign, cycle, params, cfg, strides, tol, first, growth, limit, resolution):
    """Distance from ``q0`` along ``sign * e_i`` to the first non-converging point."""

    def ok(a):
        q = q0.copy()
        q[i] += sign * a
        return converges(q, cycle, params, cfg, strides, tol)

    lo, a = 0.0, first
    while a <= limit:
        if not ok(a):
            break
        lo, a = a, a * growth
    else:
        return limit
    hi = a
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def boa_interval(
    record: FixedPointRecord,
    coordinate_index: int,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    strides: int = 50,
    tol: float = 1e-4,
    first: float = 1e-3,
    growth: float = 1.25,
    limit: float = 20.0,
    resolution: float = 1e-5,
) -> tuple[float, float]:
    """Raw ``(a, b)``: the basin along one coordinate is ``[q_i - a, q_i + b]``.

    Each side is marched outward geometrically from ``first`` until the
    first point that does not converge, then refined by bisection.
    """
    if not record.stable:
        raise ValueError("basin scans need a stable fixed point")
    if coordinate_index not in (0, 1, 2):
        raise ValueError("coordinate_index must be 0, 1 or 2")
    q0 = record.q_star.as_array()
    args = (record.orbit, params, cfg, strides, tol, first, growth, limit, resolution)
    a = _edge(q0, coordinate_index, -1.0, *args)
    b = _edge(q0, coordinate_index, 1.0, *args)
    return a, b


def boa_scan(
    record: FixedPointRecord,
    coordinate_index: int,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    **kw,
) -> float:
    """Normalized basin extent along one section coordinate."""
    a, b = boa_interval(record, coordinate_index, params, cfg, **kw)
    return (a + b) * BOA_NORMALIZATION[coordinate_index]


def solve_ladder(
    guess,
    params: ModelParams,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    periods=PERIOD_LADDER,
    settle: int = 64,
    unsettled_periods=None,
) -> tuple[FixedPointRecord | None, list[FixedPointRecord]]:
    """Walk the period ladder from ``guess``.

    The guess is first rolled out for ``settle`` strides; if it survives, the
    reached point seeds every solve (an attractor is the natural seed for
    its own period). Otherwise Newton starts from the guess itself, over
    ``unsettled_periods`` if given (a cheaper ladder for speculative seeds).
    Returns ``(first stable record, every converged record)``; a period-``j``
    solve that lands on a shorter cycle is discarded.
    """
    found = []
    seed = _as_array(guess)
    if settle > 0:
        try:
            seed = orbit(seed, settle, params, cfg)[-1]
        except FallBeforeReturn:
            if unsettled_periods is not None:
                periods = unsettled_periods
    for j in periods:
        try:
            rec = find_fixed_point(seed, j, params, cfg)
        except (FallBeforeReturn, NoConvergence, JacobianUndefined):
            continue
        if minimal_period(rec) == j:
            found.append(rec)
            if rec.stable:
                return rec, found
    return None, found
