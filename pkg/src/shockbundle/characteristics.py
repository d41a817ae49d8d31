"""Characteristic evolution, breaking, focusing and shock-front propagation."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _newton
from .geometry import param_rows
from .initial_data import Region, classify_regions
from .profile import ProfileError

__all__ = [
    "CharState",
    "FrontPolyline",
    "FrontError",
    "advect",
    "jacobian",
    "breaking_time",
    "focus_point",
    "separation",
    "focus_envelope",
    "polyline_normals",
    "shock_speed",
    "propagate_front",
    "characteristic_solution",
]


class FrontError(ValueError):
    pass


@dataclass(frozen=True)
class CharState:
    """A characteristic launched from ``x0`` carrying the constant state ``u0``."""

    x0: np.ndarray
    u0: float
    t: float = 0.0

    def position(self, flux):
        return advect(flux, self.x0, self.u0, self.t)


def advect(flux, x0, u0, t):
    """``x0 + t f'(u0)``; broadcasts over leading axes."""
    return np.asarray(x0, dtype=float) + np.asarray(t, dtype=float)[..., None] * flux(u0, 1, check=False)


def jacobian(flux, field, x0, t, h=1e-4):
    """Return ``(J_formula, J_fd)`` for the advection map at ``x0``.

    ``J_formula = 1 + t sum_i f_i''(u0) du0/dx0_i``; ``J_fd`` is the determinant
    of the centered difference quotient of ``x0 -> x0 + t f'(u0(x0))``. The
    stencil must stay inside one region of the piecewise field.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = x0.size
    stencil = np.vstack([x0, x0 + h * np.eye(n), x0 - h * np.eye(n)])
    bundle = getattr(field, "bundle", None)
    if bundle is not None:
        reg = classify_regions(bundle, stencil)
        if np.any(reg != reg[0]):
            raise ProfileError("Jacobian stencil straddles a region seam")
    u = field(stencil)
    grad = (u[1 : n + 1] - u[n + 1 :]) / (2 * h)
    j_formula = 1.0 + t * float(flux(u[0], 2, check=False) @ grad)
    img = stencil + t * flux(u, 1, check=False)
    dq = (img[1 : n + 1] - img[n + 1 :]).T / (2 * h)
    return j_formula, float(np.linalg.det(dq))


def _s_rows(bundle, s):
    return param_rows(s, bundle.k)


def breaking_time(bundle, s):
    """``1 / K(s)``: the time the characteristics of one trajectory meet."""
    K = bundle.K(_s_rows(bundle, s))
    return float(1.0 / K[0]) if K.size == 1 else 1.0 / K


def focus_point(bundle, s):
    """``chi1(s) + f'(U) / K(s)``."""
    s = _s_rows(bundle, s)
    x = bundle.gamma1.chi(s) + bundle.flux(bundle.U, 1, check=False) / bundle.K(s)[:, None]
    return x[0] if len(x) == 1 else x


def separation(bundle, s, t):
    """Return ``(measured, formula)`` for the distance between the characteristics
    launched from both ends of one bundle trajectory."""
    s = _s_rows(bundle, s)
    K = bundle.K(s)[0]
    f = bundle.flux
    start = bundle.gamma1.chi(s)[0]
    end = bundle.X((bundle.U - bundle.u00) / K, s[0], K)
    measured = advect(f, start, bundle.U, t) - advect(f, end, bundle.u00, t)
    formula = bundle.d / K * (K * t - 1.0)
    return measured, formula


@dataclass(frozen=True, eq=False)
class FrontPolyline:
    points: np.ndarray
    normals: np.ndarray
    U: float
    u00: float
    t: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        nrm = np.asarray(self.normals, dtype=float)
        if pts.ndim != 2 or nrm.shape != pts.shape:
            raise FrontError("points and normals must both have shape (m, n)")
        if len(pts) > 1 and np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0):
            raise FrontError("consecutive front points must be distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "normals", nrm)


def polyline_normals(points, orient):
    """Unit normals of an ordered polyline, signed so ``<normal, orient> > 0``.

    In 1-D the front is a single point and the normal is ``sign(orient)``.
    """
    pts = np.asarray(points, dtype=float)
    orient = np.asarray(orient, dtype=float)
    n = pts.shape[1]
    if n == 1:
        return np.full_like(pts, 1.0 if orient[0] >= 0 else -1.0)
    if n != 2:
        raise FrontError("polyline fronts are supported in 1-D and 2-D only")
    if len(pts) < 2:
        raise FrontError("a 2-D front needs at least two points")
    tan = np.gradient(pts, axis=0)
    nrm = np.stack([tan[:, 1], -tan[:, 0]], axis=-1)
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    sign = np.where(nrm @ orient < 0, -1.0, 1.0)
    return nrm * sign[:, None]


def shock_speed(flux, U, u00, normals):
    """Normal speed ``<F(U) - F(u00), n> / (U - u00)`` per normal."""
    jump = flux(U, 0, check=False) - flux(u00, 0, check=False)
    return np.asarray(normals) @ jump / (U - u00)


def focus_envelope(bundle):
    """The focus points ``x*(s)`` over the s-grid, as a front at ``max_s t0(s)``."""
    pts = np.atleast_2d(focus_point(bundle, bundle.s_samples))
    t0 = float(np.max(1.0 / bundle.K_table))
    return FrontPolyline(pts, polyline_normals(pts, bundle.d), bundle.U, bundle.u00, t0)


def propagate_front(front, flux, t_target, dt=1e-3):
    """Move every front point along its normal with the jump-condition speed.

    Explicit Euler; the step is capped at a quarter of the shortest segment
    over the fastest speed, and the last step is truncated onto ``t_target``.
    """
    if t_target < front.t:
        raise FrontError("target time precedes the front time stamp")
    if dt <= 0:
        raise FrontError("dt must be positive")
    pts = front.points.copy()
    nrm = front.normals.copy()
    n = pts.shape[1]
    if n == 2 and len(pts) < 2:
        raise FrontError("degenerate polyline")
    t = front.t
    while t_target - t > 1e-14 * max(1.0, abs(t_target)):
        if n == 2:
            nrm = polyline_normals(pts, nrm.mean(axis=0))
        sigma = shock_speed(flux, front.U, front.u00, nrm)
        step = min(dt, t_target - t)
        smax = float(np.max(np.abs(sigma)))
        if n == 2 and smax > 0:
            seg = float(np.min(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
            step = min(step, 0.25 * seg / smax)
        pts = pts + step * sigma[:, None] * nrm
        t += step
    if n == 2:
        nrm = polyline_normals(pts, nrm.mean(axis=0))
    return FrontPolyline(pts, nrm, front.U, front.u00, t_target)


def characteristic_solution(bundle, x, t):
    """Classical solution of the initial-value problem before breaking.

    Each point is traced back along the characteristic through it: the
    constant states are tried first, then the bundle family via Newton on
    ``(s, tau) -> X(tau, s) + t f'(U - K tau)``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    flat = x.reshape(-1, bundle.n)
    f = bundle.flux
    out = np.full(len(flat), np.nan)
    back_u = flat - t * f(bundle.U, 1, check=False)
    minus = classify_regions(bundle, back_u) == Region.MINUS
    out[minus] = bundle.U
    rest = np.nonzero(~minus)[0]
    if rest.size:
        back_0 = flat[rest] - t * f(bundle.u00, 1, check=False)
        plus = classify_regions(bundle, back_0) == Region.PLUS
        out[rest[plus]] = bundle.u00
        rest = rest[~plus]
    if rest.size == 0:
        return out.reshape(shape)
    k = bundle.k
    tab = bundle._tab
    S, T = tab[:, :k], tab[:, k]
    Kt = bundle.K(S)
    sel = (T >= 0) & (T <= (bundle.U - bundle.u00) / Kt)
    S, T, Kt = S[sel], T[sel], Kt[sel]
    pts = bundle.X(T, S, Kt) + t * f(bundle.U - Kt * T, 1, check=False)
    _, nearest = cKDTree(pts).query(flat[rest])
    z0 = np.concatenate([S, T[:, None]], axis=1)[nearest]
    target = flat[rest]

    def resid(z, rows):
        s, tau = z[:, :k], z[:, k]
        K = bundle.K(s)
        return bundle.X(tau, s, K) + t * f(bundle.U - K * tau, 1, check=False) - target[rows]

    dtau = (bundle.U - bundle.u00) / bundle.K_table.max() / 24
    seeds = [z0]
    for sgn in (1, -1):
        z = z0.copy()
        z[:, k] += sgn * 0.5 * dtau
        seeds.append(z)
    z, conv = _newton.multistart(resid, seeds)
    if not np.all(conv):
        raise ProfileError("characteristic trace-back failed (after breaking?)")
    K = bundle.K(z[:, :k])
    tau = z[:, k]
    tau0 = (bundle.U - bundle.u00) / K
    if np.any(tau < -1e-9) or np.any(tau > tau0 + 1e-9):
        raise ProfileError("trace-back left the bundle band")
    out[rest] = bundle.U - K * np.clip(tau, 0.0, tau0)
    return out.reshape(shape)
