"""Overturning profile u1 on the band between two surfaces.

The bundle trajectories start on ``gamma1`` with state ``U`` and decrease
linearly in the bundle time ``tau`` with per-trajectory slope ``K(s)``:

    X(tau, s) = chi1(s) + (f'(U) - f'(U - K tau)) / K,    u1 = U - K tau.

They end on ``gamma2`` with state ``u00`` at ``tau0(s) = (U - u00) / K(s)``,
so the endpoint is ``chi1(s) + (f'(U) - f'(u00)) / K``: a straight ray from
``chi1(s)`` along the constant vector ``d = f'(U) - f'(u00)``. ``K(s)`` is
therefore one over the ray parameter at which that ray meets ``gamma2``.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from . import _newton
from .flux import check_nondegenerate
from .geometry import min_separation, param_rows, ray_intersect_batch

__all__ = [
    "ProfileError",
    "ProfileBundle",
    "Inversion",
    "build_bundle",
    "bundle_point",
    "bundle_points",
    "invert_point",
    "invert_points",
    "eval_u1",
    "u1_values",
    "transport_residual",
    "solve_u1_1d",
    "K_slope",
]

INSIDE, BEFORE, AFTER, OUTSIDE = 0, -1, 1, 2
TAG_NAMES = {INSIDE: "inside", BEFORE: "before", AFTER: "after", OUTSIDE: "outside"}
DEFAULT_S_SAMPLES = 65
RK4_STEPS = 1024
_TAU_TAB = 25
_SEAM = 1e-12


class ProfileError(ValueError):
    """The profile problem has no solution or a point is outside the band."""


@dataclass(frozen=True, eq=False)
class ProfileBundle:
    flux: object
    gamma1: object
    gamma2: object
    U: float
    u00: float
    s_samples: np.ndarray
    K_table: np.ndarray
    tau0_table: np.ndarray
    d: np.ndarray
    lam_max: float
    notes: tuple = ()
    _tree: object = field(default=None, repr=False)
    _tab: np.ndarray = field(default=None, repr=False)
    _kcache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.flux.n

    @property
    def k(self):
        return self.gamma1.param_dim

    def K(self, s):
        """K at arbitrary parameters by re-running the ray solve (``nan`` on a miss)."""
        s = np.asarray(s, dtype=float)
        key = (s.shape, hash(s.tobytes()))
        hit = self._kcache.get(key)
        if hit is not None and np.array_equal(hit[0], s):
            return hit[1]
        flat = param_rows(s, self.k)
        lam = ray_intersect_batch(self.gamma2, self.gamma1.chi(flat), self.d, self.lam_max)
        K = (1.0 / lam).reshape(s.shape[:-1])
        if len(self._kcache) >= 4:
            self._kcache.pop(next(iter(self._kcache)))
        self._kcache[key] = (s.copy(), K)
        return K

    def tau0(self, s):
        return (self.U - self.u00) / self.K(s)

    def X(self, tau, s, K=None):
        """Closed-form bundle trajectory; extrapolates past ``[0, tau0]``."""
        s = np.asarray(s, dtype=float)
        tau = np.asarray(tau, dtype=float)
        K = self.K(s) if K is None else np.asarray(K, dtype=float)
        f1U = self.flux(self.U, 1, check=False)
        f1 = self.flux(self.U - K * tau, 1, check=False)
        return self.gamma1.chi(s) + (f1U - f1) / K[..., None]

    @property
    def s_spacing(self):
        if self.k == 0:
            return np.zeros(0)
        dom = self.gamma1.domain
        count = round(len(self.s_samples) ** (1.0 / self.k))
        return (dom[:, 1] - dom[:, 0]) / max(count - 1, 1)


def build_bundle(flux, gamma1, gamma2, U, u00, s_grid=DEFAULT_S_SAMPLES, lam_max=None, window=None):
    """Solve the profile problem on a parameter grid.

    ``s_grid`` is a per-axis sample count or an explicit ``(m, n-1)`` array.
    ``lam_max`` defaults to ten times the window diagonal (or 100 without a
    window).
    """
    U, u00 = float(U), float(u00)
    if U == u00:
        raise ProfileError("states equal: U must differ from u00")
    if gamma1.n != flux.n or gamma2.n != flux.n:
        raise ProfileError("surface and flux dimensions differ")
    ok, min_norm = check_nondegenerate(flux, (min(U, u00), max(U, u00)), 64)
    if not ok:
        raise ProfileError(f"degenerate flux: min |f''| = {min_norm:g}")
    if np.isscalar(s_grid) or np.ndim(s_grid) == 0:
        s = gamma1.samples(int(s_grid))
    else:
        s = param_rows(s_grid, gamma1.param_dim)
    if flux.n > 1 and min_separation(gamma1, gamma2) <= 1e-6:
        raise ProfileError("gamma1 and gamma2 intersect (sampled distance <= 1e-6)")
    if lam_max is None:
        if window is not None:
            lo, hi = np.asarray(window, dtype=float)
            lam_max = 10.0 * float(np.linalg.norm(hi - lo))
        else:
            lam_max = 100.0
    notes = []
    if U < u00:
        notes.append("U < u00: forward motion from gamma1 to gamma2 needs K > 0 and U > u00")
    d = flux(U, 1, check=False) - flux(u00, 1, check=False)
    lam = ray_intersect_batch(gamma2, gamma1.chi(s), d, lam_max)
    miss = np.isnan(lam)
    if miss.any():
        raise ProfileError(
            f"ray misses gamma2 for {int(miss.sum())} of {len(s)} samples "
            f"(first s = {s[np.argmax(miss)].tolist()}); the profile problem has no solution"
        )
    K = 1.0 / lam
    tau0 = (U - u00) * lam
    if np.any(tau0 <= 0):
        raise ProfileError(
            "K <= 0: motion along the trajectories must go from gamma1 to gamma2 "
            "with increasing tau (requires U > u00 for a forward hit)"
        )
    bundle = ProfileBundle(flux, gamma1, gamma2, U, u00, s, K, tau0, d, float(lam_max), tuple(notes))
    endpoint = bundle.X(tau0, s, K)
    gap = float(np.max(np.abs(gamma2.g(endpoint))))
    if gap > 1e-9:
        raise ProfileError(f"bundle endpoints miss gamma2 by {gap:g}")
    # seed table for inversion: trajectories extrapolated to [-tau0, 2 tau0]
    frac = np.linspace(-1.0, 2.0, _TAU_TAB)
    taus = tau0[:, None] * frac[None, :]
    ss = np.repeat(s[:, None, :], _TAU_TAB, axis=1)
    pts = bundle.X(taus, ss, np.repeat(K[:, None], _TAU_TAB, axis=1))
    tab = np.concatenate([ss, taus[..., None]], axis=-1).reshape(-1, s.shape[1] + 1)
    object.__setattr__(bundle, "_tab", tab)
    object.__setattr__(bundle, "_tree", cKDTree(pts.reshape(-1, flux.n)))
    return bundle


def _check_s(bundle, s):
    if not np.all(bundle.gamma1.in_domain(s)):
        raise ProfileError(f"parameter outside domain {bundle.gamma1.domain.tolist()}")


def _rk4(bundle, s, tau, K):
    """Integrate dX/dtau = f''(u1), du1/dtau = -K with steps <= tau0 / 1024."""
    tau0 = (bundle.U - bundle.u00) / K
    nsteps = np.maximum(1, np.ceil(tau / (tau0 / RK4_STEPS) - 1e-9)).astype(int)
    h = tau / nsteps
    x = bundle.gamma1.chi(s).astype(float)
    u = np.full(tau.shape, bundle.U)
    f2 = lambda v: bundle.flux(v, 2, check=False)  # noqa: E731
    for k in range(int(nsteps.max())):
        act = k < nsteps
        hk = np.where(act, h, 0.0)
        k1x, k1u = f2(u), -K
        k2x, k2u = f2(u + 0.5 * hk * k1u), -K
        k3x, k3u = f2(u + 0.5 * hk * k2u), -K
        k4x, k4u = f2(u + hk * k3u), -K
        x = x + (hk / 6.0)[:, None] * (k1x + 2 * k2x + 2 * k3x + k4x)
        u = u + (hk / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
    return x, u


def K_slope(bundle, rel_h=1e-6):
    """Largest centered-difference ``|dK/ds_j|`` over the s-grid and parameter axes.

    Reported only: the smoothness of ``K`` across trajectories is not enforced.
    """
    if bundle.k == 0:
        return 0.0
    s = bundle.s_samples
    dom = bundle.gamma1.domain
    worst = 0.0
    for j in range(bundle.k):
        h = rel_h * (dom[j, 1] - dom[j, 0])
        e = np.zeros(bundle.k)
        e[j] = h
        lo = np.maximum(s - e, dom[:, 0])
        hi = np.minimum(s + e, dom[:, 1])
        dK = (bundle.K(hi) - bundle.K(lo)) / (hi[:, j] - lo[:, j])
        worst = max(worst, float(np.nanmax(np.abs(dK))))
    return worst


def bundle_points(bundle, s, tau, method="closed_form"):
    """Vectorized :func:`bundle_point` over rows of ``s`` and entries of ``tau``."""
    s = param_rows(s, bundle.k)
    tau = np.asarray(tau, dtype=float).reshape(-1)
    _check_s(bundle, s)
    K = bundle.K(s)
    tau0 = (bundle.U - bundle.u00) / K
    if np.any(tau < -_SEAM) or np.any(tau > tau0 + _SEAM * np.maximum(1, tau0)):
        raise ProfileError("tau outside [0, tau0(s)]")
    if method == "closed_form":
        return bundle.X(tau, s, K), bundle.U - K * tau
    if method == "ode":
        return _rk4(bundle, s, tau, K)
    raise ValueError(f"unknown method {method!r}")


def bundle_point(bundle, s, tau, method="closed_form"):
    """Point ``X(tau, s)`` and value ``u1`` along one bundle trajectory."""
    x, u = bundle_points(bundle, np.reshape(s, (1, bundle.k)), [tau], method)
    return x[0], float(u[0])


class Inversion(NamedTuple):
    s: np.ndarray
    tau: float
    tag: str
    in_domain: bool = True


def _seeds(bundle, x):
    _, nearest = bundle._tree.query(x)
    z0 = bundle._tab[nearest]
    dtau = 3.0 * (bundle.U - bundle.u00) / bundle.K_table.max() / (_TAU_TAB - 1)
    seeds = [z0]
    ds = bundle.s_spacing
    k = bundle.k
    if k:
        for sign in (1, -1):
            z = z0.copy()
            z[:, 0] += sign * 0.5 * ds[0]
            seeds.append(z)
    for sign in (1, -1):
        z = z0.copy()
        z[:, k] += sign * 0.5 * dtau
        seeds.append(z)
    while len(seeds) < 5:
        z = z0.copy()
        z[:, k] += (len(seeds) - 2) * dtau
        seeds.append(z)
    return seeds


def invert_points(bundle, x):
    """Batch inversion of ``x -> (s, tau)``.

    Returns ``(s, tau, tags, in_domain)``; tags use the module codes
    ``INSIDE``, ``BEFORE``, ``AFTER``, ``OUTSIDE``.
    """
    x = np.asarray(x, dtype=float).reshape(-1, bundle.n)
    k = bundle.k

    def resid(z, rows):
        return bundle.X(z[:, k], z[:, :k]) - x[rows]

    z, conv = _newton.multistart(resid, _seeds(bundle, x))
    s, tau = z[:, :k], z[:, k]
    tags = np.full(len(x), OUTSIDE)
    if conv.any():
        tau0 = bundle.tau0(s[conv])
        t = tau[conv]
        tg = np.where(t < -_SEAM, BEFORE, np.where(t > tau0 + _SEAM, AFTER, INSIDE))
        tags[conv] = tg
    in_dom = np.zeros(len(x), dtype=bool)
    in_dom[conv] = bundle.gamma1.in_domain(s[conv])
    return s, tau, tags, in_dom


def invert_point(bundle, x):
    s, tau, tags, in_dom = invert_points(bundle, np.reshape(x, (1, -1)))
    return Inversion(s[0], float(tau[0]), TAG_NAMES[int(tags[0])], bool(in_dom[0]))


def u1_values(bundle, x, seam=1e-9):
    """u1 at many points; points within ``seam`` of either surface count as inside."""
    x = np.asarray(x, dtype=float).reshape(-1, bundle.n)
    s, tau, tags, _ = invert_points(bundle, x)
    near = (np.abs(bundle.gamma1.g(x)) <= seam) | (np.abs(bundle.gamma2.g(x)) <= seam)
    good = (tags == INSIDE) | ((tags != OUTSIDE) & near)
    if not np.all(good):
        bad = x[np.argmax(~good)]
        raise ProfileError(f"point {bad.tolist()} is not in the bundle region")
    K = bundle.K(s)
    tau = np.clip(tau, 0.0, (bundle.U - bundle.u00) / K)
    return bundle.U - K * tau


def eval_u1(bundle, x):
    return float(u1_values(bundle, x)[0])


def transport_residual(bundle, x, h=1e-4):
    """``sum_i f_i''(u1) du1/dx_i + K`` at ``x`` with centered differences."""
    x = np.asarray(x, dtype=float).reshape(bundle.n)
    offs = np.vstack([np.zeros(bundle.n), h * np.eye(bundle.n), -h * np.eye(bundle.n)])
    try:
        vals = u1_values(bundle, x + offs)
    except ProfileError as exc:
        raise ProfileError(f"stencil leaves the bundle region: {exc}") from None
    grad = (vals[1 : bundle.n + 1] - vals[bundle.n + 1 :]) / (2 * h)
    inv = invert_point(bundle, x)
    K = float(bundle.K(inv.s[None, :])[0])
    return float(bundle.flux(vals[0], 2, check=False) @ grad + K)


def solve_u1_1d(flux1d, K, b, x, interval=None, tol=1e-12, maxiter=100):
    """Solve ``f'(u) = -K x + b`` for a one-component flux."""
    if flux1d.n != 1:
        raise ProfileError("solve_u1_1d needs a one-component flux")
    if not K > 0:
        raise ProfileError("K must be positive")
    target = -K * float(x) + b
    fp = lambda u: float(flux1d.component(0, u, 1, check=False))  # noqa: E731
    fpp = lambda u: float(flux1d.component(0, u, 2, check=False))  # noqa: E731
    lo, hi = interval if interval is not None else flux1d.interval
    if not (np.isfinite(lo) and np.isfinite(hi)):
        # expand a bracket; f' is monotone when f'' keeps one sign
        lo, hi = -1.0, 1.0
        for _ in range(60):
            if (fp(lo) - target) * (fp(hi) - target) <= 0:
                break
            lo, hi = 2 * lo, 2 * hi
    ok, _ = check_nondegenerate(flux1d, (lo, hi), 64)
    if not ok:
        raise ProfileError("degenerate f'' on the working interval")
    flo, fhi = fp(lo) - target, fp(hi) - target
    if flo * fhi > 0:
        raise ProfileError(f"target {target} outside the range of f' on [{lo}, {hi}]")
    u = 0.5 * (lo + hi)
    for _ in range(maxiter):
        r = fp(u) - target
        if abs(r) <= tol:
            return u
        u = u - r / fpp(u)
        if not lo <= u <= hi:
            break
    a, b_ = lo, hi
    for _ in range(200):
        m = 0.5 * (a + b_)
        r = fp(m) - target
        if abs(r) <= tol or b_ - a < 1e-15:
            return m
        if (r < 0) == (flo < 0):
            a = m
        else:
            b_ = m
    return 0.5 * (a + b_)
