"""Decay of an absolutely nonstable step into a rarefaction fan.

For ``t > 0`` the fan value ``v`` at ``x`` solves ``x = chi0(s) + t f'(v)``
with ``v`` between the two states; outside the wedge bounded by
``gamma0 + t f'(U)`` and ``gamma0 + t f'(u00)`` the constant states persist.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _newton
from .geometry import Hyperplane, param_rows
from .stability import Classification, StabilityError, StepField, check_transversality, classify_jump

__all__ = ["DecayError", "FanSolution", "build_fan", "fan_values", "eval_fan", "fan_injective", "fan_regions"]

BEHIND, FAN, AHEAD = -1, 0, 1
_V_SAMPLES = 17


class DecayError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FanSolution:
    gamma0: object
    flux: object
    U: float
    u00: float
    t_bar: float
    t_cap: float
    t_leave: float = np.inf
    s_samples: np.ndarray = None

    @property
    def n(self):
        return self.flux.n

    @property
    def planar(self):
        return isinstance(self.gamma0, Hyperplane)

    @property
    def states(self):
        return min(self.U, self.u00), max(self.U, self.u00)

    def initial_step(self):
        return StepField(self.gamma0, self.U, self.u00)


def _image_curves(gamma0, flux, s, v, t):
    """Fan-map images, shape ``(len(s), len(v), n)``."""
    return gamma0.chi(s)[:, None, :] + t * flux(v, 1, check=False)[None, :, :]


def _segments_cross(curves):
    """Do polylines from different rows of ``curves`` (shape ``(m, p, 2)``) intersect?"""
    a = curves[:, :-1].reshape(-1, 2)
    b = curves[:, 1:].reshape(-1, 2)
    owner = np.repeat(np.arange(curves.shape[0]), curves.shape[1] - 1)
    i, j = np.triu_indices(len(a), 1)
    keep = owner[i] != owner[j]
    i, j = i[keep], j[keep]

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    o1 = orient(a[i], b[i], a[j])
    o2 = orient(a[i], b[i], b[j])
    o3 = orient(a[j], b[j], a[i])
    o4 = orient(a[j], b[j], b[i])
    return bool(np.any((o1 * o2 < 0) & (o3 * o4 < 0)))


def fan_injective(gamma0, flux, U, u00, t, s, v_samples=_V_SAMPLES):
    """Sampled injectivity of the fan map at time ``t``.

    Distinct samples must map more than 1e-9 apart; in 2-D the image curves
    of distinct surface parameters must also not cross.
    """
    v = np.linspace(min(U, u00), max(U, u00), v_samples)
    curves = _image_curves(gamma0, flux, s, v, t)
    pts = curves.reshape(-1, flux.n)
    if cKDTree(pts).query_pairs(1e-9):
        return False
    if flux.n == 2 and len(s) > 1:
        return not _segments_cross(curves)
    return True


def _leave_time(gamma0, flux, U, u00, s, window, t_hi):
    """First time all sampled fan points lie outside ``window`` (capped at ``t_hi``)."""
    if window is None:
        return np.inf
    lo, hi = np.asarray(window, dtype=float)
    v = np.linspace(min(U, u00), max(U, u00), _V_SAMPLES)

    def inside(t):
        pts = _image_curves(gamma0, flux, s, v, t).reshape(-1, flux.n)
        return bool(np.any(np.all((pts >= lo) & (pts <= hi), axis=1)))

    if inside(t_hi):
        return np.inf
    a, b = 0.0, t_hi
    while b - a > 1e-6:
        m = 0.5 * (a + b)
        a, b = (m, b) if inside(m) else (a, m)
    return b


def build_fan(gamma0, flux, U, u00, s_grid=33, window=None, t_cap=None):
    """Check the decay hypotheses on sampled points of ``gamma0`` and build the fan.

    The step carries ``U`` on the ``g < 0`` side. ``t_bar`` is the injectivity
    horizon of the sampled fan map found by bisection to 1e-6; it is ``inf``
    when the map is still injective at ``t_cap``.
    """
    U, u00 = float(U), float(u00)
    if U == u00:
        raise DecayError("states equal: nothing to decay")
    if np.ndim(s_grid) == 0:
        s = gamma0.samples(int(s_grid))
    else:
        s = param_rows(s_grid, gamma0.param_dim)
    trans = check_transversality(flux, gamma0, U, u00, s)
    if not np.all(trans):
        raise DecayError(f"hypotheses fail: {int((~trans).sum())} surface samples are not transversal")
    step = StepField(gamma0, U, u00)
    for x in gamma0.chi(s):
        try:
            verdict = classify_jump(step, flux, x, U, u00)
        except StabilityError as exc:
            raise DecayError(f"hypotheses fail: {exc}") from None
        if verdict.classification is not Classification.ABSOLUTELY_NONSTABLE:
            raise DecayError(
                f"hypotheses fail: jump at {x.tolist()} is {verdict.classification.value}, "
                "not absolutely nonstable"
            )
    if t_cap is None:
        t_cap = 10.0
    t_leave = _leave_time(gamma0, flux, U, u00, s, window, t_cap)
    if fan_injective(gamma0, flux, U, u00, t_cap, s):
        t_bar = np.inf
    else:
        a, b = 0.0, t_cap
        while b - a > 1e-6:
            m = 0.5 * (a + b)
            a, b = (m, b) if fan_injective(gamma0, flux, U, u00, m, s) else (a, m)
        t_bar = a
    return FanSolution(gamma0, flux, U, u00, t_bar, float(t_cap), t_leave, s)


def fan_regions(fan, x, t):
    """``BEHIND`` / ``FAN`` / ``AHEAD`` codes from the advected bounding surfaces."""
    x = np.asarray(x, dtype=float).reshape(-1, fan.n)
    f = fan.flux
    behind = fan.gamma0.g(x - t * f(fan.U, 1, check=False)) < 0
    ahead = fan.gamma0.g(x - t * f(fan.u00, 1, check=False)) > 0
    return np.where(behind, BEHIND, np.where(ahead, AHEAD, FAN))


def _planar_values(fan, x, t):
    """Solve ``<x - p, n> = t <f'(v), n>`` for ``v`` by bisection."""
    nrm = fan.gamma0.normal / np.linalg.norm(fan.gamma0.normal)
    dist = (x - fan.gamma0.point) @ nrm
    lo_s, hi_s = fan.states
    phi = lambda v: t * (fan.flux(v, 1, check=False) @ nrm)  # noqa: E731
    a = np.full(len(x), lo_s)
    b = np.full(len(x), hi_s)
    fa = phi(a) - dist
    for _ in range(100):
        m = 0.5 * (a + b)
        fm = phi(m) - dist
        same = np.sign(fm) == np.sign(fa)
        a, fa = np.where(same, m, a), np.where(same, fm, fa)
        b = np.where(same, b, m)
        if np.all(b - a <= 4e-16 * np.maximum(1.0, np.abs(b))):
            break
    return 0.5 * (a + b)


def _newton_values(fan, x, t):
    k = fan.gamma0.param_dim
    s_tab = fan.s_samples
    v_tab = np.linspace(*fan.states, _V_SAMPLES)
    imgs = _image_curves(fan.gamma0, fan.flux, s_tab, v_tab, t).reshape(-1, fan.n)
    params = np.concatenate(
        [np.repeat(s_tab, len(v_tab), axis=0), np.tile(v_tab, len(s_tab))[:, None]], axis=1
    )
    _, nearest = cKDTree(imgs).query(x)
    z0 = params[nearest]
    dv = v_tab[1] - v_tab[0]
    seeds = [z0]
    for sgn in (0.5, -0.5, 1.0, -1.0):
        z = z0.copy()
        z[:, k] += sgn * dv
        seeds.append(z)

    def resid(z, rows):
        return fan.gamma0.chi(z[:, :k]) + t * fan.flux(z[:, k], 1, check=False) - x[rows]

    z, conv = _newton.multistart(resid, seeds)
    v = z[:, k]
    lo_s, hi_s = fan.states
    ok = conv & (v >= lo_s - 1e-12) & (v <= hi_s + 1e-12)
    if not np.all(ok):
        bad = x[np.argmax(~ok)]
        raise DecayError(f"fan inversion did not converge inside the wedge at {bad.tolist()} (t = {t})")
    return np.clip(v, lo_s, hi_s)


def fan_values(fan, x, t, method="auto"):
    """Fan solution at many points; ``method`` is ``auto``, ``planar`` or ``newton``."""
    if not t > 0:
        raise DecayError("fan evaluation needs t > 0")
    if t > fan.t_bar:
        raise DecayError(f"t = {t} beyond the existence horizon {fan.t_bar}")
    x = np.asarray(x, dtype=float)
    shape = x.shape[:-1]
    flat = x.reshape(-1, fan.n)
    reg = fan_regions(fan, flat, t)
    out = np.where(reg == BEHIND, fan.U, fan.u00).astype(float)
    mid = reg == FAN
    if mid.any():
        if method == "auto":
            method = "planar" if fan.planar else "newton"
        if method == "planar":
            out[mid] = _planar_values(fan, flat[mid], t)
        else:
            out[mid] = _newton_values(fan, flat[mid], t)
    return out.reshape(shape)


def eval_fan(fan, x, t, method="auto"):
    return float(fan_values(fan, np.reshape(x, (1, -1)), t, method)[0])
