"""First-order Rusanov finite-volume reference solver on 1-D and 2-D grids.

Interface flux per axis::

    F = (f(uL) + f(uR)) / 2 - alpha (uR - uL) / 2,   alpha = max(|f'(uL)|, |f'(uR)|)

with a single unsplit forward-Euler stage and ``dt = cfl * min_i h_i / max|f_i'|``.
"""

from dataclasses import dataclass, replace

import numpy as np

from .characteristics import FrontPolyline, polyline_normals

__all__ = [
    "FvmError",
    "FvmState",
    "init_grid",
    "step",
    "run_to",
    "extract_front",
    "l1_distance",
    "cell_centers",
]

SUBSAMPLES = 3
DEFAULT_CFL = 0.4
SHARPNESS = 0.2


class FvmError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FvmState:
    u: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    flux: object
    t: float = 0.0
    bc: str = "outflow"
    u_range: tuple = None
    steps: int = 0
    max_mass_defect: float = 0.0

    @property
    def ndim(self):
        return self.u.ndim

    @property
    def h(self):
        return (self.hi - self.lo) / np.array(self.u.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def mass(self):
        return float(np.sum(self.u)) * self.cell_volume


def cell_centers(lo, hi, shape):
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    axes = [lo[i] + (np.arange(m) + 0.5) * (hi[i] - lo[i]) / m for i, m in enumerate(shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1)


def init_grid(window, resolution, field, flux, bc="outflow", subsamples=SUBSAMPLES):
    """Cell averages of ``field`` by ``subsamples``-per-axis midpoint sampling."""
    lo, hi = (np.asarray(w, dtype=float).reshape(-1) for w in window)
    nd = lo.size
    if nd not in (1, 2):
        raise FvmError("the oracle supports 1-D and 2-D grids")
    if not np.all(hi > lo):
        raise FvmError("empty window")
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (nd,))
    if np.any(res < 8):
        raise FvmError("need at least 8 cells per axis")
    if bc not in ("outflow", "periodic"):
        raise FvmError(f"unknown boundary condition {bc!r}")
    h = (hi - lo) / res
    offs = (np.arange(subsamples) + 0.5) / subsamples - 0.5
    centers = cell_centers(lo, hi, res)
    grids = np.meshgrid(*([offs] * nd), indexing="ij")
    sub = np.stack([g.ravel() for g in grids], axis=-1) * h
    pts = centers[..., None, :] + sub
    try:
        vals = np.asarray(field(pts.reshape(-1, nd)), dtype=float)
    except Exception as exc:
        raise FvmError(f"field evaluation failed: {exc}") from exc
    u = vals.reshape(tuple(res) + (len(sub),)).mean(axis=-1)
    if not np.all(np.isfinite(u)):
        raise FvmError("initial field has non-finite values")
    return FvmState(u, lo, hi, flux, 0.0, bc, (float(u.min()), float(u.max())))


def _padded(u, axis, bc):
    if bc == "periodic":
        return np.concatenate([np.take(u, [-1], axis), u, np.take(u, [0], axis)], axis=axis)
    return np.concatenate([np.take(u, [0], axis), u, np.take(u, [-1], axis)], axis=axis)


def _interface_flux(flux, i, ul, ur):
    fl = flux.component(i, ul, 0, check=False)
    fr = flux.component(i, ur, 0, check=False)
    alpha = np.maximum(np.abs(flux.component(i, ul, 1, check=False)), np.abs(flux.component(i, ur, 1, check=False)))
    return 0.5 * (fl + fr) - 0.5 * alpha * (ur - ul)


def stable_dt(state, cfl=DEFAULT_CFL):
    dts = []
    for i in range(state.ndim):
        speed = float(np.max(np.abs(state.flux.component(i, state.u, 1, check=False))))
        dts.append(np.inf if speed == 0 else cfl * state.h[i] / speed)
    return min(dts)


def step(state, cfl=DEFAULT_CFL, dt=None):
    """One conservative update; returns a new state.

    Raises :class:`FvmError` on non-finite values, a mass-accounting defect
    above ``1e-12 * cells`` or a violated discrete maximum principle.
    """
    dt_max = stable_dt(state, cfl)
    dt = dt_max if dt is None else min(dt, dt_max)
    if not np.isfinite(dt):
        # flux speeds all zero: any step leaves the state unchanged
        dt = 0.0 if dt is None else dt
    u = state.u
    du = np.zeros_like(u)
    boundary = 0.0
    h = state.h
    for i in range(state.ndim):
        up = _padded(u, i, state.bc)
        ul = np.take(up, np.arange(up.shape[i] - 1), axis=i)
        ur = np.take(up, np.arange(1, up.shape[i]), axis=i)
        F = _interface_flux(state.flux, i, ul, ur)
        hi_face = np.take(F, np.arange(1, F.shape[i]), axis=i)
        lo_face = np.take(F, np.arange(F.shape[i] - 1), axis=i)
        du -= (dt / h[i]) * (hi_face - lo_face)
        if state.bc == "outflow":
            face_area = state.cell_volume / h[i]
            out = np.sum(np.take(F, [-1], axis=i)) - np.sum(np.take(F, [0], axis=i))
            boundary += dt * face_area * out
    new = u + du
    if not np.all(np.isfinite(new)):
        raise FvmError(f"non-finite values at t = {state.t + dt} after {state.steps} steps")
    vol = state.cell_volume
    defect = abs((np.sum(new) - np.sum(u)) * vol + boundary)
    if defect > 1e-12 * u.size:
        raise FvmError(f"mass accounting defect {defect:g} exceeds {1e-12 * u.size:g}")
    lo_r, hi_r = state.u_range
    slack = 1e-12 * max(1.0, hi_r - lo_r)
    if new.min() < lo_r - slack or new.max() > hi_r + slack:
        raise FvmError(f"maximum principle violated: [{new.min()}, {new.max()}] vs [{lo_r}, {hi_r}]")
    return replace(
        state, u=new, t=state.t + dt, steps=state.steps + 1,
        max_mass_defect=max(state.max_mass_defect, defect),
    )


def run_to(state, t_target, cfl=DEFAULT_CFL):
    """Step until ``t_target``, truncating the last step to land on it exactly."""
    if t_target < state.t:
        raise FvmError("target time precedes the current time")
    while state.t < t_target:
        remaining = t_target - state.t
        dt = stable_dt(state, cfl)
        if remaining <= dt:
            state = replace(step(state, cfl, remaining), t=float(t_target))
            break
        state = step(state, cfl)
    return state


def _row_crossings(u, x, level, jump):
    """Level crossings of ``u`` along the last axis, one per row at most.

    A crossing is kept only when the transition is sharp: some adjacent
    difference within two cells carries at least ``SHARPNESS * jump``.
    """
    d = u - level
    sgn = np.sign(d)
    change = sgn[:, :-1] * sgn[:, 1:] < 0
    rows, pos = [], []
    du = np.abs(np.diff(u, axis=1))
    for r in np.nonzero(change.any(axis=1))[0]:
        j = int(np.argmax(change[r]))
        lo, hi = max(0, j - 2), min(du.shape[1], j + 3)
        if du[r, lo:hi].max() < SHARPNESS * jump:
            continue
        w = d[r, j] / (d[r, j] - d[r, j + 1])
        rows.append(r)
        pos.append(x[j] + w * (x[j + 1] - x[j]))
    return np.array(rows, dtype=int), np.array(pos)


def extract_front(state, U=None, u00=None, margin=0):
    """Locate the discrete shock ``u = (U + u00) / 2`` as an ordered polyline.

    Rows and columns are both scanned; crossings closer than ``margin`` cells
    to the window edge are dropped. Normals point from the ``U`` side.
    """
    lo_r, hi_r = state.u_range
    U = hi_r if U is None else U
    u00 = lo_r if u00 is None else u00
    jump = abs(U - u00)
    level = 0.5 * (U + u00)
    shape = state.u.shape
    centers = [state.lo[i] + (np.arange(shape[i]) + 0.5) * state.h[i] for i in range(state.ndim)]
    if state.ndim == 1:
        rows, pos = _row_crossings(state.u[None, :], centers[0], level, jump)
        if rows.size == 0:
            raise FvmError("no admissible front: no sharp level crossing")
        pts = np.array([[pos[0]]])
        orient = np.array([1.0 if abs(state.u[0] - U) <= abs(state.u[-1] - U) else -1.0])
        return FrontPolyline(pts, polyline_normals(pts, orient), U, u00, state.t)
    found = []
    r1, p1 = _row_crossings(state.u, centers[1], level, jump)  # along x2, fixed x1
    found += [(centers[0][r], p) for r, p in zip(r1, p1)]
    r2, p2 = _row_crossings(state.u.T, centers[0], level, jump)  # along x1, fixed x2
    found += [(p, centers[1][r]) for r, p in zip(r2, p2)]
    if not found:
        raise FvmError("no admissible front: no sharp level crossing")
    pts = np.array(found)
    keep = np.ones(len(pts), dtype=bool)
    if margin:
        m = margin * state.h
        keep = np.all((pts >= state.lo + m) & (pts <= state.hi - m), axis=1)
    pts = pts[keep]
    if len(pts) < 2:
        raise FvmError("no admissible front inside the margin")
    centre = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centre)
    order = np.argsort((pts - centre) @ vt[0])
    pts = pts[order]
    dist = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    pts = pts[np.concatenate([[True], dist > 1e-12])]
    # U side: sample the field a few cells to either side of the front centre
    normal_guess = vt[1]
    return FrontPolyline(pts, polyline_normals(pts, _u_side_orient(state, centre, normal_guess, U, u00)), U, u00, state.t)


def _u_side_orient(state, centre, nvec, U, u00):
    off = 5 * float(np.max(state.h))
    idx = lambda p: tuple(np.clip(((p - state.lo) / state.h).astype(int), 0, np.array(state.u.shape) - 1))  # noqa: E731
    a = state.u[idx(centre + off * nvec)]
    b = state.u[idx(centre - off * nvec)]
    # the normal points away from the U side
    return nvec if abs(b - U) < abs(a - U) else -nvec


def l1_distance(state, reference):
    """``sum |u - reference(center)| * cell volume``."""
    centers = cell_centers(state.lo, state.hi, state.u.shape)
    ref = np.asarray(reference(centers.reshape(-1, state.ndim)), dtype=float).reshape(state.u.shape)
    return float(np.sum(np.abs(state.u - ref)) * state.cell_volume)
