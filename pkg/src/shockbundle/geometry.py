"""Hypersurfaces with parametric and implicit views.

Every surface maps parameters ``s`` of shape ``(..., n-1)`` to points of shape
``(..., n)`` and carries an implicit function ``g`` that is negative on the
"before" side. All evaluators are vectorized over leading axes.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "GeometryError",
    "Ray",
    "Surface",
    "Hyperplane",
    "Sphere",
    "Polyline",
    "uniform_grid",
    "surface_point",
    "ray_intersect",
    "ray_intersect_batch",
    "surface_normal",
    "min_separation",
    "param_rows",
]

_FD_STEP = 1e-6
_GRAD_FLOOR = 1e-9
_LAMBDA_FLOOR = 1e-12
_POS_TOL = 1e-10
_BRACKET_SAMPLES = 256


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if not np.linalg.norm(d) > 0:
            raise GeometryError("ray direction must be nonzero")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "direction", d)


def uniform_grid(domain, samples):
    """Uniform tensor grid over a parameter box, shape ``(N**k, k)``.

    ``domain`` has shape ``(k, 2)``; for ``k == 0`` a single empty sample is
    returned so zero-parameter surfaces (points in 1-D) still enumerate.
    """
    domain = np.asarray(domain, dtype=float).reshape(-1, 2)
    k = domain.shape[0]
    if k == 0:
        return np.zeros((1, 0))
    axes = [np.linspace(lo, hi, int(samples)) for lo, hi in domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


class Surface:
    """Base class; subclasses implement ``chi`` and ``g``."""

    n: int
    domain: np.ndarray

    def chi(self, s):
        raise NotImplementedError

    def g(self, x):
        raise NotImplementedError

    @property
    def param_dim(self):
        return self.n - 1

    def in_domain(self, s, tol=1e-12):
        s = np.asarray(s, dtype=float)
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return np.all((s >= lo - tol) & (s <= hi + tol), axis=-1)

    def grad(self, x, h=_FD_STEP):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            out[..., i] = (self.g(x + e) - self.g(x - e)) / (2 * h)
        return out

    def samples(self, count=65):
        return uniform_grid(self.domain, count)

    def validate(self, count=33):
        """Check implicit/parametric consistency and implicit nondegeneracy."""
        x = self.chi(self.samples(count))
        resid = float(np.max(np.abs(self.g(x))))
        if resid > 1e-9:
            raise GeometryError(f"parametric and implicit views disagree by {resid:g}")
        gmin = float(np.min(np.linalg.norm(self.grad(x), axis=-1)))
        if gmin < _GRAD_FLOOR:
            raise GeometryError(f"implicit gradient degenerate ({gmin:g})")
        return resid, gmin


@dataclass(frozen=True, eq=False)
class Hyperplane(Surface):
    """Plane ``point + sum_k s_k directions[k]``, ``g = <normal, x - point>``.

    In 1-D there are no spanning directions and the surface is a single point.
    """

    point: np.ndarray
    directions: np.ndarray
    normal: np.ndarray
    domain: np.ndarray = None

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).ravel()
        n = p.size
        dirs = np.asarray(self.directions, dtype=float).reshape(-1, n)
        if dirs.shape[0] != n - 1:
            raise GeometryError(f"hyperplane in R^{n} needs {n - 1} directions")
        nrm = np.asarray(self.normal, dtype=float).ravel()
        if nrm.size != n or not np.linalg.norm(nrm) > 0:
            raise GeometryError("hyperplane normal must be a nonzero n-vector")
        if n > 1 and np.max(np.abs(dirs @ nrm)) > 1e-12 * np.linalg.norm(nrm):
            raise GeometryError("spanning directions must be orthogonal to the normal")
        dom = self.domain
        dom = np.tile([-1.0, 1.0], (n - 1, 1)) if dom is None else dom
        dom = np.asarray(dom, dtype=float).reshape(n - 1, 2)
        for name, val in (("point", p), ("directions", dirs), ("normal", nrm), ("domain", dom)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.point.size

    def chi(self, s):
        s = np.asarray(s, dtype=float)
        return self.point + s @ self.directions

    def g(self, x):
        return (np.asarray(x, dtype=float) - self.point) @ self.normal

    def ray_closed_form(self, origin, direction):
        """Plane-line parameter, or ``None`` when parallel."""
        den = float(np.dot(direction, self.normal))
        if den == 0.0:
            return None
        return -float(self.g(origin)) / den


@dataclass(frozen=True, eq=False)
class Sphere(Surface):
    """Circle (n=2, angle ``s``) or sphere (n=3, polar/azimuth ``s``).

    ``g = |x - center|^2 - radius^2``; ``flip`` negates it so the outside is
    the "before" side.
    """

    center: np.ndarray
    radius: float
    domain: np.ndarray = None
    flip: bool = False

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        if c.size not in (2, 3):
            raise GeometryError("sphere family supports n = 2 or 3")
        if not self.radius > 0:
            raise GeometryError("radius must be positive")
        dom = self.domain
        if dom is None:
            dom = [[0.0, 2 * np.pi]] if c.size == 2 else [[0.0, np.pi], [0.0, 2 * np.pi]]
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "domain", np.asarray(dom, dtype=float).reshape(c.size - 1, 2))

    @property
    def n(self):
        return self.center.size

    def chi(self, s):
        s = np.asarray(s, dtype=float)
        r = self.radius
        if self.n == 2:
            th = s[..., 0]
            pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        else:
            th, ph = s[..., 0], s[..., 1]
            pts = np.stack(
                [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
            )
        return self.center + r * pts

    def g(self, x):
        d = np.asarray(x, dtype=float) - self.center
        val = np.sum(d * d, axis=-1) - self.radius**2
        return -val if self.flip else val


@dataclass(frozen=True, eq=False)
class Polyline(Surface):
    """Planar curve tabulated as ``s -> x`` rows, linearly interpolated.

    The implicit view is the signed distance to the polyline, positive on
    the left of increasing ``s`` (negated by ``flip``).
    """

    s_values: np.ndarray
    points: np.ndarray
    flip: bool = False
    domain: np.ndarray = field(default=None)

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=float).ravel()
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (s.size, 2) or s.size < 2:
            raise GeometryError("polyline needs >= 2 rows of (s, x1, x2)")
        if np.any(np.diff(s) <= 0):
            raise GeometryError("polyline parameter must be strictly increasing")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0):
            raise GeometryError("consecutive polyline points must be distinct")
        object.__setattr__(self, "s_values", s)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "domain", np.array([[s[0], s[-1]]]))

    n = 2

    def chi(self, s):
        s = np.asarray(s, dtype=float)[..., 0]
        x1 = np.interp(s, self.s_values, self.points[:, 0])
        x2 = np.interp(s, self.s_values, self.points[:, 1])
        return np.stack([x1, x2], axis=-1)

    def g(self, x):
        x = np.asarray(x, dtype=float)
        a = self.points[:-1]
        seg = self.points[1:] - a
        rel = x[..., None, :] - a
        lam = np.clip(np.sum(rel * seg, axis=-1) / np.sum(seg * seg, axis=-1), 0.0, 1.0)
        diff = rel - lam[..., None] * seg
        dist = np.linalg.norm(diff, axis=-1)
        k = np.argmin(dist, axis=-1)
        dmin = np.take_along_axis(dist, k[..., None], axis=-1)[..., 0]
        cross = seg[k, 0] * np.take_along_axis(rel[..., 1], k[..., None], -1)[..., 0] - seg[
            k, 1
        ] * np.take_along_axis(rel[..., 0], k[..., None], -1)[..., 0]
        val = np.where(cross >= 0, dmin, -dmin)
        return -val if self.flip else val


def param_rows(s, k):
    """Reshape parameters to ``(m, k)``; with ``k = 0`` an empty input is one row."""
    s = np.asarray(s, dtype=float)
    if k:
        return s.reshape(-1, k)
    if s.ndim >= 2 and s.shape[-1] == 0:
        return s.reshape(int(np.prod(s.shape[:-1])), 0)
    return np.zeros((1, 0))


def surface_point(surface, s):
    """Return ``chi(s)``; ``s`` must lie in the parameter box."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.size != surface.param_dim:
        raise GeometryError(f"expected {surface.param_dim} parameters, got {s.size}")
    if not surface.in_domain(s):
        raise GeometryError(f"parameter {s} outside domain {surface.domain.tolist()}")
    return surface.chi(s)


def ray_intersect_batch(surface, origins, directions, lam_max=100.0, samples=_BRACKET_SAMPLES):
    """First forward crossing for many rays at once.

    Returns an array of ``lambda`` values with ``nan`` where a ray has no
    sign change of ``g`` on ``(0, lam_max]``.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    directions = np.broadcast_to(np.asarray(directions, dtype=float), origins.shape)
    m = origins.shape[0]
    lam = np.linspace(0.0, lam_max, samples + 1)
    out = np.full(m, np.nan)
    k = np.full(m, -1)
    # scan the samples in blocks so rays that cross early stop being evaluated
    prev = np.sign(surface.g(origins))
    first = np.sign(surface.g(origins + lam[1] * directions))
    prev = np.where(prev == 0, first, prev)
    todo = np.arange(m)
    block = 16
    for j0 in range(1, samples + 1, block):
        if todo.size == 0:
            break
        lj = lam[j0 : j0 + block]
        gv = surface.g(origins[todo, None, :] + lj[None, :, None] * directions[todo, None, :])
        sg = np.sign(gv)
        left = np.concatenate([prev[todo, None], sg[:, :-1]], axis=1)
        change = (left * sg < 0) | (sg == 0)
        hit = change.any(axis=1)
        k[todo[hit]] = j0 - 1 + np.argmax(change[hit], axis=1)
        prev[todo] = sg[:, -1]
        todo = todo[~hit]
    has = k >= 0
    if not has.any():
        return out
    idx = np.nonzero(has)[0]
    a = lam[k[idx]].copy()
    b = lam[k[idx] + 1].copy()
    o, d = origins[idx], directions[idx]
    ga = surface.g(o + a[:, None] * d)
    gb = surface.g(o + b[:, None] * d)
    # bisection to the position tolerance, then one interpolation step inside
    # the final bracket (exact for planar surfaces)
    for _ in range(200):
        if np.all(b - a <= _POS_TOL * np.maximum(1.0, b)):
            break
        mid = 0.5 * (a + b)
        gm = surface.g(o + mid[:, None] * d)
        left = np.sign(gm) == np.sign(ga)
        np.copyto(a, mid, where=left)
        np.copyto(ga, gm, where=left)
        np.copyto(b, mid, where=~left)
        np.copyto(gb, gm, where=~left)
    with np.errstate(all="ignore"):
        interp = a - ga * (b - a) / (gb - ga)
    interp = np.where(np.isfinite(interp), np.clip(interp, a, b), a)
    gi = surface.g(o + interp[:, None] * d)
    root = np.where(np.abs(ga) <= np.abs(gb), a, b)
    groot = np.minimum(np.abs(ga), np.abs(gb))
    root = np.where(np.abs(gi) <= groot, interp, root)
    root = np.where(root <= _LAMBDA_FLOOR, np.nan, root)
    out[idx] = root
    return out


def ray_intersect(surface, ray, lam_max=100.0):
    """Smallest ``lambda > 0`` with ``g(origin + lambda * direction) = 0``, or ``None``."""
    lam = ray_intersect_batch(surface, ray.origin[None, :], ray.direction[None, :], lam_max)[0]
    return None if np.isnan(lam) else float(lam)


def surface_normal(surface, x):
    """Unit normal at ``x`` pointing from the ``g < 0`` side to ``g > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(surface.g(x)) > 1e-8):
        raise GeometryError("point is not on the surface")
    grad = surface.grad(x)
    norm = np.linalg.norm(grad, axis=-1, keepdims=True)
    if np.any(norm < _GRAD_FLOOR):
        raise GeometryError("degenerate surface normal")
    return grad / norm


def min_separation(surf1, surf2, count=65):
    """Smallest sampled distance between two surfaces."""
    a = surf1.chi(surf1.samples(count))
    b = surf2.chi(surf2.samples(count))
    dist, _ = cKDTree(b).query(a)
    return float(np.min(dist))
