"""Piecewise initial field: U before gamma1, u1 on the band, u00 after gamma2."""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .profile import AFTER, BEFORE, INSIDE, OUTSIDE, ProfileError, invert_points

__all__ = ["Region", "RegionError", "PiecewiseField", "classify_region", "classify_regions", "eval_initial"]

SEAM = 1e-9


class Region(IntEnum):
    MINUS = -1
    ZERO = 0
    PLUS = 1


class RegionError(ValueError):
    pass


def classify_regions(bundle, x, seam=SEAM, return_lateral=False):
    """Region codes for many points.

    Points the bundle inversion cannot reach fall back on the implicit signs
    of the two surfaces. With ``return_lateral`` a mask is returned as well,
    marking those points and the ones whose trajectory parameter lies outside
    the surface domain (reached through the extrapolated parametrization).
    """
    x = np.asarray(x, dtype=float).reshape(-1, bundle.n)
    _, _, tags, in_dom = invert_points(bundle, x)
    out, lateral = _resolve(bundle, x, tags, seam)
    return (out, lateral | ~in_dom) if return_lateral else out


def _resolve(bundle, x, tags, seam=SEAM):
    g1 = bundle.gamma1.g(x)
    g2 = bundle.gamma2.g(x)
    out = np.empty(len(x), dtype=int)
    out[tags == BEFORE] = Region.MINUS
    out[tags == INSIDE] = Region.ZERO
    out[tags == AFTER] = Region.PLUS
    lateral = tags == OUTSIDE
    if lateral.any():
        minus = g1[lateral] < 0
        plus = g2[lateral] > 0
        if np.any(minus & plus):
            raise RegionError("configuration error: a point lies before gamma1 and after gamma2")
        out[lateral] = np.where(minus, Region.MINUS, np.where(plus, Region.PLUS, Region.ZERO))
    near = (np.abs(g1) <= seam) | (np.abs(g2) <= seam)
    out[near] = Region.ZERO
    return out, lateral


def classify_region(bundle, x):
    return Region(int(classify_regions(bundle, np.reshape(x, (1, -1)))[0]))


@dataclass(frozen=True, eq=False)
class PiecewiseField:
    """Evaluable initial condition; call with points of shape ``(..., n)``."""

    bundle: object

    @property
    def n(self):
        return self.bundle.n

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        flat = x.reshape(-1, self.n)
        b = self.bundle
        s, tau, tags, _ = invert_points(b, flat)
        region, _ = _resolve(b, flat, tags)
        out = np.where(region == Region.MINUS, b.U, b.u00).astype(float)
        mid = region == Region.ZERO
        if mid.any():
            if np.any(tags[mid] == OUTSIDE):
                bad = flat[mid][np.argmax(tags[mid] == OUTSIDE)]
                raise ProfileError(f"band point {bad.tolist()} not reached by the bundle")
            K = b.K(s[mid])
            t = np.clip(tau[mid], 0.0, (b.U - b.u00) / K)
            out[mid] = b.U - K * t
        return out.reshape(shape)

    @property
    def value_range(self):
        return min(self.bundle.U, self.bundle.u00), max(self.bundle.U, self.bundle.u00)


def eval_initial(field, x):
    return float(field(np.asarray(x, dtype=float)))
