"""One-sided directional limits and jump classification."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import param_rows, surface_normal

__all__ = [
    "Classification",
    "JumpVerdict",
    "StabilityError",
    "StepField",
    "directional_limit",
    "classify_jump",
    "check_transversality",
]

JUMP_TOL = 1e-9
MIN_JUMP = 1e-6
DEFAULT_EPS = (1e-3, 1e-4, 1e-5, 1e-6)


class StabilityError(ValueError):
    pass


class Classification(Enum):
    STABLE = "Stable"
    ABSOLUTELY_NONSTABLE = "AbsolutelyNonstable"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class JumpVerdict:
    classification: Classification
    difference: float
    u_plus: float
    u_minus: float
    converged: bool = True


@dataclass(frozen=True, eq=False)
class StepField:
    """``behind`` where ``g < 0``, ``ahead`` where ``g >= 0``, for a surface or
    plain implicit callable ``g``."""

    g: object
    behind: float
    ahead: float

    def __call__(self, x):
        g = self.g.g if hasattr(self.g, "g") else self.g
        val = np.asarray(g(np.asarray(x, dtype=float)))
        return np.where(val < 0, self.behind, self.ahead).astype(float)

    def swapped(self):
        return StepField(self.g, self.ahead, self.behind)


def directional_limit(field, xbar, v, orientation="toward", eps_sequence=DEFAULT_EPS, scale=1.0, return_flag=False):
    """One-sided limit of ``field`` at ``xbar`` along the line of ``v``.

    ``"toward"`` samples ``xbar + eps v/|v|`` (approach against ``v``),
    ``"away"`` samples ``xbar - eps v/|v|`` (approach along ``v``). The last
    value of the sequence is returned; the flag reports whether successive
    values agreed to 1e-8.
    """
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > 0:
        raise StabilityError("direction must be nonzero")
    sign = {"toward": 1.0, "away": -1.0}.get(orientation)
    if sign is None:
        raise StabilityError(f"orientation must be 'toward' or 'away', got {orientation!r}")
    eps = np.asarray(eps_sequence, dtype=float) * scale
    pts = np.asarray(xbar, dtype=float) + sign * eps[:, None] * (v / norm)
    try:
        vals = np.asarray(field(pts), dtype=float).reshape(-1)
    except Exception as exc:
        raise StabilityError(f"field evaluation failed near {np.asarray(xbar).tolist()}: {exc}") from exc
    finite = np.isfinite(vals)
    if not finite.any():
        raise StabilityError("field evaluation failed at every step")
    vals = vals[finite]
    converged = bool(np.all(np.abs(np.diff(vals)) < 1e-8)) if len(vals) > 1 else True
    value = float(vals[-1])
    return (value, converged) if return_flag else value


def classify_jump(field, flux, xbar, U, u00, tol=JUMP_TOL, **limit_kw):
    """Classify the jump of ``field`` at ``xbar``.

    ``u_plus`` is the limit along ``f''(u00)`` taken from ahead, ``u_minus``
    the limit along ``f''(U)`` taken from behind; the jump is stable when
    ``u_plus - u_minus < 0`` and absolutely nonstable when it is positive.
    """
    if U == u00:
        raise StabilityError("not a jump: states are equal")
    up, c1 = directional_limit(field, xbar, flux(u00, 2, check=False), "toward", return_flag=True, **limit_kw)
    um, c2 = directional_limit(field, xbar, flux(U, 2, check=False), "away", return_flag=True, **limit_kw)
    diff = up - um
    if abs(diff) <= MIN_JUMP:
        raise StabilityError(f"not a jump at {np.asarray(xbar).tolist()} (difference {diff:g})")
    if diff < -tol:
        cls = Classification.STABLE
    elif diff > tol:
        cls = Classification.ABSOLUTELY_NONSTABLE
    else:
        cls = Classification.INDETERMINATE
    return JumpVerdict(cls, diff, up, um, c1 and c2)


def check_transversality(flux, gamma0, U, u00, s_grid=33, rel_tol=1e-8):
    """Per sampled point of ``gamma0``: are f'(U), f'(u00), f''(U), f''(u00)
    all non-tangent to the surface?"""
    if np.ndim(s_grid) == 0:
        s = gamma0.samples(int(s_grid))
    else:
        s = param_rows(s_grid, gamma0.param_dim)
    x = gamma0.chi(s)
    nrm = surface_normal(gamma0, x)
    vecs = [flux(U, 1, check=False), flux(u00, 1, check=False), flux(U, 2, check=False), flux(u00, 2, check=False)]
    ok = np.ones(len(x), dtype=bool)
    for w in vecs:
        ok &= np.abs(nrm @ w) >= rel_tol * np.linalg.norm(w)
        if not np.linalg.norm(w) > 0:
            ok &= False
    return ok
