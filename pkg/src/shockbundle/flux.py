"""Vector flux models f(u) = (f_1(u), ..., f_n(u)) with analytic derivatives."""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "FluxModel",
    "FluxError",
    "quadratic",
    "exponential",
    "polynomial",
    "eval_flux",
    "check_nondegenerate",
]

KINDS = ("quadratic", "polynomial", "exponential")
NONDEGENERACY_FLOOR = 1e-12


class FluxError(ValueError):
    """Bad flux description or evaluation outside the working interval."""


@dataclass(frozen=True)
class FluxModel:
    """Closed-form flux.

    ``coeffs`` holds one entry per component: the scalar ``a_i`` for the
    quadratic (``a_i u^2 / 2``) and exponential (``a_i e^u``) kinds, or the
    ascending coefficient tuple of ``f_i`` for the polynomial kind.
    """

    kind: str
    coeffs: tuple
    interval: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FluxError(f"unknown flux kind {self.kind!r}")
        if len(self.coeffs) == 0:
            raise FluxError("flux needs at least one component")
        lo, hi = self.interval
        if not lo < hi:
            raise FluxError(f"empty working interval {self.interval}")

    @property
    def n(self):
        return len(self.coeffs)

    def with_interval(self, lo, hi):
        return FluxModel(self.kind, self.coeffs, (float(lo), float(hi)))

    def _check(self, u):
        lo, hi = self.interval
        umin, umax = np.min(u), np.max(u)
        if umin < lo or umax > hi:
            raise FluxError(
                f"state range [{umin}, {umax}] outside working interval [{lo}, {hi}]"
            )

    def component(self, i, u, order=0, check=True):
        """``order``-th derivative of f_i at ``u`` (any array shape)."""
        u = np.asarray(u, dtype=float)
        if check:
            self._check(u)
        c = self.coeffs[i]
        if self.kind == "quadratic":
            if order == 0:
                return 0.5 * c * u * u
            if order == 1:
                return c * u
            return np.full_like(u, float(c)) if order == 2 else np.zeros_like(u)
        if self.kind == "exponential":
            return c * np.exp(u)
        coefs = np.asarray(c, dtype=float)
        if order:
            coefs = P.polyder(coefs, order) if coefs.size > order else np.zeros(1)
        return P.polyval(u, coefs)

    def __call__(self, u, order=0, check=True):
        """Stack of all components; result has shape ``u.shape + (n,)``."""
        u = np.asarray(u, dtype=float)
        if check:
            self._check(u)
        return np.stack(
            [self.component(i, u, order, check=False) for i in range(self.n)], axis=-1
        )


def quadratic(*a, interval=(-np.inf, np.inf)):
    return FluxModel("quadratic", tuple(float(x) for x in a), interval)


def exponential(*a, interval=(-np.inf, np.inf)):
    return FluxModel("exponential", tuple(float(x) for x in a), interval)


def polynomial(*coeff_lists, interval=(-np.inf, np.inf)):
    return FluxModel(
        "polynomial", tuple(tuple(float(c) for c in cl) for cl in coeff_lists), interval
    )


def eval_flux(model, u, order=0):
    """Return ``(f_1^(order)(u), ..., f_n^(order)(u))`` for a scalar state."""
    if order not in (0, 1, 2):
        raise FluxError(f"derivative order must be 0, 1 or 2, got {order}")
    return model(float(u), order)


def check_nondegenerate(model, interval, samples=64, floor=NONDEGENERACY_FLOOR):
    """Return ``(flag, min_norm)`` for ``|f''(u)|`` sampled on ``interval``."""
    lo, hi = interval
    if not lo < hi or samples < 2:
        raise ValueError("need u_min < u_max and at least two samples")
    u = np.linspace(lo, hi, int(samples))
    norms = np.linalg.norm(model(u, 2, check=False), axis=-1)
    min_norm = float(norms.min())
    return bool(np.all(norms > floor)), min_norm
