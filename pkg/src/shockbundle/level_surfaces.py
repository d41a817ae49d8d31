"""Arrival-time functions psi_1, psi_2 of the constant-state characteristic
families leaving gamma1 (state U) and gamma2 (state u00)."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _newton

__all__ = [
    "LevelSurface",
    "LevelSurfaceError",
    "level_surface",
    "eval_psi",
    "eval_psi_batch",
    "psi_gap",
    "gap_formula_projected",
    "gap_formula_normal",
]

_PSI_SAMPLES = 33


class LevelSurfaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LevelSurface:
    """Anchor surface advected for time ``t`` with a fixed carried state."""

    anchor: object
    state: float
    t: float
    flux: object

    def points(self, s):
        s = np.asarray(s, dtype=float)
        return self.anchor.chi(s) + self.t * self.flux(self.state, 1, check=False)


def level_surface(bundle, which, t):
    anchor, state = _anchor(bundle, which)
    return LevelSurface(anchor, state, float(t), bundle.flux)


def _anchor(bundle, which):
    if which == 1:
        return bundle.gamma1, bundle.U
    if which == 2:
        return bundle.gamma2, bundle.u00
    raise LevelSurfaceError("which must be 1 or 2")


def eval_psi_batch(bundle, x, which, psi_max=None):
    """``psi`` with ``x = chi(s) + psi f'(c)``; ``nan`` where Newton fails."""
    x = np.asarray(x, dtype=float).reshape(-1, bundle.n)
    surf, c = _anchor(bundle, which)
    v = bundle.flux(c, 1, check=False)
    k = surf.param_dim
    if psi_max is None:
        psi_max = bundle.lam_max / 10.0 / max(np.linalg.norm(v), 1e-12)
    s_tab = surf.samples(17 if k else 1)
    p_tab = np.linspace(-psi_max, psi_max, _PSI_SAMPLES)
    S = np.repeat(s_tab, len(p_tab), axis=0)
    Ps = np.tile(p_tab, len(s_tab))
    tree = cKDTree(surf.chi(S) + Ps[:, None] * v)
    _, nearest = tree.query(x)
    z0 = np.concatenate([S, Ps[:, None]], axis=1)[nearest]
    dpsi = p_tab[1] - p_tab[0]
    seeds = [z0]
    for sgn in (0.5, -0.5, 1.0, -1.0):
        z = z0.copy()
        z[:, k] += sgn * dpsi
        seeds.append(z)

    def resid(z, rows):
        return surf.chi(z[:, :k]) + z[:, k : k + 1] * v - x[rows]

    z, conv = _newton.multistart(resid, seeds)
    psi = z[:, k]
    psi[~conv] = np.nan
    return psi


def eval_psi(bundle, x, which):
    """Arrival time at ``x`` from the anchor surface, or ``None``."""
    psi = eval_psi_batch(bundle, np.reshape(x, (1, -1)), which)[0]
    return None if np.isnan(psi) else float(psi)


def gap_formula_projected(bundle, K, t):
    """``(K t - 1) K^-1 <f'(U), d> / |f'(U)|^2``: the gap projected on ``f'(U)``."""
    fU = bundle.flux(bundle.U, 1, check=False)
    return (K * t - 1.0) / K * float(fU @ bundle.d) / float(fU @ fU)


def gap_formula_normal(bundle, K, t, normal):
    """``(K t - 1) K^-1 <d, n> / <f'(u00), n>``.

    Exact for parallel planar surfaces with normal ``n``: measure the gap
    along the normal instead of along ``f'(U)``.
    """
    f0 = bundle.flux(bundle.u00, 1, check=False)
    normal = np.asarray(normal, dtype=float)
    return (K * t - 1.0) / K * float(bundle.d @ normal) / float(f0 @ normal)


def psi_gap(bundle, s, t):
    """Return ``(measured, formula)`` for ``psi_2 - psi_1`` on the level surface
    of gamma1 at time ``t``, launched from ``chi1(s)``."""
    s = np.asarray(s, dtype=float).reshape(1, bundle.k)
    K = float(bundle.K(s)[0])
    x = bundle.gamma1.chi(s)[0] + t * bundle.flux(bundle.U, 1, check=False)
    psi2 = eval_psi(bundle, x, 2)
    if psi2 is None:
        raise LevelSurfaceError(f"psi_2 has no solution at {x.tolist()}")
    psi1 = eval_psi(bundle, x, 1)
    if psi1 is None:
        psi1 = float(t)
    return psi2 - psi1, gap_formula_projected(bundle, K, t)
