"""Batched Newton iteration for small square systems with multi-start.

Residuals are row-indexed: ``func(z, rows)`` evaluates the residual of the
problems ``rows`` at the unknowns ``z`` (shape ``(len(rows), k)``).
"""

import numpy as np

TOL = 1e-10
MAXITER = 50
FD_STEP = 1e-7


def fd_jacobian(func, z, rows, h=FD_STEP):
    m, k = z.shape
    jac = np.empty((m, k, k))
    for j in range(k):
        e = np.zeros(k)
        e[j] = h
        jac[:, :, j] = (func(z + e, rows) - func(z - e, rows)) / (2 * h)
    return jac


def _solve(jac, r):
    det = np.linalg.det(jac)
    good = np.isfinite(det) & (np.abs(det) > 1e-300) & np.all(np.isfinite(r), axis=-1)
    dz = np.full(r.shape, np.nan)
    if good.any():
        dz[good] = np.linalg.solve(jac[good], r[good][..., None])[..., 0]
    return dz


def newton(func, z0, rows=None, tol=TOL, maxiter=MAXITER, h=FD_STEP):
    """Solve ``func(z, rows) = 0``; returns ``(z, converged)``.

    Converged rows get one polishing step, kept only if it lowers the
    residual, so results sit at roundoff rather than at ``tol``.
    """
    z = np.array(z0, dtype=float, copy=True)
    m = z.shape[0]
    rows = np.arange(m) if rows is None else np.asarray(rows)
    conv = np.zeros(m, dtype=bool)
    active = np.ones(m, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(maxiter + 1):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            r = func(z[idx], rows[idx])
            rn = np.linalg.norm(r, axis=-1)
            bad = ~np.isfinite(rn)
            ok = (rn <= tol) & ~bad
            conv[idx[ok]] = True
            active[idx[ok | bad]] = False
            go = ~(ok | bad)
            if not go.any():
                break
            gi = idx[go]
            jac = fd_jacobian(func, z[gi], rows[gi], h)
            z[gi] = z[gi] - _solve(jac, r[go])
        z[~conv] = np.nan
        idx = np.nonzero(conv)[0]
        if idx.size:
            zi = z[idx]
            r0 = func(zi, rows[idx])
            cand = zi - _solve(fd_jacobian(func, zi, rows[idx], h), r0)
            r1 = func(cand, rows[idx])
            better = np.linalg.norm(r1, axis=-1) < np.linalg.norm(r0, axis=-1)
            z[idx[better]] = cand[better]
    return z, conv


def multistart(func, seeds, **kw):
    """Run :func:`newton` from each seed array in turn on the still-failed rows."""
    seeds = list(seeds)
    z, conv = newton(func, seeds[0], **kw)
    for seed in seeds[1:]:
        todo = np.nonzero(~conv)[0]
        if todo.size == 0:
            break
        zt, ct = newton(func, seed[todo], rows=todo, **kw)
        z[todo[ct]] = zt[ct]
        conv[todo[ct]] = True
    return z, conv
