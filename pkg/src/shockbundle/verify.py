"""Invariant suite behind the ``verify`` command.

Every check is a pure function of the scenario and its declared seed, so
reruns produce identical tables.
"""

from dataclasses import dataclass

import numpy as np

from .characteristics import advect, jacobian, separation
from .decay import DecayError, build_fan, fan_values
from .geometry import Hyperplane, surface_normal
from .initial_data import PiecewiseField
from .level_surfaces import gap_formula_normal, psi_gap
from .profile import bundle_points, transport_residual
from .stability import Classification

__all__ = ["Check", "run_checks"]


@dataclass(frozen=True)
class Check:
    name: str
    value: str
    tolerance: str
    passed: bool
    detail: str = ""


def _f(v):
    return f"{float(v):.6g}"


def _check(name, value, tol, detail=""):
    return Check(name, _f(value), _f(tol), bool(value <= tol), detail)


def _random_params(bundle, rng, count, lo=0.0, hi=1.0):
    """Random ``(s, tau)`` with ``s`` in the surface domain and ``tau`` in
    ``[lo, hi] * tau0(s)``."""
    dom = bundle.gamma1.domain
    u = rng.random((count, bundle.k))
    s = dom[:, 0] + u * (dom[:, 1] - dom[:, 0])
    frac = lo + (hi - lo) * rng.random(count)
    return s, frac * bundle.tau0(s)


def bundle_checks(run, rng):
    b = run.bundle()
    out = []
    K = b.K_table
    out.append(Check("bundle.K_positive", _f(K.min()), "0", bool(np.all(np.isfinite(K)) and K.min() > 0)))
    end = b.X(b.tau0_table, b.s_samples, K)
    out.append(_check("bundle.endpoints_on_gamma2", np.max(np.abs(b.gamma2.g(end))), 1e-9))

    s, tau = _random_params(b, rng, 100)
    xc, _ = bundle_points(b, s, tau, "closed_form")
    xo, _ = bundle_points(b, s, tau, "ode")
    out.append(_check("bundle.closed_form_vs_rk4", np.max(np.abs(xc - xo)), 1e-8))

    s, tau = _random_params(b, rng, 20, 0.2, 0.8)
    x, _ = bundle_points(b, s, tau)
    res = max(abs(transport_residual(b, p)) for p in x)
    out.append(_check("profile.transport_residual", res, 1e-7))
    return out


def jacobian_checks(run, rng):
    b = run.bundle()
    field = PiecewiseField(b)
    s, tau = _random_params(b, rng, 50, 0.1, 0.9)
    x0, _ = bundle_points(b, s, tau)
    worst = 0.0
    for t in (0.0, 0.5 * run.t_break):
        for p in x0:
            jl, jf = jacobian(b.flux, field, p, t)
            worst = max(worst, abs(jl - jf))
    out = [_check("jacobian.formula_vs_fd", worst, 1e-6)]
    t0 = 1.0 / b.K(s)
    zero = max(abs(jacobian(b.flux, field, p, t)[0]) for p, t in zip(x0, t0))
    out.append(_check("jacobian.zero_at_breaking", zero, 1e-8))
    mid = 0.0
    for p, t in zip(x0, t0):
        j0 = jacobian(b.flux, field, p, 0.0)[0]
        j1 = jacobian(b.flux, field, p, t)[0]
        jm = jacobian(b.flux, field, p, 0.5 * t)[0]
        mid = max(mid, abs(jm - 0.5 * (j0 + j1)))
    out.append(_check("jacobian.affine_midpoint", mid, 1e-12))
    return out


def focus_checks(run, rng):
    b = run.bundle()
    dom = b.gamma1.domain
    count = 10
    if b.k:
        s = dom[:, 0] + (np.arange(count)[:, None] + 0.5) / count * (dom[:, 1] - dom[:, 0])
    else:
        s = np.zeros((1, 0))
    worst = 0.0
    fU = b.flux(b.U, 1, check=False)
    for si in s:
        K = float(b.K(si[None, :])[0])
        tau = np.linspace(0.0, (b.U - b.u00) / K, 20)
        x0 = b.X(tau, np.repeat(si[None, :], 20, axis=0), np.full(20, K))
        land = advect(b.flux, x0, b.U - K * tau, np.full(20, 1.0 / K))
        xstar = b.gamma1.chi(si) + fU / K
        worst = max(worst, float(np.max(np.abs(land - xstar))))
    out = [_check("focus.landing_point", worst, 1e-8)]
    s_r, _ = _random_params(b, rng, 100)
    t_r = 2.0 * run.t_formed * rng.random(100)
    sep = 0.0
    for si, t in zip(s_r, t_r):
        meas, formula = separation(b, si, t)
        sep = max(sep, float(np.max(np.abs(meas - formula))))
    out.append(_check("focus.separation_identity", sep, 1e-10))
    return out


def psi_checks(run):
    b = run.bundle()
    s = np.zeros(b.k) if b.k == 0 else 0.5 * (b.gamma1.domain[:, 0] + b.gamma1.domain[:, 1])
    t0 = 1.0 / float(b.K(s[None, :])[0])
    times = [0.0, 0.5 * t0, t0, 1.5 * t0, 2.0 * t0]
    gaps = [psi_gap(b, s, t) for t in times]
    proj = max(abs(m - f) for m, f in gaps)
    out = [_check("psi.gap_projected_formula", proj, 1e-7, "(projected on f'(U); see report flags)")]
    at_break = max(abs(gaps[2][0]), abs(gaps[2][1]))
    out.append(_check("psi.gap_vanishes_at_breaking", at_break, 1e-7))
    g1, g2 = b.gamma1, b.gamma2
    if isinstance(g1, Hyperplane) and isinstance(g2, Hyperplane):
        nrm = g2.normal / np.linalg.norm(g2.normal)
        K = 1.0 / t0
        worst = max(abs(m - gap_formula_normal(b, K, t, nrm)) for (m, _), t in zip(gaps, times))
        out.append(_check("psi.gap_normal_formula", worst, 1e-7))
    return out


def fvm_checks(run):
    sc = run.scenario
    t = 0.5 * run.t_break
    from .commands import front_check, l1_table

    table = l1_table(run, t, sc.convergence)
    ratios = [a[2] / b[2] for a, b in zip(table[:-1], table[1:])]
    ok = all(1.5 <= r <= 2.5 for r in ratios)
    out = [
        Check(
            "fvm.convergence_ratio",
            ";".join(_f(r) for r in ratios),
            "[1.5, 2.5]",
            ok,
            "L1 " + ";".join(_f(e) for _, _, e in table),
        )
    ]
    tf = 1.5 * run.t_formed
    dist, h = front_check(run, tf, sc.front_resolution)
    out.append(
        Check(
            "fvm.front_vs_envelope_cells",
            _f(dist.max() / h),
            "2",
            bool(dist.max() <= 2 * h),
            f"({len(dist)} points at t = {tf:g})",
        )
    )
    return out


def stability_checks(run):
    from .commands import stability_verdicts

    _, verdicts = stability_verdicts(run)
    orig = [v for _, k, v in verdicts if k == "original"]
    swap = [v for _, k, v in verdicts if k == "swapped"]
    dmax = max(v.difference for v in orig)
    out = [
        Check(
            "stability.formed_shock_stable",
            _f(dmax),
            "< 0",
            all(v.classification is Classification.STABLE for v in orig),
        ),
        Check(
            "stability.reversed_absolutely_nonstable",
            _f(min(v.difference for v in swap)),
            "> 0",
            all(v.classification is Classification.ABSOLUTELY_NONSTABLE for v in swap),
        ),
    ]
    exact = all(a.difference == -b.difference for a, b in zip(orig, swap))
    out.append(Check("stability.swap_exact", str(exact), "True", exact))
    return out


def decay_checks(run):
    from .commands import _decay_setup, fan_l1

    sc = run.scenario
    dc, fan = _decay_setup(run)
    g0, flux = fan.gamma0, fan.flux
    out = []
    try:
        build_fan(g0, flux, fan.u00, fan.U, dc["s_samples"])
        refused = False
    except DecayError:
        refused = True
    out.append(Check("decay.refuses_stable_orientation", str(refused), "True", refused))

    s = fan.s_samples
    base = g0.chi(s)
    nrm = surface_normal(g0, base)
    lo_s, hi_s = fan.states
    # t -> 0+: the step, off the surface
    pts = np.concatenate([base + d * nrm for d in (-0.5, -0.1, 0.1, 0.5)])
    step = fan.initial_step()(pts)
    worst = float(np.max(np.abs(fan_values(fan, pts, 1e-6) - step)))
    out.append(_check("decay.initial_limit", worst, 1e-6))

    t = min(dc["times"])
    fU, f0 = flux(fan.U, 1, check=False), flux(fan.u00, 1, check=False)
    eta = 1e-9
    inner1 = base + t * fU + eta * nrm
    inner2 = base + t * f0 - eta * nrm
    cont = max(
        float(np.max(np.abs(fan_values(fan, inner1, t) - fan.U))),
        float(np.max(np.abs(fan_values(fan, inner2, t) - fan.u00))),
    )
    out.append(_check("decay.boundary_continuity", cont, 1e-6))

    lo_w, hi_w = dc["window"]
    grid = np.stack(np.meshgrid(*[np.linspace(a, b, 41) for a, b in zip(lo_w, hi_w)], indexing="ij"), -1)
    vals = fan_values(fan, grid.reshape(-1, fan.n), t)
    spill = max(float(lo_s - vals.min()), float(vals.max() - hi_s), 0.0)
    out.append(_check("decay.value_range", spill, 0.0))

    if fan.planar:
        vv = np.linspace(lo_s, hi_s, 7)[1:-1]
        n1 = nrm[0]
        worst = 0.0
        for v in vv:
            dist = t * float(flux(v, 1, check=False) @ n1)
            a = fan_values(fan, base + dist * n1, t)
            b = fan_values(fan, base + 2 * dist * n1, 2 * t)
            worst = max(worst, float(np.max(np.abs(a - b))))
        out.append(_check("decay.self_similarity", worst, 1e-8))

    # reverse check: fan data at t1 carried by characteristics to t2
    t1, t2 = 0.5 * t, t
    vv = np.linspace(lo_s, hi_s, 9)
    x1 = (base[:, None, :] + t1 * flux(vv, 1, check=False)[None]).reshape(-1, fan.n)
    u1 = fan_values(fan, x1, t1)
    x2 = advect(flux, x1, u1, np.full(len(x1), t2 - t1))
    rev = float(np.max(np.abs(fan_values(fan, x2, t2) - u1)))
    out.append(_check("decay.reverse_check", rev, 1e-7))

    res = dc["resolution"]
    state, h, err = fan_l1(fan, dc["window"], res, t, sc.cfl)
    run._record(f"fan {res}", state)
    out.append(Check("decay.fvm_l1_within_4h", _f(err), _f(4 * h), bool(err <= 4 * h), f"(h = {h:g})"))
    return out


def conservation_checks(run):
    worst = 0.0
    for _, cells, _, defect, _ in run.fvm_runs:
        worst = max(worst, defect / (1e-12 * cells))
    return [
        Check(
            "fvm.mass_and_max_principle",
            _f(worst),
            "1",
            bool(worst <= 1.0),
            f"({len(run.fvm_runs)} runs; max principle checked every step)",
        )
    ]


def run_checks(run):
    rng = np.random.default_rng(run.scenario.seed)
    checks = []
    checks += bundle_checks(run, rng)
    checks += jacobian_checks(run, rng)
    checks += focus_checks(run, rng)
    checks += psi_checks(run)
    checks += fvm_checks(run)
    checks += stability_checks(run)
    if run.scenario.decay:
        checks += decay_checks(run)
    checks += conservation_checks(run)
    return checks
