"""Command implementations behind the ``shockbundle`` CLI.

Each command writes its CSV artifacts plus ``report.txt`` into the output
directory and returns an exit status: 0 success, 1 validation failure,
2 numerical failure (no solution, non-convergence, instability).
"""

from pathlib import Path

import numpy as np

from .characteristics import (
    FrontError,
    characteristic_solution,
    focus_envelope,
    focus_point,
    propagate_front,
    shock_speed,
)
from .csvio import write_csv
from .decay import BEHIND, FAN, DecayError, build_fan, fan_regions, fan_values
from .flux import FluxError
from .fvm import FvmError, cell_centers, extract_front, init_grid, l1_distance, run_to
from .geometry import GeometryError, Hyperplane, Polyline
from .initial_data import PiecewiseField, RegionError, classify_regions
from .level_surfaces import LevelSurfaceError
from .profile import K_slope, ProfileError, build_bundle
from .scenario import Scenario, ScenarioError, load_scenario
from .stability import StabilityError, StepField, classify_jump

__all__ = ["COMMANDS", "EXIT_OK", "EXIT_VALIDATION", "EXIT_NUMERICAL", "Run", "Report", "run_command"]

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2

NUMERICAL_ERRORS = (
    ProfileError,
    FvmError,
    DecayError,
    StabilityError,
    LevelSurfaceError,
    FrontError,
    GeometryError,
    RegionError,
    FluxError,
)

JACOBIAN_NOTE = (
    "Jacobian of the advection map x0 -> x0 + t f'(u0(x0)) is evaluated as "
    "J = 1 + t sum_i f_i''(u0) du0/dx0_i, with the constant term 1 included; "
    "the form without it fails at t = 0 where J must equal 1."
)

INTERPRETATION_FLAGS = (
    "directional limits: u_plus approaches along f''(u00) from the ahead side "
    "(samples xbar + eps v), u_minus along f''(U) from the behind side (samples xbar - eps v); "
    "u_plus - u_minus < 0 is stable, > 0 absolutely nonstable",
    "profile: read with u1 as the unknown and f' (not a separate d') in the transport equation; "
    "the limit point in the jump conditions is xbar",
    "profile: U > u00 is required for forward trajectories from gamma1 to gamma2; "
    "U < u00 is rejected rather than relabeled",
    "profile: points whose trajectory parameter lies outside the surface domain are "
    "evaluated with the extrapolated parametrization and counted as lateral",
    "level surfaces: the gap formula projected on f'(U) and the gap measured along the "
    "constant-state characteristics agree only at the breaking time; the normal-projected "
    "form (K t - 1) K^-1 <d, n> / <f'(u00), n> is reported next to it",
    "decay: t_bar is the sampled injectivity horizon of the fan map; the time the fan "
    "leaves the evaluation window is reported separately",
    "fvm: zero-gradient outflow boundaries, so the window must keep non-constant data "
    "away from inflow edges",
)


def _num(v):
    if isinstance(v, (str, bool)) or v is None:
        return str(v)
    v = float(v)
    return "nan" if np.isnan(v) else f"{v:.12g}"


def _tname(t):
    return f"{float(t):g}"


class Report:
    """Plain-text run report; holds no timestamps so reruns compare equal."""

    def __init__(self, command, scenario_name):
        self.command = command
        self.scenario_name = scenario_name
        self.lines = []

    def add(self, line):
        self.lines.append(str(line))

    def kv(self, key, value):
        self.lines.append(f"{key}: {_num(value)}")

    def write(self, out_dir, status):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        text = [f"command: {self.command}", f"scenario: {self.scenario_name}", f"exit status: {status}", ""]
        text += self.lines
        text += ["", "note: " + JACOBIAN_NOTE, "", "interpretation flags:"]
        text += [f"  - {flag}" for flag in INTERPRETATION_FLAGS]
        (out / "report.txt").write_text("\n".join(text) + "\n")


class Run:
    """One command invocation: scenario, flags and lazily built objects."""

    def __init__(self, scenario, out_dir, resolution=None, times=None):
        self.scenario = scenario
        self.out = Path(out_dir)
        self.resolution = resolution
        self.times_given = bool(times)
        self.times = sorted(float(t) for t in (times if times else scenario.times))
        self._bundle = None
        self._fvm = {}
        self.fvm_runs = []

    def bundle(self):
        if self._bundle is None:
            sc = self.scenario
            self._bundle = build_bundle(sc.flux, sc.gamma1, sc.gamma2, sc.U, sc.u00, sc.s_samples, window=sc.window)
        return self._bundle

    @property
    def t_break(self):
        return float(np.min(1.0 / self.bundle().K_table))

    @property
    def t_formed(self):
        return float(np.max(1.0 / self.bundle().K_table))

    def fvm_state(self, resolution, t):
        """FVM state at time ``t``; runs are cached per resolution and advanced."""
        sc = self.scenario
        state = self._fvm.get(resolution)
        if state is None or state.t > t:
            state = init_grid(sc.window, resolution, PiecewiseField(self.bundle()), sc.flux)
        state = run_to(state, t, sc.cfl)
        self._fvm[resolution] = state
        self._record(f"profile {resolution}", state)
        return state

    def _record(self, label, state):
        self.fvm_runs = [r for r in self.fvm_runs if r[0] != label]
        self.fvm_runs.append((label, state.u.size, state.steps, state.max_mass_defect, state.u_range))

    def front_at(self, t):
        return propagate_front(focus_envelope(self.bundle()), self.scenario.flux, t, self.scenario.front_dt)

    def csv(self, name, columns, rows):
        return write_csv(self.out / name, columns, rows)


def _xcols(n, prefix="x"):
    return [f"{prefix}{i + 1}" for i in range(n)]


def _grid(lo, hi, res):
    n = len(lo)
    return cell_centers(lo, hi, (res,) * n).reshape(-1, n)


def band_box(bundle, pad=0.05):
    """Bounding box of the sampled band between the two surfaces."""
    frac = np.linspace(0.0, 1.0, 9)
    s = bundle.s_samples
    taus = bundle.tau0_table[:, None] * frac[None, :]
    ss = np.repeat(s[:, None, :], len(frac), axis=1)
    pts = bundle.X(taus, ss, np.repeat(bundle.K_table[:, None], len(frac), axis=1)).reshape(-1, bundle.n)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    return lo - pad * span, hi + pad * span


def front_surface(front):
    """Implicit view of a front: ``g < 0`` on the side the normals leave."""
    pts, nrm = front.points, front.normals
    if pts.shape[1] == 1:
        return Hyperplane(pts[0], np.zeros((0, 1)), nrm[0])
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    tan = pts[1] - pts[0]
    left = np.array([-tan[1], tan[0]])
    return Polyline(arc, pts, flip=bool(left @ nrm[0] < 0))


def front_distances(points, ref):
    """Distances from ``points`` to the reference front, with a mask of the
    points whose nearest reference point is not a clamped endpoint."""
    pts = np.asarray(points, dtype=float)
    rp = ref.points
    if pts.shape[1] == 1:
        return np.abs(pts[:, 0] - rp[0, 0]), np.ones(len(pts), dtype=bool)
    a = rp[:-1]
    seg = rp[1:] - a
    rel = pts[:, None, :] - a[None]
    lam = np.sum(rel * seg, axis=-1) / np.sum(seg * seg, axis=-1)
    lc = np.clip(lam, 0.0, 1.0)
    dist = np.linalg.norm(rel - lc[..., None] * seg, axis=-1)
    k = np.argmin(dist, axis=1)
    lk = lam[np.arange(len(pts)), k]
    inside = ((k > 0) | (lk >= 0)) & ((k < len(seg) - 1) | (lk <= 1))
    return dist[np.arange(len(pts)), k], inside


def stability_verdicts(run):
    """Verdicts on the declared front (or the propagated envelope) and on the
    same step with the two states exchanged."""
    sc = run.scenario
    if sc.stability_front is not None:
        surf = sc.stability_front
        pts = surf.chi(surf.samples(33))
        where = "declared front"
    else:
        t = sc.stability_time if sc.stability_time is not None else 1.5 * run.t_formed
        front = run.front_at(t)
        surf = front_surface(front)
        pts = front.points
        where = f"propagated envelope at t = {_num(t)}"
    step = StepField(surf, sc.U, sc.u00)
    rev = step.swapped()
    out = []
    for x in pts:
        out.append((x, "original", classify_jump(step, sc.flux, x, sc.U, sc.u00)))
        out.append((x, "swapped", classify_jump(rev, sc.flux, x, sc.u00, sc.U)))
    return where, out


def cmd_construct(run, rep):
    b = run.bundle()
    sc = run.scenario
    n, k = b.n, b.k
    chi = b.gamma1.chi(b.s_samples)
    end = b.X(b.tau0_table, b.s_samples, b.K_table)
    rows = [
        list(s) + [K, t0] + list(c) + list(e)
        for s, K, t0, c, e in zip(b.s_samples, b.K_table, b.tau0_table, chi, end)
    ]
    run.csv("bundle.csv", _xcols(k, "s") + ["K", "tau0"] + _xcols(n, "chi1_x") + _xcols(n, "end_x"), rows)
    res = run.resolution or sc.u1_resolution
    lo, hi = band_box(b)
    x = _grid(lo, hi, res)
    region, lateral = classify_regions(b, x, return_lateral=True)
    u = PiecewiseField(b)(x)
    run.csv("u1_field.csv", _xcols(n) + ["region", "u"], [list(p) + [r, v] for p, r, v in zip(x, region, u)])
    rep.kv("samples", len(b.s_samples))
    rep.kv("K min", float(b.K_table.min()))
    rep.kv("K max", float(b.K_table.max()))
    rep.kv("tau0 min", float(b.tau0_table.min()))
    rep.kv("tau0 max", float(b.tau0_table.max()))
    rep.kv("endpoint gap on gamma2", float(np.max(np.abs(b.gamma2.g(end)))))
    rep.kv("max |dK/ds| (finite difference)", K_slope(b))
    rep.kv("u1 grid points", len(x))
    rep.kv("u1 grid points in band", int(np.sum(region == 0)))
    rep.kv("lateral points (implicit-sign fallback)", int(lateral.sum()))
    for note in b.notes:
        rep.add(f"bundle note: {note}")
    return EXIT_OK


def cmd_evolve_char(run, rep):
    b = run.bundle()
    sc = run.scenario
    n, k = b.n, b.k
    xs = np.atleast_2d(focus_point(b, b.s_samples))
    rows = [list(s) + [K, 1.0 / K] + list(p) for s, K, p in zip(b.s_samples, b.K_table, xs)]
    run.csv("envelope.csv", _xcols(k, "s") + ["K", "t_break"] + _xcols(n, "xstar"), rows)
    rep.kv("first breaking time", run.t_break)
    rep.kv("front formed by", run.t_formed)
    for t in run.times:
        if t < run.t_break:
            res = run.resolution or sc.u1_resolution
            x = _grid(*sc.window, res)
            u = characteristic_solution(b, x, t)
            run.csv(f"char_t{_tname(t)}.csv", _xcols(n) + ["u"], [list(p) + [v] for p, v in zip(x, u)])
            rep.add(f"t = {_tname(t)}: classical solution on {res}^{n} grid -> char_t{_tname(t)}.csv")
        elif t >= run.t_formed:
            front = run.front_at(t)
            speed = shock_speed(sc.flux, sc.U, sc.u00, front.normals)
            run.csv(
                f"front_t{_tname(t)}.csv",
                _xcols(n) + _xcols(n, "n") + ["speed"],
                [list(p) + list(q) + [v] for p, q, v in zip(front.points, front.normals, speed)],
            )
            rep.add(f"t = {_tname(t)}: front with {len(front.points)} points -> front_t{_tname(t)}.csv")
        else:
            rep.add(f"t = {_tname(t)}: mixed regime (partially formed front), not evaluated")
    return EXIT_OK


def cmd_evolve_fvm(run, rep):
    sc = run.scenario
    res = run.resolution or sc.fvm_resolution
    n = sc.n
    for t in run.times:
        state = run.fvm_state(res, t)
        x = cell_centers(state.lo, state.hi, state.u.shape).reshape(-1, n)
        run.csv(f"fvm_t{_tname(t)}.csv", _xcols(n) + ["u"], [list(p) + [v] for p, v in zip(x, state.u.ravel())])
        rep.add(
            f"t = {_tname(t)}: {res}^{n} cells, {state.steps} steps, range "
            f"[{_num(state.u.min())}, {_num(state.u.max())}] -> fvm_t{_tname(t)}.csv"
        )
        if t >= run.t_formed:
            try:
                front = extract_front(state, sc.U, sc.u00)
            except FvmError:
                continue
            gap = np.min(np.minimum(front.points - state.lo, state.hi - front.points) / state.h)
            if gap < sc.margin_cells:
                rep.add(f"warning: front within {_num(gap)} cells of the window boundary")
    _report_runs(run, rep)
    return EXIT_OK


def _report_runs(run, rep):
    for label, cells, steps, defect, rng in run.fvm_runs:
        rep.add(
            f"fvm run {label}: {steps} steps, max mass defect {_num(defect)} "
            f"(bound {_num(1e-12 * cells)}), initial range [{_num(rng[0])}, {_num(rng[1])}]"
        )


def l1_table(run, t, resolutions):
    """``(resolution, cell width, L1)`` against the classical solution."""
    b = run.bundle()
    out = []
    for res in resolutions:
        state = run.fvm_state(res, t)
        err = l1_distance(state, lambda x: characteristic_solution(b, x, t))
        out.append((res, float(np.max(state.h)), err))
    return out


def front_check(run, t, res):
    """Distances from the extracted FVM front to the propagated envelope."""
    sc = run.scenario
    state = run.fvm_state(res, t)
    fvm_front = extract_front(state, sc.U, sc.u00, margin=sc.margin_cells)
    dist, inside = front_distances(fvm_front.points, run.front_at(t))
    if not inside.any():
        raise FvmError("no FVM front points inside the envelope extent")
    return dist[inside], float(np.max(state.h))


def cmd_compare(run, rep):
    sc = run.scenario
    rows = []
    for t in run.times:
        if t < run.t_break:
            resolutions = [run.resolution] if run.resolution else sc.convergence
            table = l1_table(run, t, resolutions)
            prev = None
            for res, h, err in table:
                rows.append([t, res, "l1", err, h])
                if prev is not None:
                    rows.append([t, res, "l1_ratio", prev / err, h])
                    rep.add(f"t = {_tname(t)}: L1 ratio {_num(prev / err)} at {res}")
                prev = err
        elif t >= run.t_formed:
            res = run.resolution or sc.front_resolution
            dist, h = front_check(run, t, res)
            rows.append([t, res, "front_max_distance", float(dist.max()), h])
            rows.append([t, res, "front_mean_distance", float(dist.mean()), h])
            rows.append([t, res, "front_points", len(dist), h])
            rep.add(f"t = {_tname(t)}: front max distance {_num(dist.max() / h)} cells over {len(dist)} points")
        else:
            rep.add(f"t = {_tname(t)}: mixed regime, not compared")
    for label, cells, steps, defect, _ in run.fvm_runs:
        rows.append([np.nan, cells, "max_mass_defect", defect, np.nan])
    run.csv("compare.csv", ["t", "resolution", "metric", "value", "cell_width"], rows)
    _report_runs(run, rep)
    return EXIT_OK


def cmd_stability(run, rep):
    sc = run.scenario
    where, verdicts = stability_verdicts(run)
    n = sc.n
    rows = [
        list(x) + [kind, v.u_plus, v.u_minus, v.difference, v.classification.value, int(v.converged)]
        for x, kind, v in verdicts
    ]
    run.csv(
        "verdicts.csv",
        _xcols(n) + ["step", "u_plus", "u_minus", "difference", "classification", "converged"],
        rows,
    )
    rep.add(f"front: {where}, {len(verdicts) // 2} points")
    for kind in ("original", "swapped"):
        classes = sorted({v.classification.value for _, kk, v in verdicts if kk == kind})
        rep.add(f"{kind} step: {', '.join(classes)}")
    return EXIT_OK


def _decay_setup(run):
    sc = run.scenario
    dc = sc.decay
    if not dc:
        raise ScenarioError(["scenario has no decay section"])
    flux = dc.get("flux") or sc.flux
    fan = build_fan(dc["gamma0"], flux, dc["U"], dc["u00"], dc["s_samples"], window=dc["window"], t_cap=dc["t_cap"])
    return dc, fan


def fan_l1(fan, window, res, t, cfl):
    state = init_grid(window, res, fan.initial_step(), fan.flux)
    state = run_to(state, t, cfl)
    err = l1_distance(state, lambda x: fan_values(fan, x, t))
    return state, float(np.max(state.h)), err


def cmd_decay(run, rep):
    sc = run.scenario
    dc, fan = _decay_setup(run)
    n = fan.n
    rep.kv("t_bar (injectivity horizon)", fan.t_bar)
    rep.kv("t_cap", fan.t_cap)
    rep.kv("fan leaves window at", fan.t_leave)
    res = run.resolution or dc["resolution"]
    times = run.times if run.times_given else sorted(dc["times"])
    names = {BEHIND: "behind", FAN: "fan", 1: "ahead"}
    rows = []
    for t in times:
        if not 0 < t <= fan.t_bar:
            rep.add(f"t = {_tname(t)}: outside (0, t_bar], skipped")
            continue
        x = _grid(*dc["window"], res)
        u = fan_values(fan, x, t)
        reg = fan_regions(fan, x, t)
        run.csv(
            f"fan_t{_tname(t)}.csv",
            _xcols(n) + ["t", "u", "region"],
            [list(p) + [t, v, names[int(r)]] for p, v, r in zip(x, u, reg)],
        )
        state, h, err = fan_l1(fan, dc["window"], res, t, sc.cfl)
        run._record(f"fan {res}", state)
        rows.append([t, res, err, h, 4 * h])
        rep.add(f"t = {_tname(t)}: fan field -> fan_t{_tname(t)}.csv; L1 vs fvm {_num(err)} (4h = {_num(4 * h)})")
    run.csv("fan_compare.csv", ["t", "resolution", "l1", "cell_width", "four_h"], rows)
    _report_runs(run, rep)
    return EXIT_OK


def cmd_verify(run, rep):
    from .verify import run_checks

    checks = run_checks(run)
    run.csv(
        "verify.csv",
        ["property", "value", "tolerance", "passed"],
        [[c.name, c.value, c.tolerance, "pass" if c.passed else "FAIL"] for c in checks],
    )
    for c in checks:
        line = f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value} (tol {c.tolerance})"
        if c.detail:
            line += f" {c.detail}"
        rep.add(line)
        print(line)
    _report_runs(run, rep)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATION


COMMANDS = {
    "construct": cmd_construct,
    "evolve-char": cmd_evolve_char,
    "evolve-fvm": cmd_evolve_fvm,
    "compare": cmd_compare,
    "stability": cmd_stability,
    "decay": cmd_decay,
    "verify": cmd_verify,
}


def run_command(command, scenario, out_dir="out", resolution=None, times=None):
    """Run one command; always writes ``report.txt`` and returns the exit status."""
    name = scenario.name if isinstance(scenario, Scenario) else Path(str(scenario)).stem
    rep = Report(command, name)
    if command not in COMMANDS:
        rep.add(f"error: unknown command {command!r}; choose from {', '.join(COMMANDS)}")
        rep.write(out_dir, EXIT_VALIDATION)
        return EXIT_VALIDATION
    try:
        sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
        rep.scenario_name = sc.name
        if resolution is not None and resolution < 8:
            raise ScenarioError(["--resolution must be at least 8"])
        status = COMMANDS[command](Run(sc, out_dir, resolution, times), rep)
    except ScenarioError as exc:
        for err in exc.errors:
            rep.add(f"validation error: {err}")
        status = EXIT_VALIDATION
    except OSError as exc:
        rep.add(f"validation error: {exc}")
        status = EXIT_VALIDATION
    except NUMERICAL_ERRORS as exc:
        rep.add(f"numerical failure ({type(exc).__name__}): {exc}")
        status = EXIT_NUMERICAL
    rep.write(out_dir, status)
    return status
