"""Scenario documents (YAML) and their validated in-memory form.

Document layout::

    name: scenario-a
    flux: {kind: quadratic, a: [1, 1]}          # or exponential/a, polynomial/coeffs
    states: {U: 2, u00: 1}
    gamma1: {family: hyperplane, point: [0, 0], directions: [[1, -1]],
             normal: [1, 1], domain: [[-2, 2]]}
    gamma2: {family: hyperplane, ...}           # circle/sphere: center, radius
                                                # table: path (CSV s,x1,x2)
    window: {lo: [-6, -6], hi: [5, 5]}
    grids: {s_samples: 33, u1_resolution: 64, fvm_resolution: 128,
            front_resolution: 200, convergence: [64, 128, 256]}
    times: [0.5, 1.5]
    decay: {gamma0: {...}, U: 1, u00: 2, window: {...}, resolution: 256, times: [0.5]}
    stability: {time: 1.5, front: {...}}     # front: optional declared surface
    seed: 20240101

Every key except ``flux``, ``states``, ``gamma1``, ``gamma2`` and ``window``
has a default in :data:`DEFAULTS`.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .csvio import read_csv
from .flux import KINDS, FluxModel
from .geometry import GeometryError, Hyperplane, Polyline, Sphere

__all__ = ["DEFAULTS", "ScenarioError", "Scenario", "parse_scenario", "load_scenario", "build_surface"]

# All numeric defaults in one place.
DEFAULTS = {
    "grids.s_samples": 65,
    "grids.u1_resolution": 64,
    "grids.fvm_resolution": 128,
    "grids.front_resolution": 200,
    "grids.convergence": [64, 128, 256],
    "times": [0.5, 1.5],
    "cfl": 0.4,
    "stability.time": None,  # None: 1.5 * max_s t0(s)
    "decay.resolution": 256,
    "decay.times": [0.5],
    "decay.s_samples": 33,
    "decay.t_cap": 10.0,
    "front.dt": 1e-3,
    "front.margin_cells": 10,
    "seed": 20240101,
    "flux.interval_pad": 1.0,
}


class ScenarioError(ValueError):
    """Syntax or semantic problems; ``errors`` lists every violation found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Scenario:
    name: str
    flux: FluxModel
    U: float
    u00: float
    gamma1: object
    gamma2: object
    window: tuple
    s_samples: int
    u1_resolution: int
    fvm_resolution: int
    front_resolution: int
    convergence: list
    times: list
    cfl: float
    stability_time: float
    front_dt: float
    margin_cells: int
    seed: int
    decay: dict = None
    stability_front: object = None
    source: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.flux.n


def _vec(v, what, errors, n=None):
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        errors.append(f"{what}: not numeric")
        return None
    if n is not None and a.ndim == 1 and a.size != n:
        errors.append(f"{what}: expected {n} components, got {a.size}")
        return None
    return a


def build_surface(spec, n, what, errors, base=Path(".")):
    """Surface from a family spec; appends problems to ``errors``."""
    if not isinstance(spec, dict):
        errors.append(f"{what}: must be a mapping")
        return None
    fam = spec.get("family")
    try:
        if fam == "hyperplane":
            point = _vec(spec.get("point"), f"{what}.point", errors, n)
            normal = _vec(spec.get("normal"), f"{what}.normal", errors, n)
            dirs = spec.get("directions", [])
            if point is None or normal is None:
                return None
            return Hyperplane(point, np.asarray(dirs, dtype=float).reshape(-1, n), normal, spec.get("domain"))
        if fam in ("circle", "sphere"):
            center = _vec(spec.get("center"), f"{what}.center", errors, n)
            if center is None:
                return None
            return Sphere(center, float(spec.get("radius", 1.0)), spec.get("domain"), bool(spec.get("flip", False)))
        if fam == "table":
            path = Path(spec.get("path", ""))
            path = path if path.is_absolute() else base / path
            cols, rows = read_csv(path)
            arr = np.asarray(rows, dtype=float)
            return Polyline(arr[:, 0], arr[:, 1:3], bool(spec.get("flip", False)))
    except (GeometryError, OSError, ValueError, TypeError) as exc:
        errors.append(f"{what}: {exc}")
        return None
    errors.append(f"{what}: unknown family {fam!r}")
    return None


def _get(doc, dotted):
    cur = doc
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return DEFAULTS.get(dotted)
        cur = cur[part]
    return cur


def _flux(spec, errors, interval):
    if not isinstance(spec, dict):
        errors.append("missing flux")
        return None
    kind = spec.get("kind")
    if kind not in KINDS:
        errors.append(f"flux.kind must be one of {KINDS}, got {kind!r}")
        return None
    if kind == "polynomial":
        coeffs = spec.get("coeffs")
        if not coeffs:
            errors.append("flux.coeffs: polynomial flux needs per-component coefficient lists")
            return None
        data = tuple(tuple(float(c) for c in cl) for cl in coeffs)
    else:
        a = spec.get("a")
        if not a:
            errors.append(f"flux.a: {kind} flux needs a coefficient vector")
            return None
        data = tuple(float(c) for c in a)
    return FluxModel(kind, data, interval)


def parse_scenario(text, base=Path(".")):
    """Parse and validate a scenario document; raises :class:`ScenarioError`."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioError([f"syntax error{where}: {getattr(exc, 'problem', exc)}"]) from None
    if not isinstance(doc, dict):
        raise ScenarioError(["empty document", "missing flux", "missing states", "missing window"])
    errors = []
    states = doc.get("states")
    U = u00 = None
    if not isinstance(states, dict) or "U" not in states or "u00" not in states:
        errors.append("missing states (U and u00)")
    else:
        U, u00 = float(states["U"]), float(states["u00"])
        if U == u00:
            errors.append("states equal: U must differ from u00")
    pad = float(_get(doc, "flux.interval_pad"))
    interval = (-np.inf, np.inf)
    if U is not None:
        interval = (min(U, u00) - pad, max(U, u00) + pad)
    flux = _flux(doc.get("flux"), errors, interval)
    n = flux.n if flux is not None else None
    g1 = g2 = None
    for key in ("gamma1", "gamma2"):
        if key not in doc:
            errors.append(f"missing {key}")
    if n is not None:
        if "gamma1" in doc:
            g1 = build_surface(doc["gamma1"], n, "gamma1", errors, base)
        if "gamma2" in doc:
            g2 = build_surface(doc["gamma2"], n, "gamma2", errors, base)
    window = None
    win = doc.get("window")
    if not isinstance(win, dict) or "lo" not in win or "hi" not in win:
        errors.append("missing window (lo, hi)")
    else:
        lo = _vec(win["lo"], "window.lo", errors, n)
        hi = _vec(win["hi"], "window.hi", errors, n)
        if lo is not None and hi is not None:
            if not np.all(hi > lo):
                errors.append("inverted window: every hi must exceed lo")
            window = (lo, hi)
    times = [float(t) for t in _get(doc, "times")]
    if any(t < 0 for t in times):
        errors.append("times must be nonnegative")
    decay = None
    if "decay" in doc:
        decay = _decay(doc["decay"], n, errors, base)
    front = None
    st_spec = doc.get("stability")
    if isinstance(st_spec, dict) and "front" in st_spec and n is not None:
        front = build_surface(st_spec["front"], n, "stability.front", errors, base)
    if errors:
        raise ScenarioError(errors)
    st = _get(doc, "stability.time")
    return Scenario(
        name=str(doc.get("name", "scenario")),
        flux=flux,
        U=U,
        u00=u00,
        gamma1=g1,
        gamma2=g2,
        window=window,
        s_samples=int(_get(doc, "grids.s_samples")),
        u1_resolution=int(_get(doc, "grids.u1_resolution")),
        fvm_resolution=int(_get(doc, "grids.fvm_resolution")),
        front_resolution=int(_get(doc, "grids.front_resolution")),
        convergence=[int(r) for r in _get(doc, "grids.convergence")],
        times=times,
        cfl=float(_get(doc, "cfl")),
        stability_time=None if st is None else float(st),
        front_dt=float(_get(doc, "front.dt")),
        margin_cells=int(_get(doc, "front.margin_cells")),
        seed=int(_get(doc, "seed")),
        decay=decay,
        stability_front=front,
        source=doc,
    )


def _decay(spec, n, errors, base):
    if not isinstance(spec, dict):
        errors.append("decay: must be a mapping")
        return None
    out = {}
    dn = n
    if "flux" in spec:
        f = _flux(spec["flux"], errors, (-np.inf, np.inf))
        out["flux"] = f
        dn = f.n if f is not None else None
    if "U" not in spec or "u00" not in spec:
        errors.append("decay: needs U and u00")
    else:
        out["U"], out["u00"] = float(spec["U"]), float(spec["u00"])
        if out["U"] == out["u00"]:
            errors.append("decay: states equal")
    if "gamma0" not in spec:
        errors.append("decay: missing gamma0")
    elif dn is not None:
        out["gamma0"] = build_surface(spec["gamma0"], dn, "decay.gamma0", errors, base)
    win = spec.get("window")
    if isinstance(win, dict) and "lo" in win and "hi" in win:
        lo, hi = np.asarray(win["lo"], dtype=float), np.asarray(win["hi"], dtype=float)
        if not np.all(hi > lo):
            errors.append("decay: inverted window")
        out["window"] = (lo, hi)
    else:
        errors.append("decay: missing window (lo, hi)")
    out["resolution"] = int(spec.get("resolution", DEFAULTS["decay.resolution"]))
    out["times"] = [float(t) for t in spec.get("times", DEFAULTS["decay.times"])]
    out["s_samples"] = int(spec.get("s_samples", DEFAULTS["decay.s_samples"]))
    out["t_cap"] = float(spec.get("t_cap", DEFAULTS["decay.t_cap"]))
    return out


def load_scenario(path):
    path = Path(path)
    return parse_scenario(path.read_text(), base=path.parent)
