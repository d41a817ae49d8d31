"""Scenario A end to end: profile, breaking, focus envelope and the formed shock.

Run from the repository root::

    python3 demos/scenario_a_walkthrough.py
"""

from pathlib import Path

import numpy as np

from shockbundle.characteristics import breaking_time, focus_envelope, focus_point, propagate_front, shock_speed
from shockbundle.commands import Run, stability_verdicts
from shockbundle.profile import eval_u1
from shockbundle.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]

sc = load_scenario(ROOT / "scenarios" / "scenario_a.yaml")
run = Run(sc, ROOT / "demos" / "out")
b = run.bundle()

print(f"K over {len(b.s_samples)} samples: [{b.K_table.min():.12f}, {b.K_table.max():.12f}]")
for p in ([0.5, 0.5], [1.0, 0.2], [-0.3, 1.9]):
    print(f"u1{tuple(p)} = {eval_u1(b, p):.12f}  (closed form {2 - sum(p) / 2:.12f})")

s = np.array([[-1.0], [0.0], [1.0]])
print("breaking times:", breaking_time(b, s).ravel())
print("focus points:\n", focus_point(b, s))

env = focus_envelope(b)
front = propagate_front(env, sc.flux, 1.5, sc.front_dt)
print("jump speed along (1, 1)/sqrt(2):", shock_speed(sc.flux, sc.U, sc.u00, env.normals[:1])[0])
print("envelope displacement by t = 1.5:", (front.points - env.points).mean(axis=0))

where, verdicts = stability_verdicts(run)
kinds = {k: {v.classification.value for _, kk, v in verdicts if kk == k} for k in ("original", "swapped")}
print(f"stability on the {where}: {kinds}")
