"""Finite-volume oracle against the classical solution of Scenario A at t = 0.5.

The error roughly halves with each grid doubling, as expected for a
first-order scheme on smooth data with kinks.
"""

from pathlib import Path

import numpy as np

from shockbundle.commands import Run, l1_table
from shockbundle.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]

sc = load_scenario(ROOT / "scenarios" / "scenario_a.yaml")
run = Run(sc, ROOT / "demos" / "out")
table = l1_table(run, 0.5, [32, 64, 128])
prev = None
for res, h, err in table:
    ratio = "" if prev is None else f"  ratio {prev / err:.3f}"
    print(f"{res:4d}^2  h = {h:.4f}  L1 = {err:.5f}{ratio}")
    prev = err
state = run.fvm_state(128, 0.5)
print(f"values stay in [{state.u.min():.6f}, {state.u.max():.6f}]; mass defect {state.max_mass_defect:.1e}")
print("u along the diagonal:", np.round(np.diagonal(state.u)[::16], 4))
