"""Decay of an absolutely nonstable step into a rarefaction fan.

One dimension (Burgers, u = 1 behind, 2 ahead) and the planar two-dimensional
case of Scenario A with the states exchanged.
"""

import numpy as np

from shockbundle.commands import fan_l1
from shockbundle.decay import DecayError, build_fan, fan_values
from shockbundle.flux import quadratic
from shockbundle.geometry import Hyperplane

burgers = quadratic(1.0)
point = Hyperplane([0.0], np.zeros((0, 1)), [1.0])
fan = build_fan(point, burgers, 1.0, 2.0, window=([-4.0], [4.0]))
x = np.linspace(-0.5, 1.5, 9)[:, None]
print("1-D fan at t = 0.5:", np.round(fan_values(fan, x, 0.5), 4))
for res in (64, 128, 256):
    _, h, err = fan_l1(fan, ([-4.0], [4.0]), res, 0.5, 0.4)
    print(f"  {res:4d} cells: L1 {err:.4f}  (4h = {4 * h:.4f})")

try:
    build_fan(point, burgers, 2.0, 1.0)
except DecayError as exc:
    print("stable orientation:", exc)

line = Hyperplane([0.0, 0.0], [[1.0, -1.0]], [1.0, 1.0], [[-2.0, 2.0]])
fan2 = build_fan(line, quadratic(1.0, 1.0), 1.0, 2.0)
eta = np.linspace(0.0, 2.5, 6)
pts = np.stack([eta / 2, eta / 2], axis=1)
print("2-D fan along x1 = x2 at t = 0.5:", np.round(fan_values(fan2, pts, 0.5), 4))
