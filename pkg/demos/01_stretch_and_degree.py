"""Stretch bounds and crossing degrees for interval maps.

The basic question everything else builds on: how far does a map push the
unit ball past a target point?  The minimum stretch is the smallest
displacement of a boundary point from the target, the maximum stretch the
largest displacement of any point of the ball.  A map "crosses" a target
when the minimum stretch exceeds the target ball radius *and* it does so
with nonzero degree.
"""

import numpy as np

from cmnverify import PiecewiseAffineMap, degree_1d, max_stretch, min_stretch

# the expanding branch 3.5 x + 1.5 sends [-1, 1] onto [-2, 5]
expander = PiecewiseAffineMap.affine([[3.5]], [1.5])

print("expanding branch 3.5 x + 1.5 on [-1, 1]:")
for ref in (0.0, 3.0):
    lo = min_stretch(expander, [ref])
    hi = max_stretch(expander, [ref])
    print(f"  relative to {ref:3.0f}:  min stretch {lo.min_rel:.3f}  "
          f"max stretch {hi.max_abs:.3f}  (exact: {lo.certified})")
    print(f"  crossing degree at {ref:3.0f}: {degree_1d(expander, ref).value}")

# a tent-shaped map covers twice with cancelling orientations: degree 0
tent = PiecewiseAffineMap.from_breakpoints([0.0], [(-3.0, 1.5), (3.0, 1.5)])
print("\ntent map (-3x + 1.5 | 3x + 1.5):")
print(f"  min stretch rel 0: {min_stretch(tent, [0.0]).min_rel:.3f}")
print(f"  crossing degree at 0: {degree_1d(tent, 0.0).value}  "
      "(two crossings, opposite orientation)")

# in higher dimension the maximum is exact (cell-vertex enumeration) and
# the minimum for affine maps is exact (one linear program per face)
plane = PiecewiseAffineMap.affine([[2.0, 0.3], [-0.4, 1.8]], [0.1, -0.2])
bounds = min_stretch(plane, np.zeros(2))
print("\naffine plane map:")
print(f"  min stretch {bounds.min_rel:.6f} (exact), "
      f"max stretch {bounds.max_abs:.6f} (exact)")
