"""Exact periodic orbits from closed symbol loops.

When every node's transition matrix is a permutation, the certified
covering structure forces a periodic point whose period is the least
common multiple of the node dimensions.  Because the local maps are
piecewise affine, the orbit is not just shown to exist: composing the
affine branches along the loop gives a linear fixed-point equation solved
in closed form, then re-verified against the true network map.
"""

import numpy as np

from cmnverify import (Perturbation, fixtures, itinerary, periodic_point,
                       step_power, theorem1_check)

spec = fixtures.theorem1_perm23()
report = theorem1_check(spec)
print(f"swap (dim 2) x cycle (dim 3): verdict {report.verdict}, "
      f"period lcm(2,3) = {report.period}, eps* {report.global_eps}")

loop = [(1, 1), (2, 2), (1, 3), (2, 1), (1, 2), (2, 3)]
cert = periodic_point(spec, loop)
print(f"\nperiod-{cert.period} point {np.round(cert.point, 12).tolist()}")
print(f"  residual {cert.residual:.2e}")
print(f"  interior margins per step: {[round(m, 4) for m in cert.interior_margins]}")

back = step_power(spec, cert.point, cert.period)
print(f"  re-iterated 6 steps, displacement {float(np.max(np.abs(back - cert.point))):.2e}")

track = itinerary(spec, cert.point, 12)
print(f"  itinerary of the orbit: {track.steps[:6]} ... (repeats)")

pert = Perturbation(amplitude=0.05, seed=3)
moved = periodic_point(spec, loop, pert)
shift = float(np.max(np.abs(moved.point - cert.point)))
print(f"\nwith a 0.05 sinusoidal disturbance the orbit persists, "
      f"moving by {shift:.4f}")
print(f"  perturbed residual {moved.residual:.2e}, "
      f"margins still positive: {all(m > 0 for m in moved.interior_margins)}")
