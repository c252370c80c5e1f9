"""Heat kernel and smoothing estimates, checked numerically.

Three short experiments on a wide interval truncation:
  1. kernel columns against the closed-form whole-space kernel,
  2. a fitted Gaussian upper bound and its worst violation,
  3. the L2 -> Linf smoothing decay rate and the exact space-time identity.
"""

import math

import numpy as np

import heatlab
from heatlab.semigroup import (
    EstimateSpec,
    free_gaussian_kernel,
    heat_kernel_column,
    verify_gaussian_bound,
    verify_l2lq_decay,
    verify_spacetime,
)

grid = heatlab.build_grid(heatlab.DomainSpec.interval(-30.0, 30.0), 1200)
op = heatlab.assemble(heatlab.OperatorSpec(kind="dirichlet_laplacian"), grid)
center = grid.n_total // 2
dist = np.abs(grid.coords()[:, 0] - grid.coords()[center, 0])

print("kernel column at the center vs (4 pi t)^(-1/2) exp(-x^2/4t)")
for t in (0.25, 1.0, 4.0):
    col = heat_kernel_column(op, t, center).values
    free = free_gaussian_kernel(t, dist, 1)
    peak = float(np.max(free))
    worst = float(np.max(np.abs(col - free))) / peak
    print(f" t = {t:4.2f}: peak {np.max(col):.6f} vs {peak:.6f}, "
          f"worst deviation {worst:.2e} of peak")
print()

rep = verify_gaussian_bound(op, times=np.geomspace(0.25, 4.0, 5))
print(f"fitted bound K <= C t^(-1/2) exp(-|x-y|^2 / (c t))")
print(f" C = {rep.C:.4f}, c = {rep.c:.4f}, "
      f"max violation {rep.max_violation:.4f} over {rep.n_samples} samples")
print(" (a violation of 1.0 means the fitted bound covers the held-out half)\n")

est = EstimateSpec(r=math.inf, t_grid=tuple(np.geomspace(0.5, 5.0, 9)))
dec = verify_l2lq_decay(op, est)
print("L2 -> Linf smoothing on the window [0.5, 5]")
print(f" fitted slope {dec.slope:.4f} vs target {dec.target_slope:.2f} "
      f"(free-line rate is -1/4), prefactor {dec.prefactor:.4f}, "
      f"passed = {dec.passed}")
print()

rng = np.random.default_rng(0)
f = heatlab.Field(rng.standard_normal(grid.n_total), grid)
ratio = verify_spacetime(op, f)
print("homogeneous space-time norm of the linear flow over a random field")
print(f" ratio = {ratio:.12f}, exact value 1/sqrt(2) = {1/math.sqrt(2):.12f}")
print(f" defect {abs(ratio - 1/math.sqrt(2)):.2e} (closed-form identity, "
      "any nonzero data)")
