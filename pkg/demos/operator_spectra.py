"""Spectra of the shipped operator families.

Assembles the Dirichlet Laplacian on an interval, a Robin half-line
operator, and two Schrodinger operators, then prints how their low
eigenvalues behave.  Run directly; needs nothing beyond the package.
"""

import numpy as np

import heatlab

# --- interval Laplacian vs the exact discrete dispersion ------------------
grid = heatlab.build_grid(heatlab.DomainSpec.interval(0.0, np.pi), 199)
op = heatlab.assemble(heatlab.OperatorSpec(kind="dirichlet_laplacian"), grid)
h = grid.h[0]
L = np.pi
print("Dirichlet Laplacian on (0, pi), n = 199")
print(" k   computed      discrete        continuum k^2")
for k in range(1, 6):
    disc = (2.0 - 2.0 * np.cos(k * np.pi * h / L)) / h**2
    print(f" {k}   {op.mu[k-1]:.8f}  {disc:.8f}  {float(k*k):.1f}")
print("the computed values match the discrete dispersion to rounding;")
print("the gap to k^2 is the usual second-order truncation error\n")

# --- Robin half-line: sigma sweeps from Neumann-ish to Dirichlet ----------
hgrid = heatlab.build_grid(heatlab.DomainSpec.halfline(40.0), 800)
print("Robin boundary on the half-line, mu_1 as sigma grows")
for sigma in (0.0, 0.5, 2.0, 10.0, 1e6):
    rop = heatlab.assemble(
        heatlab.OperatorSpec(kind="robin_halfline", sigma=sigma), hgrid
    )
    print(f" sigma = {sigma:>9.1f}   mu_1 = {rop.mu_min:.6f}")
dop = heatlab.assemble(heatlab.OperatorSpec(kind="dirichlet_laplacian"), hgrid)
print(f" Dirichlet        mu_1 = {dop.mu_min:.6f}  (sigma -> inf limit)\n")

# --- potentials and the assumption classes --------------------------------
wgrid = heatlab.build_grid(heatlab.DomainSpec.interval(-20.0, 20.0), 600)

repulsive = heatlab.assemble(
    heatlab.OperatorSpec(
        kind="schrodinger",
        potential=heatlab.PotentialSpec(
            kind="inverse_power", alpha=0.5, coupling=1.0, sign=1
        ),
    ),
    wgrid,
)
well = heatlab.assemble(
    heatlab.OperatorSpec(
        kind="schrodinger",
        potential=heatlab.PotentialSpec(
            kind="tabulated_bounded",
            fn=lambda x: -3.0 * np.exp(-0.5 * x[..., 0] ** 2),
        ),
    ),
    wgrid,
)
print("Schrodinger operators on (-20, 20)")
print(f" repulsive |x|^-1/2: mu_1 = {repulsive.mu_min:+.6f}  class {repulsive.assumption_class}")
print(f" gaussian well     : mu_1 = {well.mu_min:+.6f}  class {well.assumption_class}")
print("the repulsive potential keeps the kernel bound (class B); the")
print("attractive well only satisfies the exponentially weighted bound")
print("(class A) and indeed drags an eigenvalue below zero")
