"""
Pumped heat of a quadrant protocol
==================================

A circular sector spanning one quadrant switches each bath on and off in
turn.  For a large radius the pumped heat per cycle approaches ``ln 2``.
"""

import numpy as np

from adiacycle.geometry import area_flux, area_line, summarize
from adiacycle.optimizer import sector_best_aperture, sector_study
from adiacycle.trajectory import CircularSector, Polyline

for radius in (2.0, 5.0, 10.0, 20.0):
    # clockwise traversal is the engine orientation
    c = CircularSector(radius, np.pi / 2, np.pi / 4).reversed()
    print(f"R = {radius:4.1f}   A = {area_line(c):.6f}   flux = {area_flux(c):.6f}")
print(f"ln 2 = {np.log(2.0):.6f}")

# power figure of merit over apertures at the largest radius
omega, value = sector_best_aperture(20.0)
print(f"best aperture {omega:.4f} rad (pi/2 = {np.pi / 2:.4f}), A^2/L^2 = {value:.5f}")

# the efficiency at the quarter aperture climbs to Carnot with the radius
for row in sector_study([2.0, 5.0, 10.0, 20.0], [np.pi / 2]):
    print(f"R = {row.radius:4.1f}   eta_max/eta_C = {row.eta_max:.4f}")

# the curvature has the same sign in the first and third quadrants, so a
# curve around both lobes pumps nearly twice as much
lobes = Polyline([
    [0.02, 0.0], [20.0, 0.0], [20.0, 20.0], [0.0, 20.0], [0.0, 0.02],
    [-0.02, 0.0], [-20.0, 0.0], [-20.0, -20.0], [0.0, -20.0], [0.0, -0.02],
])
print(f"two-lobe curve: |A| = {abs(area_line(lobes)):.4f}")

# at large radius the legs run along the axes, where the heat leak vanishes
g = summarize(CircularSector(20.0, np.pi / 2, np.pi / 4).reversed())
print(f"L^2 = {g.geodesic_L2:.4f}, leak-weighted length^2 = {g.geodesic_Lk2:.2e}")
