"""
Efficiency over ellipse centers
===============================

A coarse scan of efficiency-optimal ellipses in the first quadrant.  Each cell
reports ``eta_max / eta_C`` of the best ellipse around that center.  Larger
grids are available from the ``scan`` command.
"""

import numpy as np

from adiacycle.geometry import summarize
from adiacycle.optimizer import Objective, scan_centers
from adiacycle.performance import Drive, engine_figures

drive = Drive(0.05)
grid = np.array([1.0, 3.0, 5.0])
cells = scan_centers(grid, grid, Objective("efficiency"), seeds=2)

print("B_z   B_x   A^2/(L_k)^2   eta_max/eta_C")
for cell in cells:
    eta = engine_figures(summarize(cell.result.best_curve), drive).eta_max
    print(f"{cell.center[0]:3.1f}   {cell.center[1]:3.1f}   {cell.objective_value:10.4f}   {eta:.4f}")
