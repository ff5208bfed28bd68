"""
Best elliptic cycle around a fixed center
=========================================

Maximize ``A^2 / L^2`` over ellipses centered at ``(1, 1)``, then read off
the engine figures at ``T = 0.1 K`` and ``dT/T = 0.05``, and compare a
constant-speed drive with the optimal speed profiles.
"""

import numpy as np

from adiacycle.geometry import summarize
from adiacycle.optimizer import compare_profiles, optimize_ellipse
from adiacycle.performance import Drive, engine_figures, limiting_power, si_estimates

res = optimize_ellipse((1.0, 1.0))
c = res.best_curve
print(f"a = {c.a:.5f}  b = {c.b:.5f}  tilt = {c.tilt:.5f}  objective = {res.objective_value:.5f}")
print(f"{res.iterations} iterations, converged: {res.converged}")

drive = Drive(0.05)
g = summarize(c)
perf = engine_figures(g, drive)
si = si_estimates(perf)
print(f"P_max = {si['P_max_W'] * 1e18:.3f} aW at tau_P = {si['tau_P_s'] * 1e9:.2f} ns")
print(f"eta at P_max = {perf.eta_Pmax:.3f} eta_C, eta_max = {perf.eta_max:.3f} eta_C")
print(f"P_max / P_lim = {perf.P_max / limiting_power(g, drive):.3f}")

# constant speed against the optimal speed profiles
out = compare_profiles(c, drive, n_tau=200)
print(f"peak power gain {out['power_ratio']:.2f}, peak efficiency gain {out['efficiency_ratio']:.2f}")
k = int(np.argmax(out["P_optimal"]))
print(f"optimal power peak at tau = {out['tau'][k]:.1f} hbar/(k_B T)")
