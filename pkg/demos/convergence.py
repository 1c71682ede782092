"""Noise-free EqF run from a displaced start: the error decays and the
Lyapunov value never rises across measurement updates.

Usage: python demos/convergence.py [scale]
"""

import sys

import numpy as np

from eqfins.sim.config import SimConfig
from eqfins.sim.runner import run_filter, simulate

scale = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
cfg = SimConfig(duration=60.0, init_mode="offset", noise_free=True)
rep = run_filter("eqf", simulate(cfg, 0, init_scale=scale))

print(f"initial |eps| {rep.initial_eps_norm:.3g}, final {rep.eps_norm[-1]:.3g}")
slope = np.polyfit(rep.t, np.log(rep.eps_norm), 1)[0]
print(f"log-linear decay rate {slope:.3f} per second")

L = rep.update_lyap
print(f"Lyapunov after first update {L[0]:.3g}, after last {L[-1]:.3g}")
print(f"largest rise between updates: {np.diff(L[1:]).max():.2e}")

for s in (0, 5, 10, 20, 40, 59):
    i = int(np.searchsorted(rep.t, s))
    print(f"t = {rep.t[i]:4.0f} s  |eps| = {rep.eps_norm[i]:.3e}")
