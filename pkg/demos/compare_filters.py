"""Run the EqF and the MEKF on one simulated flight and print their errors.

Usage: python demos/compare_filters.py [seed]
"""

import sys

import numpy as np

from eqfins.sim.config import SimConfig
from eqfins.sim.runner import METRICS, run_filter, simulate

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
cfg = SimConfig(duration=60.0, window=20.0)  # shorter than the default campaign
scen = simulate(cfg, seed)  # truth, IMU and pose measurements; both filters start at identity

reports = {kind: run_filter(kind, scen) for kind in ("eqf", "mekf")}

print(f"seed {seed}: {len(scen.streams.imu_t)} IMU samples, {len(scen.streams.meas_t)} pose measurements")
print(f"{'':12s}" + "".join(f"{m:>10s}" for m in METRICS))
for kind, rep in reports.items():
    print(f"{kind + ' first':12s}" + "".join(f"{x:10.4f}" for x in rep.rmse_transient))
    print(f"{kind + ' last':12s}" + "".join(f"{x:10.4f}" for x in rep.rmse_asymptotic))

# attitude error (deg) at a few times, to see the first corrections
t = reports["eqf"].t
for s in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 59.0):
    i = int(np.searchsorted(t, s))
    print(f"t = {t[i]:5.1f} s  eqf {reports['eqf'].errors[i, 0]:7.3f}  mekf {reports['mekf'].errors[i, 0]:7.3f}")
