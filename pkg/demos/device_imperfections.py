"""How dark counts limit on/off detection but not photon-number resolution.

Sweeps the dark-count mean at N = 10 partitions.  On/off receivers hit an
error floor once the signal is strong (every slice eventually clicks),
while number-resolving detectors keep discriminating because the count
values still carry information.

Run:  python demos/device_imperfections.py  [trials]
"""

import sys

import matplotlib.pyplot as plt
import numpy as np

from qamrx import DetectorModel, ReceiverParams, alpha_for_ns, estimate_ser, qam_points

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
ns_grid = np.arange(2.0, 31.0, 2.0)
dark_counts = (0.0, 1e-3, 1e-2)

plt.figure(figsize=(6.5, 4.5))
for nu in dark_counts:
    for factory, style in ((DetectorModel.on_off, ":"), (DetectorModel.pnrd_inf, "-")):
        det = factory(nu=nu)
        name = "on/off" if det.kind == "on_off" else "PNRD"
        ser = []
        for i, ns in enumerate(ns_grid):
            c = qam_points(16, alpha_for_ns(16, ns))
            params = ReceiverParams(n_partitions=10, detector=det)
            ser.append(estimate_ser(c, params, trials, seed=7000 + i).ser)
        plt.semilogy(ns_grid, np.maximum(ser, 1e-6), style, label=f"{name}, nu={nu:g}")

plt.xlabel(r"signal mean photon number $N_s$")
plt.ylabel("symbol error rate")
plt.title(f"dark-count floor, N=10 ({trials} trials/point)")
plt.legend(fontsize=8)
plt.tight_layout()
plt.savefig("dark_counts_16qam.png", dpi=150)
print("saved dark_counts_16qam.png")
