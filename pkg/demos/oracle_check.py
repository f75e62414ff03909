"""Exact enumeration versus the Monte Carlo engine on small instances.

For 4-QAM with few slices the receiver's outcome tree is small enough to
enumerate exactly.  The script walks the tree for several configurations,
compares the exact error rate with independent Monte Carlo runs, and
reports the pulls in units of the binomial standard error.

Run:  python demos/oracle_check.py
"""

from qamrx import (
    DetectorModel,
    ReceiverParams,
    alpha_for_ns,
    estimate_ser,
    exact_ser,
    qam_points,
)

configs = [
    ("on/off, ideal", DetectorModel.on_off(), 1.0, 1.0),
    ("on/off, ideal", DetectorModel.on_off(), 1.0, 4.0),
    ("pnrd(2), eta=0.8", DetectorModel.pnrd(2, eta=0.8), 0.99, 2.0),
]

print(f"{'configuration':>22} {'N':>2} {'exact':>10} {'estimate':>10} {'pull':>6}")
for name, det, tau, ns in configs:
    c = qam_points(4, alpha_for_ns(4, ns))
    for n in (1, 2, 3):
        params = ReceiverParams(n_partitions=n, detector=det, tau=tau, xi=0.995)
        exact = exact_ser(c, params)
        est = estimate_ser(c, params, 100_000, seed=n)
        pull = (est.ser - exact) / est.std_err if est.std_err else 0.0
        print(f"{name:>22} {n:2d} {exact:10.6f} {est.ser:10.6f} {pull:+6.2f}")

print("\npulls should be standard-normal; out of ~9 checks, |pull| > 3 is rare.")
