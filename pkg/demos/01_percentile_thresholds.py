"""Keeping the top-k percent of a tensor: exact selection vs. a Gaussian threshold.

For near-normal data, the elements above mu + z_k*sigma are (statistically)
exactly the top-k percent, where z_k comes from the standard-normal quantile
table. This demo draws 100k samples and compares the cheap threshold rule
against the exact quickselect answer.
"""

import numpy as np

from ashlab import RngState, compute_stats, exact_topk_mask, gaussian_topk_mask, randn
from ashlab import z_from_percentile, percentile_from_z

print("Quantile lookups (upper-tail percent -> z):")
for k in (2.5, 10, 30, 50, 80):
    z = z_from_percentile(k)
    print(f"  k = {k:>4}%  ->  z = {z:+.5f}   (back: {percentile_from_z(z):.4f}%)")

x = randn([100_000], RngState(7))
stats = compute_stats(x)
print(f"\n100k N(0,1) draws: mu = {stats.mu:+.4f}, sigma = {stats.sigma:.4f}")

print(f"\n{'k%':>4} {'threshold':>10} {'kept (gauss)':>13} {'kept (exact)':>13} {'jaccard':>8}")
for k in (10.0, 30.0, 50.0, 80.0):
    thr = stats.threshold(z_from_percentile(k))
    gauss = gaussian_topk_mask(x, k)
    exact = exact_topk_mask(x, k)
    jac = np.sum(gauss.mask & exact.mask) / np.sum(gauss.mask | exact.mask)
    print(f"{k:>4.0f} {thr:>10.4f} {gauss.kept:>13} {exact.kept:>13} {jac:>8.4f}")

print("\nThe two routes agree except in a thin band at the quantile boundary.")
