"""The derivation chain of the adaptive activation, form by form.

  hard:        x                      if x >= mu + z*sigma else 0
  step:        x * H(x - mu - z*sigma)
  smooth:      x * S(2*alpha*(x - mu - z*sigma))
  generalized: x * S(a*x + b)         -- swish when a=1, b=0

The smooth gate converges to the hard gate as alpha grows, and the whole
family is just the generalized swish with input-dependent a, b.
"""

import numpy as np

from ashlab import Tensor, compute_stats
from ashlab.activations import gen_swish, hard_ash, heaviside_ash, smooth_ash, swish
from ashlab.stats import z_from_percentile

x = Tensor(np.arange(1.0, 11.0))
z30 = z_from_percentile(30.0)
stats = compute_stats(x)
print(f"input: {x.tolist()}")
print(f"top-30% threshold: mu + z*sigma = {stats.threshold(z30):.4f} (z = {z30:.4f})\n")

print("hard form:  ", np.round(hard_ash(x, z30).data, 4).tolist())
print("step form:  ", np.round(heaviside_ash(x, z30).data, 4).tolist())
for alpha in (1.0, 10.0, 1000.0):
    out = smooth_ash(x, z_k=z30, alpha=alpha)
    print(f"smooth a={alpha:<6}", np.round(out.data, 4).tolist())

print("\nSharpness sweep: max |smooth - hard| off the boundary band (delta = 0.01)")
rng_x = Tensor(np.random.default_rng(0).normal(0, 1, 20_000))
s = compute_stats(rng_x)
off = np.abs(rng_x.data - s.threshold(z30)) >= 0.01
hard = hard_ash(rng_x, z30).data
for alpha in (1, 10, 100, 1000):
    diff = np.max(np.abs(smooth_ash(rng_x, z_k=z30, alpha=float(alpha)).data - hard)[off])
    print(f"  alpha = {alpha:>5}: {diff:.3e}")

print("\nGeneralized form: x*S(a*x+b) with a=1, b=0 is exactly swish:")
grid = Tensor(np.linspace(-10, 10, 10_000))
print("  max |gen_swish(1,0) - swish| =",
      np.max(np.abs(gen_swish(grid, 1.0, 0.0).data - swish(grid).data)))
