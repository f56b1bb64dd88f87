"""Why the smooth form exists: gradients through the threshold.

A parameter that appears only inside a comparison (x >= theta) gets a
derivative of exactly zero, so gradient descent can never move it. The
sigmoid gate places the threshold arithmetically and revives its
gradient. Both claims are checked against central differences.
"""

import numpy as np

from ashlab import Tape, Tensor, backward, fd_check
from ashlab.activations import conditional_unit, smooth_ash
from ashlab.autodiff import sum_all

rng = np.random.default_rng(0)
x = Tensor(rng.normal(0, 1, 256))

# Hard conditional unit: f = scale * x on the active set.
tape = Tape()
xv = tape.variable(x, requires_grad=True)
scale = tape.variable(Tensor([1.5]), requires_grad=True)
theta = tape.variable(Tensor([0.25]), requires_grad=True)
backward(sum_all(conditional_unit(xv, scale, theta)))
print("hard conditional unit, d(sum)/d(.):")
print(f"  theta: {theta.grad.data[0]:+.6f}   (identically zero -> untrainable)")
print(f"  scale: {scale.grad.data[0]:+.6f}   (sum of active x -> trainable)")

# Smooth form: z sits arithmetically, so it gets a real gradient.
def loss_of_z(zv):
    return sum_all(smooth_ash(zv.tape.variable(x), z_k=zv, alpha=1.0))

rep = fd_check(loss_of_z, Tensor([0.25]))
print("\nsmooth form, d(sum)/dz:")
print(f"  analytic: {rep.analytic[0]:+.6f}")
print(f"  numeric:  {rep.numeric[0]:+.6f}")
print(f"  rel err:  {rep.max_rel_err:.2e}")

# And its x-gradient (through the input statistics) also matches.
rep = fd_check(lambda v: sum_all(smooth_ash(v, z_k=0.25)), Tensor(rng.normal(0, 1, 64)))
print(f"\nsmooth form, d(sum)/dx through mu and sigma: rel err {rep.max_rel_err:.2e}")
