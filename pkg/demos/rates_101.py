"""
Free energy, Lyapunov exponents and rate functions
===================================================

The analytic layer in a few lines: the free energy rho(s, t), the moment
Lyapunov function Lambda(xi), and the upper-tail rate function I(x) obtained
from Lambda by a Legendre transform.
"""

import numpy as np

from oyldp import rates
from oyldp.convex import SampledFunction, legendre_transform

s, t = 1.0, 1.0

# the free energy is the slope of Lambda at the origin
rho = rates.free_energy(s, t)
print("free energy rho(1, 1) =", rho)
h = 1e-4
slope = (rates.lyapunov(s, t, h) - rates.lyapunov(s, t, -h)) / (2 * h)
print("central slope of Lambda at 0 =", slope)

# at xi = 1 the Lyapunov function has a closed form
print("Lambda(1) =", rates.lyapunov(s, t, 1.0),
      " closed form:", t / 2 + s + s * np.log(t / s))

# the second variational form over theta = mu + xi gives the same numbers
for xi in (0.5, 2.0):
    print(f"xi={xi}: direct {rates.lyapunov(s, t, xi):.12f}"
          f"  dual form {rates.lyapunov_dual_form(s, t, xi):.12f}")

# Lambda is linear for xi <= 0 and strictly convex beyond
xi = np.linspace(-2, 4, 7)
print(np.column_stack([xi, rates.lyapunov(s, t, xi)]))

# the rate function: zero at rho, +inf below, convex and increasing above
for x in (rho - 0.1, rho, rho + 0.5, rho + 2.0):
    print(f"I({x:.4f}) = {rates.rate_function(s, t, x)}")

# the same curve from a sampled Lambda and a numerical conjugate
grid = np.linspace(0, 20, 20001)
lam = SampledFunction(0, 20, rates.lyapunov(s, t, grid))
conj = legendre_transform(lam, rho, rho + 5, 6)
for x, v in zip(conj.grid, conj.values):
    print(f"x={x:.3f}  conjugate {v:.8f}  rate_function "
          f"{rates.rate_function(s, t, x):.8f}")

# the stationary rate U and the Brownian rate R have closed forms; U equals
# the smaller of two infimal-convolution problems built from G and H
theta = 1.0
x = np.linspace(-1, 3, 5)
print("U:", rates.stationary_rate_U(s, theta, x))
print("R:", rates.brownian_rate_R(t, theta, x))

# where r - s log t - s + s log s > 2 sqrt(ts), a comparison with the GUE
# top eigenvalue gives a lower bound on I
for r in (3.5, 5.0):
    print(f"r={r}: I = {rates.rate_function(s, t, r):.4f}"
          f"  GUE bound = {rates.gue_tail_bound(s, t, r):.4f}")
