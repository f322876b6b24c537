"""
The stationary model and the queueing recursion
================================================

Started from the boundary weight exp(theta v - B(v)), the queue variables
r_k are i.i.d. with exp(-r_k) Gamma(theta, 1) distributed.  This script
checks the Gamma law and the telescoping identity behind it.
"""

import warnings

import numpy as np

from oyldp import mc, sim
from oyldp import specfun as sf
from oyldp.errors import TruncationWarning

theta = 1.0

# one environment with a negative-time segment for the integral from -T
env = sim.sample_environment(4, 1.0, 1e-3, trunc_T=30.0, seed=3)
# the truncation at -T leaves a tail of relative size about exp(-theta T)
# times the path fluctuation; a warning reports when it exceeds 1e-8
with warnings.catch_warnings():
    warnings.simplefilter("ignore", TruncationWarning)
    r, rem = sim.stationary_r_sequence(env, theta, 3, at_time=1.0,
                                       return_remainder=True)
    # sum_k r_k(t) = B(t) - theta t + log Z_n(t) holds on the grid
    rep = sim.verify_stationary_decomposition(env, theta, 3, 1.0)
print("r_1, r_2, r_3 at t = 1:", r, " tail estimate:", rem)
print(rep.to_text())

# a few thousand replicates of r_1(0), r_2(0)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", TruncationWarning)
    samples = mc.sample_stationary_r(theta, 2, 2000, step=0.01, seed=3)
w = np.exp(-samples[:, 0])
print("mean of exp(-r_1):", w.mean(), " (Gamma mean:", theta, ")")

d, crit = mc.ks_test(w, lambda x: sf.gamma_cdf(x, theta))
print(f"KS distance {d:.4f}, 1% critical value {crit[0.01]:.4f}")
print("corr(r_1, r_2) =", np.corrcoef(samples[:, 0], samples[:, 1])[0, 1])
