"""
GUE top eigenvalues and Brownian last passage
=============================================

The top eigenvalue of an n x n GUE matrix with entry variance 1/(4n) has
the law of the Brownian last-passage value over n lines on [0, 1], scaled
by 1/(2 sqrt(n)).
"""

import math

import numpy as np

from oyldp import mc, sim

n = 3

# one matrix, its top eigenvalue by Sturm bisection, and a dense check
H = sim.sample_gue_matrix(n, seed=5)
print("top eigenvalue:", sim.sample_gue_top_eigenvalue(n, seed=5),
      " dense solver:", np.linalg.eigvalsh(H)[-1])

# last passage on one environment
env = sim.sample_environment(n, 1.0, 1e-3, seed=5)
print("LPP max:", sim.brownian_lpp_max(env, n, 1.0))

# two samples and the two-sample KS distance
gue = mc.sample_gue_top(n, 2000, seed=5)
lpp = mc.sample_lpp_max(n, 1.0, 1e-4, 2000, seed=5) / (2 * math.sqrt(n))
d, crit = mc.ks_2samp(gue, lpp)
print(f"means {gue.mean():.4f} vs {lpp.mean():.4f}; KS {d:.4f}"
      f" (1% critical {crit[0.01]:.4f})")

# grid maxima sit below the continuum value by a term of order sqrt(step)
for step in (1e-2, 1e-3, 1e-4):
    m = mc.sample_lpp_max(n, 1.0, step, 2000, seed=5).mean() / (2 * math.sqrt(n))
    print(f"step {step:g}: scaled LPP mean {m:.4f}")

# without the scaling the two laws are far apart
print("unscaled:", mc.gue_identity_test(n, 1000, step=1e-3, scaled=False,
                                        max_distance=0.05).to_text())
