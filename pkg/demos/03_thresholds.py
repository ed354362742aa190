# coding: utf-8

# # Failure rates and thresholds
#
# A small threshold scan for the 2D color code. The presets in
# `colorcode/presets` use 20000 trials per point; here we use far fewer so
# the notebook runs in about a minute. Expect wider error bars.

# In[1]:

import numpy as np

from colorcode.montecarlo import (
    DecoderSpec,
    effective_noise,
    fit_crossing,
    inverse_effective_noise,
    sample_grid,
    threshold_transfer,
)

ps = np.round(np.arange(0.08, 0.125, 0.008), 4)
rows = sample_grid("sqoct", [8, 12, 16], ps, DecoderSpec("restriction", "mwpm"), trials=1500, seed=1)
for r in rows:
    print(f"L={r.L:2d} p={r.p:.3f} pfail={r.pfail:.3f} [{r.ci_lo:.3f}, {r.ci_hi:.3f}]")


# Below threshold the bigger lattices fail less often, above it more often.
# The curves cross near 10%.

# In[2]:

fit = fit_crossing(rows, seed=1)
print(f"p_th = {fit.p_th:.4f} +- {fit.sigma:.4f}")
print(fit.pair_crossings)


# ## Effective noise
#
# Each edge of a restricted lattice is the projection of a fixed number of
# qubits of the color code: 2 triangles in 2D, 4 or 6 tetrahedra in 3D. The
# edge is flipped when an odd number of them are. That gives the error rate
# the toric decoder actually sees.

# In[3]:

for fam in ("two_square", "cubic", "diamond"):
    print(fam, [round(effective_noise(fam, p), 4) for p in (0.01, 0.05, 0.1)])


# Inverting it turns a toric code threshold into a color code threshold.
# The 2D toric code with union-find decoding on the 2-square lattice has a
# threshold near 17.7%, which translates to about 9.8%.

# In[4]:

print(inverse_effective_noise("two_square", 0.177))
print(threshold_transfer({"cubic": 0.0295, "diamond": 0.058}))
