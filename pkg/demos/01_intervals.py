"""
Range-split intervals from an empirical distribution
=====================================================

A layer's weights pile up near zero.  Splitting the range into equal-width
intervals wastes most codes on the sparse tails.  The range split puts
equal-probability intervals in the tails and equal-width ones in the dense
middle.
"""

# %%
import numpy as np

from lutquant import EmpiricalDistribution, QuantizationConfig, build_intervals

rng = np.random.default_rng(0)
w = np.clip(rng.normal(0.0, 0.1, 4000), -1, 1)
dist = EmpiricalDistribution(w)
print(f"{dist.count} weights in [{dist.a_l:.3f}, {dist.a_h:.3f}]")

# %%
# The empirical CDF is piecewise linear through the order statistics, so it
# can be inverted at any probability.
for p in (0.04, 0.25, 0.5, 0.75, 0.96):
    print(f"inv_cdf({p:.2f}) = {dist.inv_cdf(p):+.4f}")

# %%
# Compare edges for the uniform split and the range split at n = 4.
for scheme in ("U", "RS"):
    iv = build_intervals(dist, QuantizationConfig(scheme=scheme))
    counts = np.bincount(iv.locate(w), minlength=len(iv))
    print(f"\n{scheme}: {iv.n_ext} external + {iv.n_int} internal intervals")
    print("edges  ", np.array2string(iv.edges, precision=3, max_line_width=120))
    print("members", counts)
