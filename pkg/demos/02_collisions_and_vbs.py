"""
Level collisions and the virtual bit shift
===========================================

When internal intervals are narrower than the Q1.7 step, neighbouring
interval means round to the same 8-bit value and codes are wasted.  Storing
the m low bits of an (m+k)-bit value instead restores the lost resolution
without widening the LUT.
"""

# %%
import numpy as np

from lutquant import QuantizationConfig, apply_vbs, build_codebook

core = np.linspace(-0.02, 0.02, 921)
tail = np.linspace(0.05, 0.6, 40)
w = np.concatenate([core, -tail, tail])

# %%
for scheme in ("RS", "RSVBS"):
    cb = build_codebook(w, QuantizationConfig(scheme=scheme))
    inner = cb.interval_set.widths[cb.interval_set.internal_mask]
    print(f"{scheme:6s} internal width {inner[0]:.4f}  k={cb.internal_shift}  "
          f"distinct levels {cb.distinct_levels}/16")
    print("       levels", np.array2string(cb.levels, precision=5, max_line_width=120))

# %%
# One entry by hand: 0.02099609375 fits in 8 bits once the four leading
# zeros are shifted out.
u, sign = apply_vbs(0.02099609375, k=4, m=8)
print(f"\nu = {u:08b}, decoded {sign * u * 2.0 ** -12!r}")
