"""
External-memory footprint
=========================

Only the n-bit codes live in external memory; the LUT and biases stay on
chip.  For a 1032 -> 256 -> 129 network the byte counts follow directly.
"""

# %%
from lutquant import footprint

arch = [1032, 256, 129]
for widths in [(8, 8), (4, 4), (4, 8)]:
    fp = footprint(arch, widths)
    print(f"{widths}: {fp.total:7d} bytes  ({-100 * fp.reduction:+.1f}%)  "
          f"LUT {sum(fp.lut_bytes)} B, bias {sum(fp.bias_bytes)} B on chip")
