"""
Sweeping the four schemes
=========================

Quantize one layer with each scheme while the other layer stays at 8-bit
uniform, and print the CSV the CLI would emit.
"""

# %%
from lutquant import probe_inputs, synthetic_model
from lutquant.metrics import scheme_sweep, sweep_csv

model = synthetic_model((64, 32, 16), sigma=0.1, seed=0)
probes = probe_inputs(64, 256, seed=0)

for layer in (0, 1):
    print(sweep_csv(scheme_sweep(model, layer, probes=probes)))
