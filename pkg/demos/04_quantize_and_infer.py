"""
Quantize a model and run it three ways
=======================================

Float inference on the original weights, float inference on decoded LUT
values, and integer-only inference with Q1.7 activations.
"""

# %%
import numpy as np

from lutquant import (
    QuantizationConfig,
    forward_float,
    forward_quantized,
    probe_inputs,
    quantize_model,
    synthetic_model,
)
from lutquant.inference import forward_integer

model = synthetic_model((64, 32, 16), sigma=0.1, seed=0)
qmodel = quantize_model(model, QuantizationConfig())
x = probe_inputs(64, 256, seed=0) * 0.25  # small inputs keep hidden units inside Q1.7

# %%
ref = forward_float(model, x)
deq = forward_quantized(qmodel, x, "dequantized")
run = forward_integer(qmodel, x)
print("MSE dequantized vs float:", np.mean((deq - ref) ** 2))
print("MSE integer vs float:    ", np.mean((run.output - ref) ** 2))
print("saturations:", run.acc_saturations, "accumulator,", run.out_saturations, "output")

# %%
for i, layer in enumerate(qmodel.layers, 1):
    print(f"layer {i}: {layer.out_dim}x{layer.in_dim}, k={layer.lut.internal_shift}, "
          f"{len(layer.codes.data)} code bytes")
