"""Seeded synthetic models and probe inputs (no dataset access needed)."""

from __future__ import annotations

import numpy as np

from .model_io import Activation, FloatModel, LayerDef

__all__ = ["synthetic_model", "probe_inputs", "clamped_normal"]


def clamped_normal(rng: np.random.Generator, size, sigma: float = 0.1) -> np.ndarray:
    return np.clip(rng.normal(0.0, sigma, size), -1.0, 1.0)


def synthetic_model(dims=(64, 32, 16), sigma: float = 0.1, seed: int = 0,
                    activations=None) -> FloatModel:
    """Dense model with weights and biases drawn from N(0, sigma) clamped to [-1, 1].

    ``dims`` lists layer widths, input first.  Every layer uses ReLU unless
    ``activations`` says otherwise.  Values are rounded through float32 so
    the model survives an FPM1 save/load unchanged.
    """
    rng = np.random.default_rng(seed)
    dims = [int(d) for d in dims]
    acts = activations or [Activation.RELU] * (len(dims) - 1)
    layers = []
    for (i, o), act in zip(zip(dims, dims[1:]), acts):
        w = clamped_normal(rng, (o, i), sigma).astype(np.float32)
        b = clamped_normal(rng, o, sigma).astype(np.float32)
        layers.append(LayerDef(w, b, act))
    return FloatModel(tuple(layers))


def probe_inputs(in_dim: int, count: int = 256, seed: int = 0) -> np.ndarray:
    """Uniform [0, 1) probe vectors, shaped like non-negative spectral magnitudes."""
    return np.random.default_rng(seed).uniform(0.0, 1.0, (count, in_dim))
