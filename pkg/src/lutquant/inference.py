"""Feedforward inference: float, dequantized and integer fixed-point modes.

Float arithmetic accumulates in ``np.longdouble`` with a fixed summation
order (input index ascending, bias last), so results do not depend on BLAS
or on how inputs are batched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .fixedpoint import Q1_7, QFormat, quantize_raw
from .model_io import FloatModel, QuantizedLayer, QuantizedModel
from .quantize import dequantize_model

__all__ = ["forward_float", "forward_quantized", "forward_integer", "IntegerRun", "layer_integer"]

log = logging.getLogger(__name__)


def _as_batch(x, in_dim: int):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x2 = x[None, :] if single else x
    if x2.ndim != 2 or x2.shape[1] != in_dim:
        raise ShapeError(f"input shape {x.shape} does not match in_dim {in_dim}")
    if not np.all(np.isfinite(x2)):
        raise ShapeError("input contains non-finite values")
    return x2, single


def _affine(w: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros((x.shape[0], w.shape[0]), dtype=np.longdouble)
    wl = w.astype(np.longdouble)
    xl = x.astype(np.longdouble)
    for j in range(w.shape[1]):
        acc += xl[:, j:j + 1] * wl[:, j]
    acc += b.astype(np.longdouble)
    return acc


def forward_float(model: FloatModel, x) -> np.ndarray:
    """``act(W @ x + b)`` layer by layer; ``x`` is one vector or a (batch, in_dim) array."""
    h, single = _as_batch(x, model.layers[0].in_dim)
    for layer in model.layers:
        h = layer.activation(_affine(layer.weights, layer.bias, h).astype(np.float64))
    return h[0] if single else h


@dataclass
class IntegerRun:
    output: np.ndarray
    preactivations: list = field(default_factory=list)  # real value of each layer's accumulator
    acc_saturations: int = 0
    out_saturations: int = 0


def _saturate(acc: np.ndarray, bits: int) -> tuple[np.ndarray, int]:
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    hits = int(np.sum((acc < lo) | (acc > hi)))
    return np.clip(acc, lo, hi), hits


def _shift_round(v: np.ndarray, s: int) -> np.ndarray:
    """Arithmetic right shift by ``s`` with ties away from zero."""
    if s <= 0:
        return v << -s
    half = 1 << (s - 1)
    mag = (np.abs(v) + half) >> s
    return np.where(v < 0, -mag, mag)


def layer_integer(layer: QuantizedLayer, x_raw: np.ndarray, in_fmt: QFormat,
                  acc_bits: int = 32) -> tuple[np.ndarray, int, int]:
    """Integer multiply-accumulate for one layer.

    Weights enter as ``sign * u`` aligned to the layer's largest shift, so
    every product shares the scale ``2**-(m + k_max + in_frac)``.  Returns
    the saturated accumulator, that scale's exponent and the saturation count.
    """
    lut = layer.lut
    k_top = max(e.k for e in lut.entries)
    w_lut = np.array([e.sign * (e.magnitude << (k_top - e.k)) for e in lut.entries], dtype=np.int64)
    w = w_lut[layer.code_array()]
    frac = layer.m + k_top + in_fmt.frac_bits
    bound = int(np.abs(w_lut).max()) * int(np.abs(x_raw).max(initial=0)) * layer.in_dim
    dtype = np.int64 if bound < 1 << 61 else object  # python ints past int64 range
    acc = np.zeros((x_raw.shape[0], layer.out_dim), dtype=dtype)
    w, x_raw = w.astype(dtype), x_raw.astype(dtype)
    for j in range(layer.in_dim):
        acc += x_raw[:, j:j + 1] * w[:, j]
    # biases are Q1.7
    acc += _shift_round(np.asarray(layer.bias_q, dtype=dtype), 7 - frac)
    acc, hits = _saturate(acc, acc_bits)
    return acc, frac, hits


def forward_integer(qmodel: QuantizedModel, x, act_fmt: QFormat = Q1_7, acc_bits: int = 32) -> IntegerRun:
    """Integer-only forward pass.

    The input is quantized to ``act_fmt``; each layer's accumulator is
    rescaled (round half away) and saturated back to ``act_fmt`` before the
    activation.  Saturations are counted, never wrapped.
    """
    if not 32 <= acc_bits <= 62:
        raise ConfigError("accumulator width must be in 32..62 bits")
    xb, single = _as_batch(x, qmodel.layers[0].in_dim)
    h = quantize_raw(xb, act_fmt)
    run = IntegerRun(output=np.empty(0))
    for layer in qmodel.layers:
        if h.shape[1] != layer.in_dim:
            raise ShapeError("layer chain dimension mismatch")
        acc, frac, hits = layer_integer(layer, h, act_fmt, acc_bits)
        run.acc_saturations += hits
        run.preactivations.append(np.ldexp(acc.astype(np.float64), -frac))
        out = _shift_round(acc, frac - act_fmt.frac_bits)
        clipped = np.clip(out, act_fmt.raw_min, act_fmt.raw_max)
        run.out_saturations += int(np.sum(clipped != out))
        h = layer.activation(clipped)
    y = np.ldexp(h.astype(np.float64), -act_fmt.frac_bits)
    run.output = y[0] if single else y
    if single:
        run.preactivations = [p[0] for p in run.preactivations]
    return run


def forward_quantized(qmodel: QuantizedModel, x, mode: str = "dequantized",
                      act_fmt: QFormat = Q1_7, acc_bits: int = 32) -> np.ndarray:
    """Run a quantized model.

    ``mode="dequantized"`` decodes the weights and reuses :func:`forward_float`;
    ``mode="integer"`` runs :func:`forward_integer`.
    """
    if mode == "dequantized":
        return forward_float(dequantize_model(qmodel), x)
    if mode == "integer":
        run = forward_integer(qmodel, x, act_fmt, acc_bits)
        if run.acc_saturations or run.out_saturations:
            log.warning("integer inference saturated: %d accumulator, %d output value(s)",
                        run.acc_saturations, run.out_saturations)
        return run.output
    raise ConfigError(f"unknown inference mode {mode!r}")
