"""Float model <-> quantized model."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .codebook import build_codebook
from .codec import decode_codes, encode_params, pack_codes, unpack_codes
from .fixedpoint import Q1_7, quantize_raw
from .model_io import FloatModel, LayerDef, QuantizedLayer, QuantizedModel
from .partition import QuantizationConfig

__all__ = ["quantize_layer", "quantize_model", "dequantize_layer", "dequantize_model", "layer_configs"]


def quantize_layer(layer: LayerDef, cfg: QuantizationConfig) -> QuantizedLayer:
    lut = build_codebook(layer.weights, cfg)
    codes = encode_params(layer.weights, lut.interval_set)
    bias_q = tuple(int(b) for b in quantize_raw(layer.bias, Q1_7))
    return QuantizedLayer(layer.out_dim, layer.in_dim, cfg.scheme, cfg.n, cfg.m, lut,
                          pack_codes(codes, cfg.n), bias_q, layer.activation)


def layer_configs(model: FloatModel, cfg) -> list:
    """Broadcast a single config to every layer, or validate a per-layer list."""
    if isinstance(cfg, QuantizationConfig):
        return [cfg] * len(model.layers)
    cfgs = list(cfg)
    if len(cfgs) != len(model.layers):
        raise ValueError(f"{len(cfgs)} configs for {len(model.layers)} layers")
    return cfgs


def quantize_model(model: FloatModel, cfg: QuantizationConfig | Sequence = QuantizationConfig()) -> QuantizedModel:
    """Quantize every layer; ``cfg`` is one config or one per layer.

    Layers are independent, so results do not depend on processing order.
    """
    return QuantizedModel(tuple(quantize_layer(layer, c)
                                for layer, c in zip(model.layers, layer_configs(model, cfg))))


def dequantize_layer(layer: QuantizedLayer) -> LayerDef:
    w = decode_codes(unpack_codes(layer.codes), layer.lut).reshape(layer.out_dim, layer.in_dim)
    return LayerDef(w, layer.bias_values(), layer.activation)


def dequantize_model(qmodel: QuantizedModel) -> FloatModel:
    return FloatModel(tuple(dequantize_layer(layer) for layer in qmodel.layers))


def dequantized_weights(qmodel: QuantizedModel) -> list:
    return [np.asarray(dequantize_layer(layer).weights) for layer in qmodel.layers]
