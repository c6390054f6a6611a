"""Memory footprint accounting, quantization error and scheme sweeps."""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .codec import packed_size
from .errors import ShapeError
from .inference import forward_float, forward_quantized
from .model_io import FloatModel, QuantizedModel
from .partition import QuantizationConfig, Scheme
from .quantize import dequantize_model, quantize_model

__all__ = [
    "FootprintReport",
    "ErrorReport",
    "footprint",
    "footprint_of",
    "quant_error",
    "scheme_sweep",
    "sweep_csv",
    "SWEEP_COLUMNS",
    "output_error",
    "LUT_RECORD_BYTES",
]

LUT_RECORD_BYTES = 5  # u16 magnitude + sign + k + partition
REFERENCE_BITS = 8


@dataclass(frozen=True)
class FootprintReport:
    """External-memory bytes for the weight codes, per layer and in total.

    LUT and bias bytes are reported separately and excluded from ``total``.
    """

    layer_bytes: tuple
    lut_bytes: tuple
    bias_bytes: tuple
    reference: int

    @property
    def total(self) -> int:
        return sum(self.layer_bytes)

    @property
    def reduction(self) -> float:
        """Fractional saving versus 8-bit codes (0.5 means half the bytes)."""
        return 1.0 - self.total / self.reference

    @property
    def bits(self) -> int:
        return 8 * self.total


def _normalize_arch(arch) -> list:
    """Accept ``[1032, 256, 129]`` or ``[(1032, 256), (256, 129)]`` -> [(in, out), ...]."""
    arch = list(arch)
    if arch and np.ndim(arch[0]) == 0:
        if len(arch) < 2:
            raise ShapeError("need at least two layer widths")
        return [(int(a), int(b)) for a, b in zip(arch, arch[1:])]
    return [(int(a), int(b)) for a, b in arch]


def footprint(arch, widths: Sequence[int]) -> FootprintReport:
    dims = _normalize_arch(arch)
    if len(widths) != len(dims):
        raise ShapeError(f"{len(widths)} widths for {len(dims)} layers")
    if any(i <= 0 or o <= 0 for i, o in dims):
        raise ShapeError("layer dimensions must be positive")
    if any(not 1 <= w <= 16 for w in widths):
        raise ValueError("code widths must be in 1..16")
    return FootprintReport(
        layer_bytes=tuple(packed_size(i * o, w) for (i, o), w in zip(dims, widths)),
        lut_bytes=tuple(LUT_RECORD_BYTES << w for w in widths),
        bias_bytes=tuple(o for _, o in dims),
        reference=sum(packed_size(i * o, REFERENCE_BITS) for i, o in dims),
    )


def footprint_of(qmodel: QuantizedModel) -> FootprintReport:
    return footprint([(layer.in_dim, layer.out_dim) for layer in qmodel.layers],
                     [layer.n for layer in qmodel.layers])


@dataclass(frozen=True)
class ErrorReport:
    weight_mse: float
    weight_max_abs: float
    layer_mse: tuple
    layer_max_abs: tuple
    output_mse: float | None
    distinct_levels: tuple


def quant_error(model: FloatModel, qmodel: QuantizedModel, probes=None) -> ErrorReport:
    """Weight-space and output-space error of ``qmodel`` against ``model``."""
    if len(model.layers) != len(qmodel.layers):
        raise ShapeError("models have different depth")
    deq = dequantize_model(qmodel)
    diffs = []
    for a, b in zip(model.layers, deq.layers):
        if a.weights.shape != b.weights.shape:
            raise ShapeError("layer shapes differ")
        diffs.append((a.weights - b.weights).ravel())
    flat = np.concatenate(diffs)
    out_mse = None
    if probes is not None:
        probes = np.asarray(probes, dtype=np.float64)
        if probes.size == 0:
            raise ShapeError("probe set is empty")
        ref = forward_float(model, probes)
        got = forward_float(deq, probes)
        out_mse = float(np.mean((ref - got) ** 2))
    return ErrorReport(
        weight_mse=float(np.mean(flat ** 2)),
        weight_max_abs=float(np.max(np.abs(flat))),
        layer_mse=tuple(float(np.mean(d ** 2)) for d in diffs),
        layer_max_abs=tuple(float(np.max(np.abs(d))) for d in diffs),
        output_mse=out_mse,
        distinct_levels=tuple(layer.lut.distinct_levels for layer in qmodel.layers),
    )


SWEEP_COLUMNS = ("layer", "scheme", "n", "m", "k", "weight_mse", "weight_max_abs",
                 "output_mse", "distinct_levels", "footprint_bytes")

BASELINE_8U = QuantizationConfig(n=8, m=8, scheme=Scheme.U)


def scheme_sweep(model: FloatModel, layer_index: int, schemes=tuple(Scheme),
                 swept: QuantizationConfig = QuantizationConfig(),
                 fixed_other: QuantizationConfig | Sequence = BASELINE_8U,
                 probes=None) -> list:
    """One result row per scheme for the layer at ``layer_index`` (0-based).

    The swept layer uses ``swept`` with its scheme replaced; every other layer
    is held at ``fixed_other`` (8-bit uniform by default, or a per-layer list).
    Rows come back in the order of ``schemes``; their ``layer`` column is
    1-based to match the CLI.
    """
    nlayers = len(model.layers)
    if not 0 <= layer_index < nlayers:
        raise IndexError(f"layer index {layer_index} outside 0..{nlayers - 1}")
    if isinstance(fixed_other, QuantizationConfig):
        others = [fixed_other] * nlayers
    else:
        others = list(fixed_other)
    rows = []
    for scheme in schemes:
        scheme = Scheme.parse(scheme)
        cfgs = list(others)
        cfgs[layer_index] = swept.replace(scheme=scheme)
        qmodel = quantize_model(model, cfgs)
        rep = quant_error(model, qmodel, probes)
        qlayer = qmodel.layers[layer_index]
        rows.append({
            "layer": layer_index + 1,
            "scheme": scheme.value,
            "n": qlayer.n,
            "m": qlayer.m,
            "k": qlayer.lut.internal_shift,
            "weight_mse": rep.layer_mse[layer_index],
            "weight_max_abs": rep.layer_max_abs[layer_index],
            "output_mse": rep.output_mse if rep.output_mse is not None else float("nan"),
            "distinct_levels": rep.distinct_levels[layer_index],
            "footprint_bytes": footprint_of(qmodel).total,
        })
    return rows


def format_value(v) -> str:
    if isinstance(v, float):
        return repr(v) if np.isfinite(v) else "nan"
    return str(v)


def sweep_csv(rows) -> str:
    """Render sweep rows as CSV: header line, comma separated, '.' decimals."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([format_value(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def output_error(model: FloatModel, qmodel: QuantizedModel, probes, mode: str = "dequantized") -> float:
    ref = forward_float(model, probes)
    return float(np.mean((ref - forward_quantized(qmodel, probes, mode)) ** 2))
