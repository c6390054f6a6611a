"""Range-split non-uniform weight quantization with virtual bit shift.

Typical use::

    from lutquant import QuantizationConfig, quantize_model, forward_quantized
    qmodel = quantize_model(model, QuantizationConfig(n=4, m=8, scheme="RSVBS"))
    y = forward_quantized(qmodel, x)
"""

from .codebook import Codebook, LutEntry, apply_vbs, build_codebook, interval_level, select_shift
from .codec import CodeStream, decode_codes, encode_params, pack_codes, unpack_codes
from .distribution import EmpiricalDistribution
from .errors import (
    ConfigError,
    CorruptionError,
    DataError,
    DegenerateDistribution,
    DegenerateSpan,
    EncodingError,
    FormatError,
    LutQuantError,
    ShapeError,
    ShiftError,
)
from .fixedpoint import Q1_7, FixedValue, QFormat, cordic_magnitude_phase, from_fixed, to_fixed
from .inference import forward_float, forward_integer, forward_quantized
from .metrics import footprint, footprint_of, quant_error, scheme_sweep, sweep_csv
from .model_io import (
    Activation,
    FloatModel,
    LayerDef,
    QuantizedLayer,
    QuantizedModel,
    load_float_model,
    load_quantized_model,
    save_float_model,
    save_quantized_model,
)
from .partition import IntervalSet, Partition, QuantizationConfig, Scheme, build_intervals, interval_counts
from .quantize import dequantize_model, quantize_layer, quantize_model
from .synthetic import probe_inputs, synthetic_model

__version__ = "0.1.0"
