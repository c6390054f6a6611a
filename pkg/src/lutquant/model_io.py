"""Float-model (FPM1) and quantized-model (QLT1) containers.

Both formats are little-endian.  See ``docs/formats.md`` for byte layouts and
hex dumps.

FPM1::

    b"FPM1"  u32 layer_count
    per layer: u32 out_dim, u32 in_dim, u8 activation,
               f32[out_dim*in_dim] weights (row-major), f32[out_dim] bias

QLT1::

    b"QLT1"  u32 layer_count
    per layer: u32 out_dim, u32 in_dim, u8 scheme, u8 activation, u8 n, u8 m,
               2**n LUT records {u16 magnitude, u8 sign, u8 k, u8 partition},
               i8[out_dim] bias (Q1.7 raw),
               ceil(out_dim*in_dim*n/8) bytes of packed codes
"""

from __future__ import annotations

import enum
import io
import logging
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .codebook import Codebook, LutEntry
from .codec import CodeStream, packed_size, unpack_codes
from .errors import CorruptionError, DataError, FormatError, ShapeError
from .partition import Partition, Scheme

__all__ = [
    "Activation",
    "LayerDef",
    "FloatModel",
    "QuantizedLayer",
    "QuantizedModel",
    "load_float_model",
    "save_float_model",
    "load_quantized_model",
    "save_quantized_model",
    "read_magic",
]

log = logging.getLogger(__name__)

FPM_MAGIC = b"FPM1"
QLT_MAGIC = b"QLT1"
_LUT_RECORD = struct.Struct("<HBBB")


class Activation(enum.IntEnum):
    NONE = 0
    RELU = 1

    @classmethod
    def parse(cls, name) -> "Activation":
        if isinstance(name, Activation):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise ValueError(f"unknown activation {name!r}") from None

    def __call__(self, x):
        return np.maximum(x, 0) if self is Activation.RELU else x


@dataclass(frozen=True, eq=False)
class LayerDef:
    weights: np.ndarray  # (out_dim, in_dim), row = output neuron
    bias: np.ndarray
    activation: Activation = Activation.RELU

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, ndmin=2)
        b = np.array(self.bias, dtype=np.float64).ravel()
        if w.ndim != 2 or w.size == 0:
            raise ShapeError("weights must be a non-empty matrix")
        if b.size != w.shape[0]:
            raise ShapeError(f"bias length {b.size} != out_dim {w.shape[0]}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "activation", Activation.parse(self.activation))

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True, eq=False)
class FloatModel:
    layers: tuple
    clamped: int = 0  # values clamped into [-1, 1] when loaded

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ShapeError(f"layer out_dim {a.out_dim} feeds in_dim {b.in_dim}")

    @property
    def dims(self) -> list:
        return [(layer.in_dim, layer.out_dim) for layer in self.layers]

    def same_as(self, other: "FloatModel") -> bool:
        return len(self.layers) == len(other.layers) and all(
            a.activation == b.activation
            and np.array_equal(a.weights, b.weights)
            and np.array_equal(a.bias, b.bias)
            for a, b in zip(self.layers, other.layers)
        )


@dataclass(frozen=True)
class QuantizedLayer:
    out_dim: int
    in_dim: int
    scheme: Scheme
    n: int
    m: int
    lut: Codebook
    codes: CodeStream
    bias_q: tuple  # Q1.7 raw integers
    activation: Activation = Activation.RELU

    @property
    def weight_count(self) -> int:
        return self.out_dim * self.in_dim

    def check(self):
        """Raise if the layer breaks a container invariant."""
        if len(self.lut) != 1 << self.n:
            raise FormatError(f"LUT has {len(self.lut)} entries, expected {1 << self.n}")
        if self.codes.n != self.n or self.codes.count != self.weight_count:
            raise FormatError("code stream does not match layer shape")
        if len(self.codes.data) != packed_size(self.weight_count, self.n):
            raise FormatError("code payload has the wrong byte length")
        if len(self.bias_q) != self.out_dim or any(not -128 <= b <= 127 for b in self.bias_q):
            raise FormatError("bias must hold out_dim signed 8-bit values")
        for e in self.lut.entries:
            if not 0 <= e.magnitude < 1 << self.m or e.m != self.m or not 0 <= e.k < 256:
                raise FormatError(f"LUT entry {e.code} does not fit m={self.m}")
        tail = self.codes.nbits % 8
        if tail and self.codes.data[-1] >> tail:
            raise FormatError("code stream pad bits are not zero")

    def code_array(self) -> np.ndarray:
        return unpack_codes(self.codes).reshape(self.out_dim, self.in_dim)

    def bias_values(self) -> np.ndarray:
        return np.asarray(self.bias_q, dtype=np.float64) / 128.0


@dataclass(frozen=True)
class QuantizedModel:
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

class _Reader:
    def __init__(self, data: bytes):
        self.buf = memoryview(data)
        self.pos = 0

    def take(self, size: int) -> memoryview:
        if self.pos + size > len(self.buf):
            raise CorruptionError(f"truncated payload at byte {self.pos}, wanted {size} more")
        chunk = self.buf[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def _read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def read_magic(path) -> bytes:
    with open(path, "rb") as f:
        return f.read(4)


def _write_atomic(path, data: bytes) -> int:
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    return len(data)


# --------------------------------------------------------------------------
# FPM1
# --------------------------------------------------------------------------

def parse_float_model(data: bytes) -> FloatModel:
    r = _Reader(data)
    if len(data) < 4 or bytes(r.take(4)) != FPM_MAGIC:
        raise FormatError("not an FPM1 file (bad magic)")
    (count,) = r.unpack("<I")
    if count == 0:
        raise FormatError("model has no layers")
    layers, clamped = [], 0
    for _ in range(count):
        out_dim, in_dim, act = r.unpack("<IIB")
        if out_dim == 0 or in_dim == 0:
            raise FormatError("layer dimensions must be positive")
        try:
            act = Activation(act)
        except ValueError:
            raise FormatError(f"unknown activation tag {act}") from None
        w = np.frombuffer(r.take(4 * out_dim * in_dim), dtype="<f4").astype(np.float64)
        b = np.frombuffer(r.take(4 * out_dim), dtype="<f4").astype(np.float64)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise DataError("model contains non-finite values")
        clamped += int(np.sum(np.abs(w) > 1) + np.sum(np.abs(b) > 1))
        layers.append(LayerDef(np.clip(w, -1, 1).reshape(out_dim, in_dim), np.clip(b, -1, 1), act))
    if r.pos != len(data):
        raise CorruptionError(f"{len(data) - r.pos} trailing bytes after last layer")
    if clamped:
        log.info("clamped %d value(s) into [-1, 1]", clamped)
    return FloatModel(tuple(layers), clamped)


def load_float_model(path) -> FloatModel:
    """Read an FPM1 file, clamping weights and biases into [-1, 1]."""
    return parse_float_model(_read_bytes(path))


def dump_float_model(model: FloatModel) -> bytes:
    if not model.layers:
        raise FormatError("model has no layers")
    out = io.BytesIO()
    out.write(FPM_MAGIC)
    out.write(struct.pack("<I", len(model.layers)))
    for layer in model.layers:
        out.write(struct.pack("<IIB", layer.out_dim, layer.in_dim, int(layer.activation)))
        out.write(layer.weights.astype("<f4").tobytes())
        out.write(layer.bias.astype("<f4").tobytes())
    return out.getvalue()


def save_float_model(model: FloatModel, path) -> int:
    return _write_atomic(path, dump_float_model(model))


# --------------------------------------------------------------------------
# QLT1
# --------------------------------------------------------------------------

def dump_quantized_model(model: QuantizedModel) -> bytes:
    if not model.layers:
        raise FormatError("model has no layers")
    out = io.BytesIO()
    out.write(QLT_MAGIC)
    out.write(struct.pack("<I", len(model.layers)))
    for layer in model.layers:
        layer.check()
        out.write(struct.pack("<IIBBBB", layer.out_dim, layer.in_dim, layer.scheme.code,
                              int(layer.activation), layer.n, layer.m))
        for e in layer.lut.entries:
            out.write(_LUT_RECORD.pack(e.magnitude, 1 if e.sign < 0 else 0, e.k, int(e.partition)))
        out.write(np.asarray(layer.bias_q, dtype=np.int8).tobytes())
        out.write(layer.codes.data)
    return out.getvalue()


def save_quantized_model(model: QuantizedModel, path) -> int:
    """Write ``model`` as QLT1 and return the number of bytes written."""
    return _write_atomic(path, dump_quantized_model(model))


def parse_quantized_model(data: bytes) -> QuantizedModel:
    r = _Reader(data)
    if len(data) < 4 or bytes(r.take(4)) != QLT_MAGIC:
        raise FormatError("not a QLT1 file (bad magic)")
    (count,) = r.unpack("<I")
    if count == 0:
        raise FormatError("model has no layers")
    layers = []
    for _ in range(count):
        out_dim, in_dim, scheme, act, n, m = r.unpack("<IIBBBB")
        if out_dim == 0 or in_dim == 0 or not 1 <= n <= 16 or not n <= m <= 16:
            raise FormatError(f"bad layer header ({out_dim}x{in_dim}, n={n}, m={m})")
        try:
            scheme, act = Scheme.from_code(scheme), Activation(act)
        except (IndexError, ValueError):
            raise FormatError("unknown scheme or activation tag") from None
        entries = []
        for code in range(1 << n):
            u, sign, k, part = _LUT_RECORD.unpack(r.take(_LUT_RECORD.size))
            if sign > 1 or part > 1:
                raise FormatError(f"bad LUT record for code {code}")
            entries.append(LutEntry(code, u, -1 if sign else 1, k, Partition(part), m))
        bias = tuple(int(b) for b in np.frombuffer(r.take(out_dim), dtype=np.int8))
        payload = bytes(r.take(packed_size(out_dim * in_dim, n)))
        layer = QuantizedLayer(out_dim, in_dim, scheme, n, m, Codebook(tuple(entries), scheme, n, m),
                               CodeStream(payload, n, out_dim * in_dim), bias, act)
        layer.check()
        layers.append(layer)
    if r.pos != len(data):
        raise CorruptionError(f"{len(data) - r.pos} trailing bytes after last layer")
    return QuantizedModel(tuple(layers))


def load_quantized_model(path) -> QuantizedModel:
    return parse_quantized_model(_read_bytes(path))
