"""Per-interval quantization levels, virtual bit shift and LUT assembly.

Every LUT entry is stored sign-magnitude: an unsigned m-bit magnitude ``u``,
a sign, and a shift ``k``.  The reconstructed weight is
``sign * u * 2**-(m + k)``.

* Non-VBS schemes (U, RS) quantize each level to signed Q1.(m-1), so ``u`` is
  always even and ``k == 0``.
* VBS schemes (UVBS, RSVBS) quantize to ``m + k`` fractional bits.  One shift
  is chosen per layer for the internal entries (all entries for UVBS);
  external entries keep ``k == 0``.

Levels are the interval mean rounded to the nearest grid point.  When that
point falls outside the interval and a neighbouring grid point lies inside,
the neighbour wins.  An interval holding no grid point at all adopts the
nearest level that maps back to its own interval.  Both rules keep
quantization idempotent, at the cost of extra rounding error for the few
entries they touch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .distribution import EmpiricalDistribution
from .errors import DegenerateDistribution, DegenerateSpan, ShiftError
from .fixedpoint import QFormat, from_fixed, round_half_away, to_fixed
from .partition import (
    IntervalSet,
    Partition,
    QuantizationConfig,
    Scheme,
    build_intervals,
    uniform_intervals,
)

__all__ = [
    "LutEntry",
    "Codebook",
    "interval_level",
    "interval_means",
    "select_shift",
    "apply_vbs",
    "build_codebook",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LutEntry:
    code: int
    magnitude: int
    sign: int
    k: int
    partition: Partition
    m: int

    @property
    def reconstructed(self) -> float:
        return self.sign * self.magnitude * 2.0 ** -(self.m + self.k)


@dataclass(frozen=True)
class Codebook:
    entries: tuple
    scheme: Scheme
    n: int
    m: int
    interval_set: IntervalSet | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.entries) != 1 << self.n:
            raise ValueError(f"LUT needs {1 << self.n} entries, got {len(self.entries)}")
        if [e.code for e in self.entries] != list(range(1 << self.n)):
            raise ValueError("LUT codes must be consecutive from 0")

    def __len__(self):
        return len(self.entries)

    @property
    def levels(self) -> np.ndarray:
        return np.array([e.reconstructed for e in self.entries])

    @property
    def distinct_levels(self) -> int:
        return int(np.unique(self.levels).size)

    @property
    def internal_shift(self) -> int:
        ks = [e.k for e in self.entries if e.partition == Partition.INTERNAL]
        return max(ks, default=0)


def interval_level(params, interval, fmt: QFormat) -> float:
    """Mean of ``params`` quantized to ``fmt``; midpoint if ``params`` is empty."""
    params = np.asarray(params, dtype=np.float64)
    b_l, b_u = interval
    mean = float(np.mean(params)) if params.size else 0.5 * (b_l + b_u)
    return from_fixed(to_fixed(mean, fmt))


def interval_means(values, intervals: IntervalSet) -> tuple[np.ndarray, np.ndarray]:
    """Exact member mean per interval (midpoint for empty ones) and member counts."""
    values = np.asarray(values, dtype=np.float64).ravel()
    idx = intervals.locate(values)
    nb = len(intervals)
    counts = np.bincount(idx, minlength=nb)
    sums = np.bincount(idx, weights=values, minlength=nb)
    e = intervals.edges
    mid = 0.5 * (e[:-1] + e[1:])
    means = np.where(counts > 0, sums / np.maximum(counts, 1), mid)
    return means, counts


def select_shift(levels, k_max: int = 8) -> int:
    """Largest ``k <= k_max`` with ``max|level| < 2**-k`` (strict)."""
    levels = np.asarray(levels, dtype=np.float64)
    if levels.size == 0:
        raise ValueError("need at least one level")
    peak = float(np.max(np.abs(levels)))
    if peak >= 1.0:
        raise ShiftError(f"level magnitude {peak} is not below 1")
    k = 0
    while k < k_max and peak < 2.0 ** -(k + 1):
        k += 1
    return k


def apply_vbs(level: float, k: int, m: int) -> tuple[int, int]:
    """Keep the m low bits of an (m+k)-bit magnitude: ``u = round(|level| * 2**(m+k))``."""
    if abs(level) >= 2.0 ** -k:
        raise ShiftError(f"|{level}| is not below 2**-{k}")
    u = int(round_half_away(abs(level) * 2.0 ** (m + k)))
    if u >= 1 << m:
        raise ShiftError(f"|{level}| rounds to 2**-{k} and overflows {m} bits")
    return u, (-1 if level < 0 else 1)


def _sign(x: float) -> int:
    return -1 if x < 0 else 1


def _grid_raw(mean: float, scale: int, limit: int, inside) -> int:
    """Signed grid index nearest ``mean`` on a ``1/scale`` grid, |raw| <= limit.

    If the nearest point falls outside the entry's own interval but a
    neighbouring grid point lies inside, the neighbour is used instead, so
    re-quantizing a reconstructed level returns the same code.
    """
    raw = int(np.clip(round_half_away(mean * scale), -limit, limit))
    if inside(raw / scale):
        return raw
    for cand in sorted((raw - 1, raw + 1), key=lambda r: abs(r / scale - mean)):
        if abs(cand) <= limit and inside(cand / scale):
            return cand
    return raw


def _q1_entry(code, mean, m, part, inside=lambda v: True) -> LutEntry:
    # symmetric Q1.(m-1): -1.0 has no sign-magnitude twin, saturate to -(1 - 2**-(m-1))
    raw = _grid_raw(mean, 1 << (m - 1), (1 << (m - 1)) - 1, inside)
    return LutEntry(code, 2 * abs(raw), _sign(raw), 0, part, m)


def _vbs_entry(code, mean, k, m, part, inside=lambda v: True) -> LutEntry:
    raw = _grid_raw(mean, 1 << (m + k), (1 << m) - 1, inside)
    return LutEntry(code, abs(raw), _sign(raw), k, part, m)


def _fitting_shift(levels, m: int, k_max: int) -> int:
    """select_shift, lowered until the rounded peak magnitude fits in m bits."""
    peak = float(np.max(np.abs(levels)))
    if peak >= 1.0:
        return 0
    k = select_shift(levels, k_max)
    while k > 0 and round_half_away(peak * 2.0 ** (m + k)) >= 1 << m:
        k -= 1
    return k


def _constant_codebook(value: float, cfg: QuantizationConfig) -> Codebook:
    size = 1 << cfg.n
    intervals = IntervalSet(np.full(size + 1, value), (Partition.INTERNAL,) * size, 0, size)
    if cfg.scheme.vbs:
        k = _fitting_shift([value], cfg.m, cfg.k_max)
        entries = [_vbs_entry(c, value, k, cfg.m, Partition.INTERNAL) for c in range(size)]
    else:
        entries = [_q1_entry(c, value, cfg.m, Partition.INTERNAL) for c in range(size)]
    return Codebook(tuple(entries), cfg.scheme, cfg.n, cfg.m, intervals)


def build_codebook(values, cfg: QuantizationConfig) -> Codebook:
    """LUT for one layer's parameters under ``cfg.scheme``.

    ``values`` may be an :class:`EmpiricalDistribution` or any array of
    parameters.  Codes follow ascending interval order, so levels are
    non-decreasing in code.
    """
    dist = values if isinstance(values, EmpiricalDistribution) else EmpiricalDistribution(values)
    try:
        intervals = build_intervals(dist, cfg)
    except DegenerateDistribution:
        return _constant_codebook(dist.a_l, cfg)
    except DegenerateSpan:
        log.warning("internal span collapsed; falling back to uniform intervals")
        intervals = uniform_intervals(dist.a_l, dist.a_h, cfg.n)

    means, _ = interval_means(dist.sorted_values, intervals)
    internal = intervals.internal_mask
    m = cfg.m

    def inside(code):
        return lambda v: intervals.locate(v) == code

    if cfg.scheme.vbs:
        k = _fitting_shift(means[internal], m, cfg.k_max)
        entries = [
            _vbs_entry(c, lvl, k if internal[c] else 0, m, intervals.labels[c], inside(c))
            for c, lvl in enumerate(means)
        ]
    else:
        entries = [_q1_entry(c, lvl, m, intervals.labels[c], inside(c)) for c, lvl in enumerate(means)]
    return Codebook(tuple(_settle(entries, intervals)), cfg.scheme, cfg.n, m, intervals)


def _settle(entries, intervals: IntervalSet) -> list:
    """Make decode(encode(level)) == level for every entry where possible.

    An interval too narrow to hold a grid point gets a level that encodes to
    some other interval.  Such an entry adopts the nearest level that does map
    back to its own interval and that the entry can represent exactly with its
    own m and k.
    """
    levels = np.array([e.reconstructed for e in entries])
    home = intervals.locate(levels)
    stable = levels[home == np.arange(len(entries))]
    out = list(entries)
    for c, e in enumerate(entries):
        if home[c] == c or levels[home[c]] == levels[c]:
            continue
        raw = stable * 2.0 ** (e.m + e.k)
        ok = (raw == np.round(raw)) & (np.abs(raw) < 1 << e.m)
        if not ok.any():
            continue
        target = stable[ok][np.argmin(np.abs(stable[ok] - levels[c]))]
        u = int(abs(target) * 2.0 ** (e.m + e.k))
        out[c] = LutEntry(e.code, u, _sign(target), e.k, e.partition, e.m)
    return out
