"""End-to-end acceptance checks.

Each test prints one ``PASS``/``FAIL`` line (visible even without ``-s``)
and then asserts the same condition, so a plain ``pytest -v`` run doubles as
the acceptance report.  Run this file directly for the report alone::

    python tests/test_acceptance.py
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import narrow_core_weights
from lutquant import synthetic_model
from lutquant.codebook import apply_vbs, build_codebook
from lutquant.codec import decode_codes, encode_params, pack_codes, unpack_codes
from lutquant.errors import ConfigError
from lutquant.fixedpoint import QFormat, cordic_magnitude_phase, from_fixed, to_fixed
from lutquant.metrics import BASELINE_8U, footprint, output_error
from lutquant.model_io import (
    dump_float_model,
    dump_quantized_model,
    parse_float_model,
    parse_quantized_model,
)
from lutquant.partition import QuantizationConfig, Scheme, interval_counts
from lutquant.quantize import quantize_model
from lutquant.synthetic import clamped_normal, probe_inputs


@pytest.fixture
def report(capsys):
    """``report(no, title, ok, detail, lines)`` prints the verdict line, then asserts it."""

    def _report(no, title, ok, detail="", lines=()):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {no}: {title}"
        if detail:
            line += f"  [{detail}]"
        with capsys.disabled():
            print("\n" + line)
            for extra in lines:
                print("    " + extra)
        assert ok, line

    return _report


class Timer:
    def __init__(self, budget):
        self.budget = budget

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

    @property
    def ok(self):
        return self.elapsed < self.budget

    def __str__(self):
        return f"{self.elapsed:.2f}s of {self.budget:g}s"


def test_footprint_table(report):
    with Timer(1) as t:
        arch = [1032, 256, 129]
        rows = {w: footprint(arch, w) for w in [(8, 8), (4, 4), (4, 8)]}
        got = {w: (fp.total, round(-100 * fp.reduction, 1) + 0.0) for w, fp in rows.items()}
    want = {(8, 8): (297216, 0.0), (4, 4): (148608, -50.0), (4, 8): (165120, -44.4)}
    report(1, "memory footprint 1032->256->129", got == want and t.ok, f"{got}; {t}")


def test_vbs_bit_exact(report):
    with Timer(1) as t:
        u, sign = apply_vbs(0.02099609375, 4, 8)
        back = sign * u * 2.0 ** -(8 + 4)
    ok = format(u, "08b") == "01010110" and back == 0.02099609375 and t.ok
    report(2, "VBS entry 0.02099609375 (m=8, k=4)", ok, f"u={u:08b}, decoded {back!r}; {t}")


def _counts_direct(n, ratio):
    base = math.floor(Fraction(2 ** n) / (1 + Fraction(ratio)))
    n_ext = base + (base % 2)
    n_int = 2 ** n - n_ext
    return (n_ext, n_int) if n_ext >= 2 and n_int >= 2 else None


def test_partition_counts(report):
    checked = mismatches = 0
    with Timer(1) as t:
        for n in range(2, 9):
            for ratio in (0.25, 0.5, 1, 2, 3, 4, 8):
                want = _counts_direct(n, ratio)
                if want is None:
                    try:
                        interval_counts(n, ratio)
                        mismatches += 1
                    except ConfigError:
                        pass
                    continue
                got = interval_counts(n, ratio)
                checked += 1
                mismatches += got != want or got[0] % 2 != 0
    report(3, "interval counts vs direct evaluation", mismatches == 0 and t.ok,
           f"{checked} valid cases, {mismatches} mismatches; {t}")


def test_output_error_ordering(report):
    held, lines = 0, []
    with Timer(30) as t:
        for seed in range(10):
            model = synthetic_model((64, 32, 16), sigma=0.1, seed=seed)
            probes = probe_inputs(64, 256, seed=seed)
            e8u = output_error(model, quantize_model(model, BASELINE_8U), probes)
            e4v = output_error(model, quantize_model(model, QuantizationConfig(scheme=Scheme.RSVBS)), probes)
            e4u = output_error(model, quantize_model(model, QuantizationConfig(scheme=Scheme.U)), probes)
            ok = e8u <= e4v < e4u
            held += ok
            lines.append(f"seed {seed}: 8-U {e8u:.3e}  4-RSVBS {e4v:.3e}  4-U {e4u:.3e}  {'ok' if ok else 'violated'}")
    report(4, "err(8-U) <= err(4-RSVBS) < err(4-U) on synthetic 64->32->16", held == 10 and t.ok,
           f"{held}/10 seeds; {t}", lines)


def test_collision(report):
    with Timer(1) as t:
        w = narrow_core_weights()
        rs = build_codebook(w, QuantizationConfig(n=4, m=8, scheme=Scheme.RS))
        vbs = build_codebook(w, QuantizationConfig(n=4, m=8, scheme=Scheme.RSVBS))
        width = rs.interval_set.widths[rs.interval_set.internal_mask].max()
    ok = width < 2.0 ** -7 and rs.distinct_levels < 16 and vbs.distinct_levels == 16 and t.ok
    report(5, "RS collides, RSVBS keeps 2^n levels", ok,
           f"internal width {width:.4f}; RS {rs.distinct_levels}, RSVBS {vbs.distinct_levels} "
           f"(k={vbs.internal_shift}); {t}")


def _weight_mse(w, scheme):
    cb = build_codebook(w, QuantizationConfig(scheme=scheme))
    return float(np.mean((decode_codes(encode_params(w, cb.interval_set), cb) - w) ** 2))


def test_weight_mse(report):
    held, ratios = 0, []
    with Timer(30) as t:
        for seed in range(10):
            w = clamped_normal(np.random.default_rng(seed), 100_000, 0.1)
            rsvbs, uni = _weight_mse(w, Scheme.RSVBS), _weight_mse(w, Scheme.U)
            held += rsvbs < uni
            ratios.append(rsvbs / uni)
    report(6, "4-bit RSVBS weight MSE < 4-bit U", held == 10 and t.ok,
           f"{held}/10 seeds, MSE ratio {min(ratios):.3f}..{max(ratios):.3f}; {t}")


def test_roundtrips(report):
    rng = np.random.default_rng(0)
    failures = []
    with Timer(10) as t:
        for seed in range(5):
            model = synthetic_model((40, 20, 10), seed=seed)
            fpm = dump_float_model(model)
            if dump_float_model(parse_float_model(fpm)) != fpm:
                failures.append(f"FPM1 seed {seed}")
            for scheme in Scheme:
                qlt = dump_quantized_model(quantize_model(model, QuantizationConfig(scheme=scheme)))
                if dump_quantized_model(parse_quantized_model(qlt)) != qlt:
                    failures.append(f"QLT1 {scheme.value} seed {seed}")
        for i in range(1000):
            n = 2 + i % 7
            codes = rng.integers(0, 1 << n, int(rng.integers(0, 200)))
            if not np.array_equal(unpack_codes(pack_codes(codes, n)), codes):
                failures.append(f"pack n={n} list {i}")
        tensors = 0
        for i in range(200):
            sigma = (0.02, 0.1, 0.3)[i % 3]
            w = clamped_normal(rng, int(rng.integers(2, 5000)), sigma)
            cfg = QuantizationConfig(n=2 + i % 7, scheme=list(Scheme)[i % 4])
            lut = build_codebook(w, cfg)
            once = decode_codes(encode_params(w, lut.interval_set), lut)
            twice = decode_codes(encode_params(once, lut.interval_set), lut)
            tensors += 1
            if not np.array_equal(once, twice):
                failures.append(f"idempotence tensor {i}")
    report(7, "FPM1/QLT1, pack/unpack and encode/decode roundtrips", not failures and t.ok,
           f"{len(failures)} failures {failures[:3]}; {tensors} tensors; {t}")


def test_fixed_point(report):
    bad = 0
    with Timer(10) as t:
        for m in range(2, 13):
            fmt = QFormat(m, m - 1)
            for raw in range(fmt.raw_min, fmt.raw_max + 1):
                v = raw * fmt.resolution
                bad += to_fixed(v, fmt).raw != raw or from_fixed(to_fixed(v, fmt)) != v
        q15 = QFormat(16, 15)
        rng = np.random.default_rng(8)
        worst_mag = worst_phase = worst_plain = 0.0
        for re, im in rng.uniform(-0.7, 0.7, (1000, 2)):
            a, b = to_fixed(re, q15), to_fixed(im, q15)
            mag, ph = cordic_magnitude_phase(a, b, iterations=16)
            x, y = from_fixed(a), from_fixed(b)
            m_ref, p_ref = math.hypot(x, y), math.atan2(y, x)
            dp = abs((ph - p_ref + math.pi) % (2 * math.pi) - math.pi)
            worst_mag = max(worst_mag, abs(mag - m_ref) / m_ref)
            worst_phase = max(worst_phase, dp / math.pi)  # phase error relative to full scale
            worst_plain = max(worst_plain, dp / abs(p_ref))
    ok = bad == 0 and worst_mag <= 1e-3 and worst_phase <= 1e-3 and t.ok
    report(8, "Q-format roundtrip m<=12 and 16-iteration CORDIC", ok,
           f"{bad} roundtrip errors; magnitude rel {worst_mag:.1e}, phase rel to pi {worst_phase:.1e} "
           f"(rel to own angle {worst_plain:.1e}); {t}")


def test_bandwidth(report):
    with Timer(1) as t:
        counts = [1, 7, 1000, 1032 * 256, 256 * 129]
        codes = [np.zeros(c, dtype=np.int64) for c in counts]
        ok = all(2 * pack_codes(c, 4).nbits == pack_codes(c, 8).nbits for c in codes)
        ok &= 2 * footprint([1032, 256, 129], (4, 4)).total == footprint([1032, 256, 129], (8, 8)).total
    report(9, "4-bit codes use half the bits of 8-bit codes", ok and t.ok, str(t))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
