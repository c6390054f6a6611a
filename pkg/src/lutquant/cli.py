"""``lutquant`` command line.

Exit codes: 0 success, 1 I/O or data error, 2 configuration error.
Set ``LUTQUANT_LOG`` (DEBUG, INFO, WARNING, ...) to change log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import metrics
from .distribution import EmpiricalDistribution
from .errors import ConfigError, CorruptionError, DataError, FormatError, ShapeError
from .inference import forward_float, forward_quantized
from .model_io import (
    QLT_MAGIC,
    load_float_model,
    load_quantized_model,
    read_magic,
    save_float_model,
    save_quantized_model,
)
from .partition import QuantizationConfig, Scheme
from .quantize import dequantize_model, quantize_model
from .synthetic import probe_inputs, synthetic_model

log = logging.getLogger("lutquant")

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2

_CFG_KEYS = ("n", "m", "ratio", "p_start", "p_stop", "scheme", "k_max")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _scheme_list(text: str) -> list:
    try:
        return [Scheme.parse(t) for t in text.split(",") if t.strip()]
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_config_flags(p, prefix: str = ""):
    dash = f"--{prefix}" if prefix else "--"
    dest = prefix.replace("-", "_")
    p.add_argument(f"{dash}n", dest=f"{dest}n", type=int, help="code bits")
    p.add_argument(f"{dash}m", dest=f"{dest}m", type=int, help="magnitude bits")
    if not prefix:
        p.add_argument("--ratio", type=float, help="internal/external interval ratio")
        p.add_argument("--p-start", dest="p_start", type=float)
        p.add_argument("--p-stop", dest="p_stop", type=float)
        p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument(f"{dash}scheme", dest=f"{dest}scheme", type=Scheme.parse,
                   help="U, UVBS, RS or RSVBS")


def _parse_override(text: str) -> tuple:
    """``"2:n=8,scheme=U"`` -> (1, {"n": 8, "scheme": "U"}) with a 0-based index."""
    try:
        idx, body = text.split(":", 1)
        fields = {}
        for item in body.split(","):
            key, val = item.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _CFG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            fields[key] = val.strip()
        return int(idx) - 1, fields
    except ValueError:
        raise ConfigError(f"bad --layer-config {text!r}; expected LAYER:key=value,...") from None


def _coerce(fields: dict) -> dict:
    out = {}
    for k, v in fields.items():
        if v is None:
            continue
        if k in ("n", "m", "k_max"):
            out[k] = int(v)
        elif k in ("ratio", "p_start", "p_stop"):
            out[k] = float(v)
        else:
            out[k] = Scheme.parse(v)
    return out


def _build_configs(args, nlayers: int) -> list:
    """defaults <- config file <- flags, then per-layer overrides (file, then flags)."""
    base, per_layer = {}, {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            doc = json.load(f)
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        base.update({k: doc[k] for k in _CFG_KEYS if k in doc})
        for key, fields in (doc.get("layers") or {}).items():
            per_layer.setdefault(int(key) - 1, {}).update(fields)
    base.update({k: getattr(args, k) for k in _CFG_KEYS if getattr(args, k, None) is not None})
    for text in getattr(args, "layer_config", None) or []:
        idx, fields = _parse_override(text)
        per_layer.setdefault(idx, {}).update(fields)
    if "p_start" in base and "p_stop" not in base:
        base["p_stop"] = 1.0 - float(base["p_start"])
    cfgs = []
    for i in range(nlayers):
        fields = _coerce({**base, **per_layer.get(i, {})})
        if "p_start" in per_layer.get(i, {}) and "p_stop" not in per_layer.get(i, {}):
            fields["p_stop"] = 1.0 - fields["p_start"]
        cfgs.append(QuantizationConfig(**fields))
    bad = [i + 1 for i in per_layer if not 0 <= i < nlayers]
    if bad:
        raise ConfigError(f"layer override for missing layer(s) {bad}")
    return cfgs


def _emit(rows: list, columns, fmt: str, out):
    if fmt == "jsonl":
        for row in rows:
            out.write(json.dumps({c: row[c] for c in columns}) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([metrics.format_value(row[c]) for c in columns])
    else:
        cells = [[str(c) for c in columns]] + [
            [f"{row[c]:.6g}" if isinstance(row[c], float) else str(row[c]) for c in columns] for row in rows
        ]
        widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
        for r in cells:
            out.write("  ".join(v.rjust(w) for v, w in zip(r, widths)) + "\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_gen_synthetic(args) -> int:
    if len(args.dims) < 2 or min(args.dims) <= 0:
        raise ConfigError("--dims needs at least two positive widths")
    model = synthetic_model(args.dims, args.sigma, args.seed)
    nbytes = save_float_model(model, args.output)
    log.info("wrote %s (%d bytes)", args.output, nbytes)
    return EXIT_OK


def cmd_analyze(args) -> int:
    model = load_float_model(args.model)
    p_start = args.p_start
    rows = []
    for i, layer in enumerate(model.layers):
        w = layer.weights.ravel()
        dist = EmpiricalDistribution(w)
        lo = hi = float("nan")
        if not dist.is_degenerate:
            lo, hi = dist.inv_cdf(p_start), dist.inv_cdf(1 - p_start)
        rows.append({"layer": i + 1, "out_dim": layer.out_dim, "in_dim": layer.in_dim,
                     "count": dist.count, "min": dist.a_l, "max": dist.a_h,
                     "mean": float(w.mean()), "std": float(w.std()),
                     "q_start": lo, "q_stop": hi})
    cols = ("layer", "out_dim", "in_dim", "count", "min", "max", "mean", "std", "q_start", "q_stop")
    _emit(rows, cols, args.format, sys.stdout)
    if model.clamped:
        log.warning("%d value(s) were clamped into [-1, 1] on load", model.clamped)
    return EXIT_OK


def cmd_quantize(args) -> int:
    model = load_float_model(args.model)
    cfgs = _build_configs(args, len(model.layers))
    qmodel = quantize_model(model, cfgs)
    nbytes = save_quantized_model(qmodel, args.output)
    fp = metrics.footprint_of(qmodel)
    rows = []
    for i, (q, cfg) in enumerate(zip(qmodel.layers, cfgs)):
        iv = q.lut.interval_set
        rows.append({"layer": i + 1, "scheme": q.scheme.value, "n": q.n, "m": q.m,
                     "n_ext": iv.n_ext, "n_int": iv.n_int, "k": q.lut.internal_shift,
                     "distinct_levels": q.lut.distinct_levels, "code_bytes": fp.layer_bytes[i]})
    _emit(rows, ("layer", "scheme", "n", "m", "n_ext", "n_int", "k", "distinct_levels", "code_bytes"),
          args.format, sys.stdout)
    log.info("wrote %s (%d bytes, %d clamped on load)", args.output, nbytes, model.clamped)
    return EXIT_OK


def cmd_dequantize(args) -> int:
    save_float_model(dequantize_model(load_quantized_model(args.model)), args.output)
    return EXIT_OK


def _load_any(path):
    if read_magic(path) == QLT_MAGIC:
        return load_quantized_model(path), True
    return load_float_model(path), False


def _read_inputs(path) -> np.ndarray:
    if str(path).endswith(".npy"):
        return np.load(path)
    return np.loadtxt(path, delimiter=",", ndmin=2)


def cmd_infer(args) -> int:
    model, quantized = _load_any(args.model)
    in_dim = model.layers[0].in_dim
    x = _read_inputs(args.input) if args.input else probe_inputs(in_dim, args.probes, args.seed)
    x = np.atleast_2d(x)
    if quantized:
        mode = "dequantized" if args.mode == "float" else args.mode
        y = forward_quantized(model, x, mode)
    else:
        if args.mode != "float":
            raise ConfigError("--mode dequantized/integer needs a QLT1 model")
        y = forward_float(model, x)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow([f"y{j}" for j in range(y.shape[1])])
    for row in y:
        w.writerow([repr(float(v)) for v in row])
    return EXIT_OK


def cmd_footprint(args) -> int:
    if args.model:
        fp = metrics.footprint_of(load_quantized_model(args.model))
    else:
        if not args.arch or not args.widths:
            raise ConfigError("give --model or both --arch and --widths")
        fp = metrics.footprint(args.arch, args.widths)
    rows = [{"layer": i + 1, "code_bytes": b, "lut_bytes": lb, "bias_bytes": bb}
            for i, (b, lb, bb) in enumerate(zip(fp.layer_bytes, fp.lut_bytes, fp.bias_bytes))]
    rows.append({"layer": "total", "code_bytes": fp.total, "lut_bytes": sum(fp.lut_bytes),
                 "bias_bytes": sum(fp.bias_bytes)})
    _emit(rows, ("layer", "code_bytes", "lut_bytes", "bias_bytes"), args.format, sys.stdout)
    if args.format == "text":
        print(f"reference (8-bit): {fp.reference} bytes, reduction {-100 * fp.reduction:.1f}%")
    return EXIT_OK


def cmd_sweep(args) -> int:
    model = load_float_model(args.model)
    idx = args.layer - 1
    if not 0 <= idx < len(model.layers):
        raise ConfigError(f"--layer must be in 1..{len(model.layers)}")
    swept = _build_configs(args, len(model.layers))[idx]
    other = metrics.BASELINE_8U
    if args.other_n or args.other_m or args.other_scheme:
        other = metrics.BASELINE_8U.replace(**_coerce({"n": args.other_n, "m": args.other_m,
                                                       "scheme": args.other_scheme}))
    probes = probe_inputs(model.layers[0].in_dim, args.probes, args.seed)
    rows = metrics.scheme_sweep(model, idx, args.schemes, swept, other, probes)
    sys.stdout.write(metrics.sweep_csv(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lutquant", description="Range-split LUT weight quantization toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = dict(choices=("text", "csv", "jsonl"), default="text")

    s = sub.add_parser("gen-synthetic", help="write a seeded clamped-normal FPM1 model")
    s.add_argument("--dims", type=_int_list, default=[64, 32, 16])
    s.add_argument("--sigma", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen_synthetic)

    s = sub.add_parser("analyze", help="per-layer distribution statistics")
    s.add_argument("model")
    s.add_argument("--p-start", dest="p_start", type=float, default=0.04)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("quantize", help="FPM1 -> QLT1")
    s.add_argument("model")
    s.add_argument("-o", "--output", required=True)
    _add_config_flags(s)
    s.add_argument("--layer-config", action="append", metavar="LAYER:key=value,...",
                   help="per-layer override, 1-based layer index; repeatable")
    s.add_argument("--config", help="JSON config file; flags win over it")
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_quantize)

    s = sub.add_parser("dequantize", help="QLT1 -> FPM1 with decoded weights")
    s.add_argument("model")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_dequantize)

    s = sub.add_parser("infer", help="run a model on inputs, print outputs as CSV")
    s.add_argument("model", help="FPM1 or QLT1 file")
    s.add_argument("--input", help=".npy or comma-separated text, one vector per row")
    s.add_argument("--probes", type=int, default=4, help="random inputs when --input is absent")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=("float", "dequantized", "integer"), default="float")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("footprint", help="external-memory bytes of the weight codes")
    s.add_argument("--arch", type=_int_list, help="layer widths, e.g. 1032,256,129")
    s.add_argument("--widths", type=_int_list, help="code bits per layer, e.g. 4,8")
    s.add_argument("--model", help="QLT1 file instead of --arch/--widths")
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_footprint)

    s = sub.add_parser("sweep", help="CSV of error metrics per scheme for one layer")
    s.add_argument("model")
    s.add_argument("--layer", type=int, default=1, help="1-based layer to sweep")
    s.add_argument("--schemes", type=_scheme_list, default=list(Scheme))
    _add_config_flags(s)
    _add_config_flags(s, "other-")
    s.add_argument("--config", help="JSON config file for the swept layer")
    s.add_argument("--probes", type=int, default=256)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LUTQUANT_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, FormatError, CorruptionError, DataError, ShapeError) as e:
        print(f"lutquant: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as e:
        print(f"lutquant: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
