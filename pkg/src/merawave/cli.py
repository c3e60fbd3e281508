"""Command-line entry point: ``merawave {train,compress,sweep,hurst,filters,synth}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure. Set ``MERAWAVE_LOG`` (e.g. ``INFO``) for progress output.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .compression import (
    DEFAULT_RHOS,
    FilterBankTransform,
    StackTransform,
    check_rho,
    compress_window,
    kept_count,
    psnr,
    rd_sweep,
)
from .errors import ConfigError, DataError, NumericalError
from .filterbank import (
    FirFilterPair,
    daubechies4_filters,
    export_filters,
    frequency_response,
    haar_filters,
)
from .lrd import delta_h, fgn_generate, hurst_av, max_scale, wavelet_spectrum
from .training import TrainingConfig, train_windows
from .transform import haar_stack

log = logging.getLogger("merawave")

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4

WAVELETS = {"db4": daubechies4_filters, "haar": haar_filters}


def _config_keys_epilog() -> str:
    lines = ["overridable keys (--set KEY=VALUE) and defaults:"]
    for k, v in TrainingConfig().to_dict().items():
        lines.append(f"  {k:<14} {v}")
    lines.append("  iterations     total count, split evenly into stage1/stage2")
    return "\n".join(lines)


def _parse_overrides(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not KEY=VALUE")
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _build_config(args) -> TrainingConfig:
    base = TrainingConfig().to_dict()
    if getattr(args, "config", None):
        if not Path(args.config).is_file():
            raise ConfigError(f"config file {args.config} not found")
        base = io.load_config(args.config).to_dict()
    overrides = _parse_overrides(getattr(args, "set", None))
    if "iterations" in overrides:
        base.pop("stage1")
        base.pop("stage2")
    return TrainingConfig.from_dict({**base, **overrides})


def _require_input(path):
    if not Path(path).is_file():
        raise DataError(f"input {path} not found")


def _load_windows(args, levels: int):
    plan = io.WindowPlan(args.window_size, args.stride)
    plan.check_levels(levels)
    series = io.read_series(args.input, args.format, allow_negative=not args.strict_traffic)
    return series, io.windowize(series, plan)


def _add_series_args(p, multi: bool = False):
    if multi:
        p.add_argument("--input", required=True, nargs="+", help="series CSV file(s)")
    else:
        p.add_argument("--input", required=True, help="series CSV file")
    p.add_argument("--format", default="csv_single_column", choices=io.FORMATS)
    p.add_argument("--window-size", type=int, default=1024)
    p.add_argument("--stride", type=int, default=1024)
    p.add_argument("--strict-traffic", action="store_true",
                   help="reject negative samples (byte-count traces)")


def _add_config_args(p):
    p.add_argument("--config", help="JSON file with configuration keys")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a configuration key")


def _stack_transforms(stack_path, n_windows: int):
    _, stacks = io.read_stacks(stack_path)
    if len(stacks) == 1:
        return [StackTransform(stacks[0][1])] * n_windows, stacks[0][1].shape[0]
    by_window = {}
    for windows, s in stacks:
        for i in windows:
            by_window[i] = StackTransform(s)
    missing = [i for i in range(n_windows) if i not in by_window]
    if missing:
        raise DataError(f"stack document has no stack for window(s) {missing[:5]}")
    return [by_window[i] for i in range(n_windows)], stacks[0][1].shape[0]


# -- commands -----------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _build_config(args)
    _require_input(args.input)
    out = io.ensure_dir(args.out)
    _, windows = _load_windows(args, cfg.levels)
    rows, entries = [], []
    if args.multi_window:
        res = train_windows(list(windows), cfg)
        entries.append((range(len(windows)), res.stack))
        rows += [("all", k + 1, b.sparsity, b.mse, b.total) for k, b in enumerate(res.trace)]
    else:
        for i, w in enumerate(windows):
            res = train_windows([w], cfg)
            entries.append(([i], res.stack))
            rows += [(i, k + 1, b.sparsity, b.mse, b.total) for k, b in enumerate(res.trace)]
            log.info("window %d/%d trained", i + 1, len(windows))
    io.write_json(out / "stack.json", io.stack_document(entries, cfg))
    io.write_csv(out / "loss.csv", ["window", "iteration", "sparsity", "mse", "total"], rows)
    return 0


def cmd_compress(args) -> int:
    rho = check_rho(args.rho)
    cfg = _build_config(args)
    _require_input(args.input)
    if args.stack and not Path(args.stack).is_file():
        raise ConfigError(f"stack file {args.stack} not found")
    out = io.ensure_dir(args.out)
    levels = cfg.levels
    if args.stack:
        levels = io.read_stacks(args.stack)[1][0][1].shape[0]
    series, windows = _load_windows(args, levels)
    if args.stack:
        transforms, _ = _stack_transforms(args.stack, len(windows))
    else:
        transforms = [FilterBankTransform(WAVELETS[args.transform](), levels)] * len(windows)
    recon, scores, dropped = [], [], []
    for w, t in zip(windows, transforms):
        r, e = compress_window(w, t, rho)
        recon.append(r)
        scores.append(psnr(w, r))
        dropped.append(e)
    io.write_series(out / "reconstructed.csv", np.concatenate(recon))
    io.write_json(out / "compress.json", {
        "trace": series.label,
        "transform": "learned" if args.stack else args.transform,
        "rho": rho,
        "kept_per_window": kept_count(rho, windows.shape[1]),
        "windows": len(windows),
        "psnr_db_mean": float(np.mean(scores)),
        "psnr_db": [float(s) for s in scores],
        "dropped_energy": [float(e) for e in dropped],
    })
    return 0


def _parse_rhos(text) -> list[float]:
    try:
        rhos = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse retention ratios {text!r}") from None
    if not rhos:
        raise ConfigError("no retention ratios given")
    return [check_rho(r) for r in rhos]


def cmd_sweep(args) -> int:
    rhos = _parse_rhos(args.rhos)
    cfg = _build_config(args)
    for path in args.input:
        _require_input(path)
    if args.stack and not Path(args.stack).is_file():
        raise ConfigError(f"stack file {args.stack} not found")
    out = io.ensure_dir(args.out)
    levels = io.read_stacks(args.stack)[1][0][1].shape[0] if args.stack else cfg.levels
    estimator = WAVELETS[args.wavelet]()
    baselines = ["haar", "db4"]
    header = ["trace", "transform", "rho", "kept", "psnr_db"]
    header += [f"delta_psnr_vs_{b}" for b in baselines]
    header += ["delta_h"] if not args.no_delta_h else []
    rows = []
    for path in args.input:
        a = argparse.Namespace(**{**vars(args), "input": path})
        series, windows = _load_windows(a, levels)
        transforms = {}
        if args.stack:
            transforms["learned"], _ = _stack_transforms(args.stack, len(windows))
        transforms["haar"] = FilterBankTransform(haar_filters(), levels)
        transforms["db4"] = FilterBankTransform(daubechies4_filters(), levels)
        table = rd_sweep(list(windows), transforms, rhos)
        original = windows.reshape(-1)
        j2 = args.j2 if args.j2 is not None else max_scale(original.size)
        for pt in table.points:
            row = [series.label, pt.label, pt.rho, pt.kept, pt.psnr_db]
            row += [table.delta(pt.label, b, pt.rho) for b in baselines]
            if not args.no_delta_h:
                per_window = transforms[pt.label]
                if not isinstance(per_window, list):
                    per_window = [per_window] * len(windows)
                recon = np.concatenate([compress_window(w, t, pt.rho)[0] for w, t in zip(windows, per_window)])
                row.append(delta_h(original, recon, args.j1, j2, estimator))
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    io.write_csv(out / "sweep.csv", header, rows)
    return 0


def cmd_hurst(args) -> int:
    _require_input(args.input)
    out = io.ensure_dir(args.out)
    series = io.read_series(args.input, args.format, allow_negative=not args.strict_traffic)
    f = WAVELETS[args.wavelet]()
    est = hurst_av(series.values, args.j1, args.j2, f)
    spec = wavelet_spectrum(series.values, est.j2, f)
    weights = {j: w for j, _, w in est.per_scale}
    io.write_csv(out / "spectrum.csv", ["j", "y_j", "n_j", "weight"],
                 [(int(j), float(y), int(n), float(weights.get(int(j), 0.0)))
                  for j, y, n in zip(spec.scales, spec.s, spec.counts)])
    io.write_json(out / "hurst.json", {
        "trace": series.label, "h": est.h, "ci": [est.ci_low, est.ci_high],
        "beta": est.beta, "j1": est.j1, "j2": est.j2, "wavelet": args.wavelet,
    })
    return 0


def cmd_filters(args) -> int:
    if args.stack:
        if not Path(args.stack).is_file():
            raise ConfigError(f"stack file {args.stack} not found")
        _, stacks = io.read_stacks(args.stack)
    else:
        stacks = [([], haar_stack(_build_config(args).levels))]
    out = io.ensure_dir(args.out)
    doc, rows = [], []
    for idx, (windows, s) in enumerate(stacks):
        doc.append({"stack": idx, "windows": windows, "levels": export_filters(s)})
        for lev, u in enumerate(s, start=1):
            g_resp, h_resp = frequency_response(FirFilterPair(u[0], u[1]), args.grid)
            rows += [(idx, lev, float(w), float(a), float(b))
                     for w, a, b in zip(g_resp.omega, g_resp.magnitude, h_resp.magnitude)]
    io.write_json(out / "filters.json", doc)
    io.write_csv(out / "frequency_response.csv", ["stack", "level", "omega", "g_mag", "h_mag"], rows)
    return 0


def cmd_synth(args) -> int:
    if not 0.0 < args.hurst < 1.0:
        raise ConfigError(f"--hurst must lie in (0, 1), got {args.hurst}")
    if args.n < 1:
        raise ConfigError("--n must be positive")
    method = args.method
    if method == "exact" and args.n > 4096:
        raise ConfigError("exact method is limited to n <= 4096")
    if method == "circulant" and args.n & (args.n - 1):
        raise ConfigError("circulant method needs n to be a power of two")
    if method == "auto" and args.n & (args.n - 1) and args.n > 4096:
        raise ConfigError("n must be a power of two or at most 4096")
    path = Path(args.out or f"fgn_n{args.n}_h{args.hurst:g}_s{args.seed}.csv")
    if path.parent != Path("."):
        io.ensure_dir(path.parent)
    io.write_series(path, fgn_generate(args.n, args.hurst, args.seed, method))
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    epilog = _config_keys_epilog()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = argparse.ArgumentParser(prog="merawave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn filter stacks on windows of a series",
                       epilog=epilog, formatter_class=fmt)
    _add_series_args(p)
    _add_config_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--multi-window", action="store_true",
                   help="train one stack on all windows (gradients averaged per iteration)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compress", help="threshold-compress a series and reconstruct it",
                       epilog=epilog, formatter_class=fmt)
    _add_series_args(p)
    p.add_argument("--stack", help="stack.json from `train` (learned transform)")
    p.add_argument("--transform", default="haar", choices=sorted(WAVELETS),
                   help="baseline used when --stack is absent")
    _add_config_args(p)
    p.add_argument("--rho", type=float, required=True, help="retention ratio in (0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("sweep", help="rate-distortion and Hurst-deviation sweep",
                       epilog=epilog, formatter_class=fmt)
    _add_series_args(p, multi=True)
    p.add_argument("--stack", help="stack.json from `train`; omit for baseline-only mode")
    _add_config_args(p)
    p.add_argument("--rhos", default=",".join(str(r) for r in DEFAULT_RHOS))
    p.add_argument("--wavelet", default="db4", choices=sorted(WAVELETS), help="Hurst estimator wavelet")
    p.add_argument("--j1", type=int, default=3)
    p.add_argument("--j2", type=int, default=None)
    p.add_argument("--no-delta-h", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("hurst", epilog=epilog, formatter_class=fmt, help="Abry-Veitch Hurst estimate of a series")
    p.add_argument("--input", required=True)
    p.add_argument("--format", default="csv_single_column", choices=io.FORMATS)
    p.add_argument("--strict-traffic", action="store_true")
    p.add_argument("--wavelet", default="db4", choices=sorted(WAVELETS))
    p.add_argument("--j1", type=int, default=3)
    p.add_argument("--j2", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hurst)

    p = sub.add_parser("filters", epilog=epilog, formatter_class=fmt, help="export filter taps and frequency responses")
    p.add_argument("--stack", help="stack.json; defaults to a Haar stack")
    _add_config_args(p)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filters)

    p = sub.add_parser("synth", epilog=epilog, formatter_class=fmt, help="write fractional Gaussian noise as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", default="auto", choices=("auto", "circulant", "exact"))
    p.add_argument("--out", help="output file (default fgn_n<N>_h<H>_s<SEED>.csv)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("MERAWAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        code = EXIT_CONFIG
        msg = exc
    except (DataError, OSError) as exc:
        code = EXIT_DATA
        msg = exc
    except NumericalError as exc:
        code = EXIT_NUMERIC
        msg = exc
    print(f"merawave {args.command}: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
