"""Command-line front end.

Verbs::

    pmhll list-presets
    pmhll sim   --preset I --variant 1 --seed 7 --out runs/I-1
    pmhll track input.wav --fc0 310 --out runs/voice
    pmhll scan  --preset VI --f-low 90 --f-high 400 --out runs/scan

Exit codes: 0 success, 2 usage error, 3 input-format error, 4 non-finite
numbers.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import __version__, analysis, svg
from .audio import AudioFormatError, load_audio
from .bank import SEMITONE, BankConfig, bank_create, persistent_locks
from .core import ConfigError, Engine, EngineConfig, InputError, Trace
from .presets import PRESETS, build_signal, run_preset

EXIT_USAGE, EXIT_FORMAT, EXIT_NUMERIC = 2, 3, 4
CSV_HEADER = "t_s,fc_hz,hnr_db,cs,strobe,locked"


class UsageError(Exception):
    pass


def _g(v: float) -> str:
    return f"{v:.9g}"


def write_trace_csv(path, trace: Trace) -> None:
    """One row per sample, values exactly as the engine emitted them."""
    fs = trace.fs
    lines = [CSV_HEADER]
    for n, (fc, hnr, cs, st, lk) in enumerate(
        zip(trace.fc_hz.tolist(), trace.hnr_db.tolist(), trace.cs.tolist(),
            trace.strobe.tolist(), trace.locked.tolist())
    ):
        lines.append(f"{_g(n / fs)},{_g(fc)},{_g(hnr)},{_g(cs)},{int(st)},{int(lk)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected trace header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(CSV_HEADER.split(","))}


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "clean"
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _check_finite(traces) -> None:
    for tr in traces:
        if not (np.all(np.isfinite(tr.fc_hz)) and np.all(np.isfinite(tr.hnr_db)) and np.all(np.isfinite(tr.cs))):
            raise InputError("engine produced non-finite output")


def _prepare_out(out: str) -> None:
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out!r}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out!r} is not writable")


def _trace_names(n: int) -> list[str]:
    return ["trace.csv"] if n == 1 else [f"trace_{k + 1}.csv" for k in range(n)]


def _manifest(verb: str, **fields) -> dict:
    return {"tool": "pmhll", "version": __version__, "verb": verb, **fields}


def cmd_list_presets(args) -> list[str]:
    for p in PRESETS.values():
        variants = "; ".join(f"{k}: {v}" for k, v in enumerate(p.variants))
        print(f"{p.id:4s} {p.description} ({p.duration * 1000:.0f} ms) fc0={list(p.fc0)} variants [{variants}]")
    return []


def cmd_sim(args) -> list[str]:
    if args.preset not in PRESETS:
        raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
    preset = PRESETS[args.preset]
    if not 0 <= args.variant < len(preset.variants):
        raise UsageError(f"preset {args.preset} has variants 0..{len(preset.variants) - 1}")
    _prepare_out(args.out)
    template = EngineConfig(fs=args.fs, fc0=preset.fc0[0])
    res = run_preset(args.preset, args.variant, args.seed, args.fs, template, args.exclude_fraction)
    if args.fc0 is not None:
        if len(res.traces) != 1:
            raise UsageError("--fc0 applies to single-instance presets only")
        cfg = dataclasses.replace(res.configs[0], fc0=args.fc0, fc_min=min(res.configs[0].fc_min, args.fc0))
        res.configs = [cfg]
        res.traces = [Engine(cfg).process(res.signal.x)]
        res.reports = [analysis.make_report(res.traces[0].fc_hz, res.traces[0].hnr_db, args.fs,
                                            res.signal.f0[0], args.exclude_fraction)]
    _check_finite(res.traces)

    paths = []
    for name, tr in zip(_trace_names(len(res.traces)), res.traces):
        path = os.path.join(args.out, name)
        write_trace_csv(path, tr)
        paths.append(path)
    doc = {
        "manifest": _manifest(
            "sim",
            preset=args.preset,
            variant=args.variant,
            variant_params=preset.variants[args.variant],
            seed=args.seed,
            fs=args.fs,
            exclude_fraction=args.exclude_fraction,
            engine=[dataclasses.asdict(c) for c in res.configs],
            signal=res.signal.spec,
        ),
        "seed": args.seed,
        "snr_db": res.signal.snr_db,
        "reports": [
            {"fc0": c.fc0, "f0_mean": float(np.mean(f)), **r.to_dict()}
            for c, f, r in zip(res.configs, res.signal.f0, res.reports)
        ],
    }
    path = os.path.join(args.out, "summary.json")
    write_json(path, doc)
    paths.append(path)
    if args.svg:
        path = os.path.join(args.out, "plot.svg")
        ref = [96.0] if len(res.traces) == 1 else [float(f[0]) for f in res.signal.f0]
        svg.write_run(path, res.traces, res.signal.f0, ref, title=f"preset {args.preset} variant {args.variant} seed {args.seed}")
        paths.append(path)
    return paths


def _load_input(args) -> np.ndarray:
    is_wav = args.input.lower().endswith(".wav")
    if not is_wav and args.fs is None:
        raise UsageError("raw float32 input needs --fs")
    if not os.path.exists(args.input):
        raise UsageError(f"no such file: {args.input}")
    engine_fs = args.fs if args.fs is not None else 5000.0
    return load_audio(args.input, args.fs, engine_fs), engine_fs


def cmd_track(args) -> list[str]:
    x, fs = _load_input(args)
    _prepare_out(args.out)
    try:
        cfg = EngineConfig(fs=fs, fc0=args.fc0, fc_min=min(96.0, args.fc0))
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    trace = Engine(cfg).process(x)
    _check_finite([trace])
    paths = [os.path.join(args.out, "trace.csv"), os.path.join(args.out, "summary.json")]
    write_trace_csv(paths[0], trace)
    report = analysis.make_report(trace.fc_hz, trace.hnr_db, fs, None, args.exclude_fraction)
    write_json(paths[1], {
        "manifest": _manifest("track", input=os.path.basename(args.input), fs=fs, engine=[dataclasses.asdict(cfg)]),
        "reports": [{"fc0": cfg.fc0, **report.to_dict()}],
    })
    if args.svg:
        paths.append(os.path.join(args.out, "plot.svg"))
        svg.write_run(paths[-1], [trace], None, [args.fc0], title=os.path.basename(args.input))
    return paths


def cmd_scan(args) -> list[str]:
    if (args.input is None) == (args.preset is None):
        raise UsageError("scan needs either an input file or --preset")
    if args.preset is not None:
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}")
        fs = args.fs if args.fs is not None else 5000.0
        x = build_signal(args.preset, args.variant, args.seed, fs).x
        source = {"preset": args.preset, "variant": args.variant, "seed": args.seed}
    else:
        x, fs = _load_input(args)
        source = {"input": os.path.basename(args.input)}
    try:
        bank_cfg = BankConfig(args.f_low, args.f_high, args.spacing, args.confine, EngineConfig(fs=fs, fc0=args.f_low, fc_min=args.f_low))
        bank = bank_create(bank_cfg)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    _prepare_out(args.out)
    traces = bank.process(x)
    _check_finite(traces)
    winners = set(persistent_locks(traces, threshold_db=args.lock_threshold))
    paths = []
    rows = ["fc0_hz,lock_fraction,mean_hnr_db,persistent"]
    instances = []
    for k, (eng, tr) in enumerate(zip(bank.instances, traces)):
        path = os.path.join(args.out, f"trace_{k + 1:02d}.csv")
        write_trace_csv(path, tr)
        paths.append(path)
        frac, mean_hnr = float(np.mean(tr.locked)), float(np.mean(tr.hnr_db))
        rows.append(f"{_g(eng.config.fc0)},{_g(frac)},{_g(mean_hnr)},{int(k in winners)}")
        instances.append({"fc0": eng.config.fc0, "fc_min": eng.config.fc_min, "fc_max": eng.config.fc_max,
                          "lock_fraction": frac, "mean_hnr_db": mean_hnr, "persistent": k in winners})
    path = os.path.join(args.out, "locks.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    paths.append(path)
    path = os.path.join(args.out, "summary.json")
    write_json(path, {
        "manifest": _manifest("scan", **source, fs=fs, f_low=args.f_low, f_high=args.f_high,
                              spacing=args.spacing, confine=args.confine, lock_threshold_db=args.lock_threshold),
        "instances": instances,
        "persistent_locks": [bank.instances[k].config.fc0 for k in sorted(winners)],
    })
    paths.append(path)
    if args.svg:
        path = os.path.join(args.out, "plot.svg")
        chosen = sorted(winners) or list(range(len(traces)))
        svg.write_run(path, [traces[k] for k in chosen], None, [bank.instances[k].config.fc0 for k in chosen], title="scan")
        paths.append(path)
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmhll", description="Harmonic locked-loop f0 tracker")
    parser.add_argument("--version", action="version", version=f"pmhll {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    sub.add_parser("list-presets", help="show the reference scenarios").set_defaults(func=cmd_list_presets)

    def common(p):
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--exclude-fraction", type=float, default=0.1)
        p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=True)

    p = sub.add_parser("sim", help="run a reference scenario")
    p.add_argument("--preset", required=True)
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fs", type=float, default=5000.0)
    p.add_argument("--fc0", type=float, default=None, help="override the initial oscillator frequency")
    common(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("track", help="track f0 in a mono WAV or raw float32 file")
    p.add_argument("input")
    p.add_argument("--fc0", type=float, required=True)
    p.add_argument("--fs", type=float, default=None, help="engine rate; required for raw input")
    common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("scan", help="run a bank of instances over a frequency band")
    p.add_argument("input", nargs="?")
    p.add_argument("--preset")
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fs", type=float, default=None)
    p.add_argument("--f-low", type=float, default=90.0)
    p.add_argument("--f-high", type=float, default=400.0)
    p.add_argument("--spacing", type=float, default=SEMITONE)
    p.add_argument("--confine", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--lock-threshold", type=float, default=0.0,
                   help="dB over the final 100 ms for a persistent lock (noise alone sits near 2.5 dB)")
    common(p)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        paths = args.func(args)
    except UsageError as exc:
        print(f"pmhll: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AudioFormatError as exc:
        print(f"pmhll: input format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except InputError as exc:
        print(f"pmhll: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
