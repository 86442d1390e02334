"""Command-line front end: ``ifeq synth | tfr | compare | bench``.

Exit codes: 0 success, 1 a ``--check`` failed, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .config import METHOD_NAMES, RunConfig
from .methods import COMPARE_METHODS, LABELS, run_method, window_spec
from .metrics import CSV_HEADER, bench, check_noise, check_orderings, format_table
from .signals import PRESETS, preset

log = logging.getLogger("ifeq")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# CLI flag -> RunConfig field
CONFIG_FLAGS = {
    "sigma": float,
    "trunc_radius": float,
    "n_fft": int,
    "gamma": float,
    "tau": float,
    "rho": float,
    "max_iter": int,
    "tol": float,
    "abs_tol": float,
    "set_tol": float,
}


def _config_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("analysis settings")
    g.add_argument("--config", type=Path, help="JSON run configuration; flags override it")
    for name, typ in CONFIG_FLAGS.items():
        g.add_argument("--" + name.replace("_", "-"), type=typ, dest=name)
    g.add_argument("--derivative", choices=("central-difference", "window-identity"))
    g.add_argument("--iters", type=int, dest="msst_iters", help="MSST iteration count")
    g.add_argument("--multires-sigmas", type=float, nargs="+", dest="multires_sigmas")
    g.add_argument("--save-config", type=Path, help="write the resolved configuration here")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifeq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    cfg = _config_parent()

    p = sub.add_parser("synth", help="write a preset test signal and its ground truth")
    p.add_argument("--preset", required=True, choices=PRESETS)
    p.add_argument("--fs", type=float, default=1024.0)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--snr", type=float, default=2.0, help="dB, figure1-noisy only")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--A", type=float, help="amplitude (chirp, impulse)")
    p.add_argument("--b", type=float, help="chirp start [Hz] or LGD delay offset [s]")
    p.add_argument("--c", type=float, help="chirp rate [Hz/s] or LGD slope [s^2/rad]")
    p.add_argument("--t-imp", type=float, dest="t_imp", help="impulse time [s]")
    p.add_argument("-o", "--output", type=Path, required=True, help="signal CSV")
    p.add_argument("--truth", type=Path, help="descriptor JSON (default <output>.truth.json)")

    p = sub.add_parser("tfr", parents=[cfg], help="compute one TF representation")
    p.add_argument("input", type=Path, help="signal CSV or 16-bit WAV")
    p.add_argument("--method", choices=METHOD_NAMES, default=None)
    p.add_argument("-o", "--outdir", type=Path, default=Path("."))
    p.add_argument("--pgm", action="store_true", help="also write a PGM magnitude image")

    for name, helptext in (("compare", "run the method list, write report and figures"),
                           ("bench", "time and score methods, print the table")):
        p = sub.add_parser(name, parents=[cfg], help=helptext)
        p.add_argument("input", type=Path)
        p.add_argument("--truth", type=Path, help="descriptor JSON for ridge errors")
        p.add_argument("--methods", nargs="+", choices=METHOD_NAMES, default=list(COMPARE_METHODS))
        p.add_argument("--repeats", type=int, default=3)
        p.add_argument("--corridor", type=int, default=10)
        if name == "compare":
            p.add_argument("-o", "--outdir", type=Path, default=Path("."))
            p.add_argument("--check", nargs="?", const="orderings", choices=("orderings", "noise"))
            p.add_argument("--no-figure", action="store_true")
        else:
            p.add_argument("--csv", type=Path, help="write the CSV report here")
    return parser


def resolve_config(args) -> RunConfig:
    base = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    data = {f.name: getattr(base, f.name) for f in fields(RunConfig)}
    for key in (*CONFIG_FLAGS, "derivative", "msst_iters", "multires_sigmas"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "method", None):
        data["method"] = args.method
    data["input"] = str(args.input) if getattr(args, "input", None) else data["input"]
    try:
        cfg = RunConfig(**data)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if getattr(args, "save_config", None):
        cfg.save(args.save_config)
    return cfg


def _load_signal(path):
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    try:
        return io.read_signal(path)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_truth(path):
    if path is None:
        return []
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    return io.read_descriptors(path)


def cmd_synth(args) -> int:
    kw = {k: getattr(args, k) for k in ("A", "b", "c", "t_imp") if getattr(args, k) is not None}
    try:
        s = preset(args.preset, args.fs, args.duration, snr_db=args.snr, seed=args.seed, **kw)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    truth = args.truth or args.output.with_suffix(".truth.json")
    io.write_signal_csv(args.output, s)
    io.write_descriptors(truth, s.components, s.t, s.fs)
    log.info("wrote %s (%d samples) and %s (%d components)",
             args.output, len(s), truth, len(s.components))
    return EXIT_OK


def cmd_tfr(args) -> int:
    cfg = resolve_config(args)
    s = _load_signal(args.input)
    args.outdir.mkdir(parents=True, exist_ok=True)
    stem = args.outdir / f"tfr_{cfg.method}"
    try:
        tfr = run_method(cfg.method, s, cfg)
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        (stem.with_suffix(".diag.txt")).write_text(f"error: {exc}\n")
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    io.write_tfr(stem, tfr, {"config": cfg.__dict__})
    if args.pgm:
        io.write_pgm(stem.with_suffix(".pgm"), tfr.values)
    if not np.all(np.isfinite(tfr.values)):
        log.error("non-finite values in output; see %s", stem.with_suffix(".diag.txt"))
        return EXIT_NUMERIC
    print(io.diagnostics_text(tfr), end="")
    return EXIT_OK


def _run_bench(args, results=None):
    cfg = resolve_config(args)
    s = _load_signal(args.input)
    s.components = _load_truth(args.truth)
    if args.repeats < 3:
        raise UsageError("--repeats must be at least 3")
    margin = window_spec(cfg).half_length(s.fs)
    reports = bench(args.methods, s, cfg, args.repeats, args.corridor, results=results)
    return cfg, s, reports, margin


def _csv(reports) -> str:
    return "\n".join([CSV_HEADER, *(r.csv_row() for r in reports if r.ok)]) + "\n"


def cmd_bench(args) -> int:
    _, _, reports, _ = _run_bench(args)
    print(format_table(reports))
    if args.csv:
        args.csv.write_text(_csv(reports))
    if not any(r.ok for r in reports):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_compare(args) -> int:
    results = {}
    cfg, s, reports, margin = _run_bench(args, results)
    out = args.outdir
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(_csv(reports))
    for name, tfr in results.items():
        io.write_pgm(out / f"tfr_{name}.pgm", tfr.values)
    print(format_table(reports))
    if not any(r.ok for r in reports):
        return EXIT_NUMERIC
    if not args.no_figure and results:
        from .plotting import save_compare_figure

        names = list(results)
        save_compare_figure(out / "compare.png", [results[n] for n in names],
                            [LABELS[n] for n in names], s)
    if not args.check:
        return EXIT_OK
    if not s.components:
        raise UsageError("--check needs --truth")
    if args.check == "orderings":
        checks = check_orderings(reports, s.components)
    else:
        et = results.get("et-if-mag") or run_method("et-if-mag", s, cfg)
        checks = check_noise(et, s.components, args.corridor, margin)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_CHECK


COMMANDS = {"synth": cmd_synth, "tfr": cmd_tfr, "compare": cmd_compare, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ifeq {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
