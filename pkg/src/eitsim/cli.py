"""Command-line interface: run, analyze, compare, constants, template."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, template
from .diagnostics import (
    TransverseBasis,
    compute_records,
    cross_overlap,
    first_local_minimum,
    instantaneous_frequency,
    rabi_frequency,
    state_probability,
)
from .errors import ConfigError, DivergenceError, EITSimError, SnapshotFormatError
from .model import derive_constants, validate_params
from .runner import run_effective_scenario, run_obe_scenario
from .snapshots import export_timeseries, load_series, save_series

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load_config_file(path: str, overrides) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        print(f"error: cannot read config {path}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from None
    return load_config(text, overrides=overrides)


def cmd_run(args) -> int:
    cfg = _load_config_file(args.config, args.set)
    if args.threads is not None:
        cfg.values["solver.threads"] = args.threads
    params, grid = cfg.phys_params(), cfg.grid()
    report = validate_params(params, grid)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        for v in report.violations:
            print(f"error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg["output.dir"])
    obe_series = None
    try:
        if args.solver in ("obe", "both"):
            obe_series = run_obe_scenario(cfg, progress=args.progress)
            save_series(obe_series, out / "obe")
            _write_diagnostics(cfg, obe_series, out / "obe")
            print(f"obe series: {len(obe_series)} snapshots -> {out / 'obe'}")
        if args.solver in ("effective", "both"):
            if args.solver == "both":
                cfg.values["solver.effective_init"] = "obe"
            eff = run_effective_scenario(cfg, obe_series=obe_series, progress=args.progress)
            save_series(eff, out / "effective")
            _write_diagnostics(cfg, eff, out / "effective")
            print(f"effective series: {len(eff)} snapshots -> {out / 'effective'}")
    except DivergenceError as err:
        print(f"error: numerical divergence: {err}", file=sys.stderr)
        if err.partial_series is not None:
            save_series(err.partial_series, out / "diverged")
            print(f"partial series persisted to {out / 'diverged'}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as err:
        print(f"error: I/O failure: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _basis_for(series, basis_max: int) -> TransverseBasis:
    meta = series.meta
    if meta.get("scenario") == "qho":
        length, k_s, center = meta["l_E"], 0.0, 0.0
    else:
        length = meta["l_B"]
        k_s = meta.get("k_s", 0.0)
        center = -k_s * length**2
    return TransverseBasis(series.grid, length, basis_max, center=center, k_s=k_s)


def _write_diagnostics(cfg, series, out_dir) -> None:
    basis = _basis_for(series, cfg["output.basis_max"])
    t0 = series.meta.get("t0_prob", series.meta.get("settle_time", series.times[0]))
    t0 = max(t0, series.times[0])
    records = compute_records(series, basis=basis, t0=t0)
    export_timeseries(
        series, records, Path(out_dir) / "diagnostics.csv",
        export_fields=cfg["output.export_fields"],
    )


def _load_series_dir(path: str):
    try:
        return load_series(path)
    except (OSError, SnapshotFormatError) as err:
        print(f"error: cannot load series {path}: {err}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from None


def cmd_analyze(args) -> int:
    series = _load_series_dir(args.series)
    meta = series.meta
    basis = _basis_for(series, args.basis_max)
    t0 = meta.get("t0_prob", meta.get("settle_time", series.times[0]))
    t0 = max(t0, series.times[0])
    records = compute_records(series, basis=basis, t0=t0)
    out = Path(args.out or Path(args.series) / "diagnostics.csv")
    export_timeseries(series, records, out)
    print(f"diagnostics -> {out}")
    ok = True
    if args.mode == "landau":
        omega_B = meta["omega_B"]
        n = meta.get("n", 0)
        t_settle = meta.get("settle_time", series.times[0])
        ts, oms = instantaneous_frequency(series, window=(t_settle, t_settle + 0.3e-3))
        if len(oms) == 0:
            print("FAIL: no snapshots in the frequency window", file=sys.stderr)
            return EXIT_CONFIG
        med = float(np.median(oms)) / omega_B
        target = n + 0.5
        dev = abs(med - target) / target
        ok = dev <= 0.05
        print(
            f"omega/omega_B = {med:.4f} vs (n + 1/2) = {target:.1f} "
            f"({dev * 100:.2f}% off) {'PASS' if ok else 'FAIL'} (5% tolerance)"
        )
    else:
        omega_A = meta.get("omega_A") or rabi_frequency(
            meta["alpha"], 1.5 * meta["gamma"], meta["delta_p"], meta["omega_E"], 0
        )
        probs = state_probability(series, basis, t0)
        t_min = first_local_minimum(series.times_array(), probs[0], t_start=t0 + 1e-4)
        t_pred = t0 + np.pi / omega_A
        if t_min is None:
            ok = False
            print(f"first P_0 minimum: none found; predicted {t_pred * 1e3:.3f} ms FAIL")
        else:
            dev = abs(t_min - t_pred) / (t_pred - t0)
            ok = dev <= 0.15
            print(
                f"first P_0 minimum at {t_min * 1e3:.3f} ms vs t0 + pi/W_A = "
                f"{t_pred * 1e3:.3f} ms ({dev * 100:.1f}% of the flop time off) "
                f"{'PASS' if ok else 'FAIL'} (15% tolerance)"
            )
    return EXIT_OK if ok else EXIT_CONFIG


def cmd_compare(args) -> int:
    a = _load_series_dir(args.a)
    b = _load_series_dir(args.b)
    try:
        ts, overlap = cross_overlap(a, b)
    except EITSimError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    t_lo = args.window_start if args.window_start is not None else ts[0]
    t_hi = args.window_end if args.window_end is not None else ts[-1]
    mask = (ts >= t_lo) & (ts <= t_hi)
    if not np.any(mask):
        print("error: empty comparison window", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        lines = ["t,overlap"] + [
            f"{format(t, '.17g')},{format(v, '.17g')}" for t, v in zip(ts, overlap)
        ]
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"overlap CSV -> {args.out}")
    worst = float(np.min(overlap[mask]))
    ok = worst >= args.min_overlap
    print(
        f"min overlap over [{t_lo * 1e3:.3f}, {t_hi * 1e3:.3f}] ms: {worst:.4f} "
        f"(threshold {args.min_overlap}) {'PASS' if ok else 'FAIL'}"
    )
    return EXIT_OK if ok else EXIT_CONFIG


def cmd_constants(args) -> int:
    cfg = _load_config_file(args.config, args.set)
    params = cfg.phys_params()
    consts = derive_constants(params, n_D=cfg.values.get("n_d_per_m2"))
    width = max(len(k) for k in consts.as_dict())
    for key, val in consts.as_dict().items():
        print(f"{key:<{width}}  {val:.6g}")
    return EXIT_OK


def cmd_template(args) -> int:
    text = template()
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as err:
            print(f"error: cannot write {args.out}: {err}", file=sys.stderr)
            return EXIT_IO
        print(f"template -> {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eitsim", description=__doc__)
    p.add_argument("--version", action="version", version=f"eitsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a scenario and persist snapshots")
    run.add_argument("--config", required=True, help="path to a run configuration")
    run.add_argument("--solver", choices=("obe", "effective", "both"), default="obe")
    run.add_argument("--out", help="output directory (default: output.dir from the config)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a configuration value (repeatable)")
    run.add_argument("--progress", action="store_true", help="print progress lines")
    run.add_argument("--threads", type=int, default=None,
                     help="probe-solve worker cap (also EITSIM_THREADS)")
    run.set_defaults(func=cmd_run)

    an = sub.add_parser("analyze", help="compute diagnostics for a stored series")
    an.add_argument("--series", required=True, help="series directory (with manifest.json)")
    an.add_argument("--mode", choices=("landau", "qho"), required=True)
    an.add_argument("--basis-max", type=int, default=3)
    an.add_argument("--out", help="diagnostics CSV path")
    an.set_defaults(func=cmd_analyze)

    cp = sub.add_parser("compare", help="cross-overlap of two stored series")
    cp.add_argument("--a", required=True)
    cp.add_argument("--b", required=True)
    cp.add_argument("--min-overlap", type=float, default=0.9)
    cp.add_argument("--window-start", type=float, default=None, help="window start (s)")
    cp.add_argument("--window-end", type=float, default=None, help="window end (s)")
    cp.add_argument("--out", help="overlap CSV path")
    cp.set_defaults(func=cmd_compare)

    co = sub.add_parser("constants", help="print the derived constants for a config")
    co.add_argument("--config", required=True)
    co.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    co.set_defaults(func=cmd_constants)

    tp = sub.add_parser("template", help="emit a commented configuration template")
    tp.add_argument("--out")
    tp.set_defaults(func=cmd_template)
    return p


def main(argv=None) -> int:
    if "EITSIM_THREADS" in os.environ:
        # the env var caps worker parallelism; parsed here so a bad value
        # fails fast instead of deep inside a run
        try:
            int(os.environ["EITSIM_THREADS"])
        except ValueError:
            print("error: EITSIM_THREADS must be an integer", file=sys.stderr)
            return EXIT_CONFIG
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: config: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"error: numerical divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except SnapshotFormatError as err:
        print(f"error: snapshot format: {err}", file=sys.stderr)
        return EXIT_IO
    except EITSimError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
