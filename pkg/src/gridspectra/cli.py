"""Command-line front end: calibrate, simulate, detect, sweep, spectrum.

All subcommands read the same flat key=value config file.  ``detect``
analyzes an external measurement CSV against a stored calibration and
exits 0 (quiet), 1 (event flagged) or 2 (error); the other subcommands
exit 0 on success and 2 on error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .events import impedance_matrix
from .rmtdetect import (
    Calibration,
    DetectionReport,
    criteria,
    detect_and_classify,
    localize,
    standardize,
    whiten,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridspectra",
        description="Simulate radial-grid measurement windows and detect "
        "events from their eigenvalue spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, fmt_default: str = "json") -> None:
        sp.add_argument("--config", required=True, help="scenario config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="output file path")
        sp.add_argument(
            "--format", choices=("json", "csv"), default=fmt_default, help="output format"
        )

    sp = sub.add_parser("calibrate", help="derive no-event thresholds and signatures")
    common(sp)
    sp = sub.add_parser("simulate", help="run one scenario and report the verdict")
    common(sp)
    sp = sub.add_parser("detect", help="analyze an external measurement CSV")
    sp.add_argument("measurements", help="CSV: sample index, then one column per node")
    common(sp)
    sp = sub.add_parser("sweep", help="run the configured scenario list into a table")
    common(sp)
    sp = sub.add_parser("spectrum", help="export the detector's eigenvalue spectrum")
    common(sp, fmt_default="csv")
    return parser


def _load_config(args) -> harness.ScenarioConfig:
    cfg = harness.scenario_from_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _load_calibration(cfg: harness.ScenarioConfig) -> Calibration:
    if not cfg.calibration_path:
        raise ValueError(
            "config has no calibration.path; run 'gridspectra calibrate' first"
        )
    with open(cfg.calibration_path, "r", encoding="utf-8") as fh:
        return Calibration.from_json(fh.read())


def _print_report(report: DetectionReport) -> None:
    node = "-" if report.node is None else str(report.node)
    print(
        f"flag={str(report.flag).lower()} class={report.label} node={node} "
        f"c_srl={report.criteria.c_srl:.4g} c_mpl1={report.criteria.c_mpl1:.4g} "
        f"c_mpl2={report.criteria.c_mpl2:.4g}"
    )


def _cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    if args.format != "json":
        raise ValueError("calibration export supports json only")
    calibration = harness.calibrate(cfg)
    out = args.out or cfg.calibration_path or "calibration.json"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(calibration.to_json() + "\n")
    print(
        f"calibrated N={calibration.n} T={calibration.t} "
        f"runs={len(calibration.seeds)} -> {out}"
    )
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    report = harness.run_scenario(cfg, _load_calibration(cfg))
    if args.out:
        harness.export_report(report, args.format, args.out)
    _print_report(report)
    return 0


def _read_measurements(path: str) -> np.ndarray:
    """Parse a measurement CSV into a nodes x samples complex array.

    First column is the sample index; remaining columns are per-node
    voltage deviations, real or complex (accepts 1+2j notation).  A
    non-numeric header row and '#' comments are skipped.
    """
    rows: list[list[complex]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh.read().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                values = [complex(p) for p in parts[1:]]
            except ValueError:
                if not rows:
                    continue
                raise ValueError(f"{path}: line {lineno}: non-numeric measurement")
            if len(values) < 1:
                raise ValueError(f"{path}: line {lineno}: no measurement columns")
            if rows and len(values) != len(rows[0]):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(rows[0])} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no measurement rows")
    return np.array(rows, dtype=complex).T


def _cmd_detect(args) -> int:
    cfg = _load_config(args)
    calibration = _load_calibration(cfg)
    u = _read_measurements(args.measurements)
    if u.shape[0] != calibration.n:
        raise ValueError(
            f"measurements have {u.shape[0]} nodes, calibration expects {calibration.n}"
        )
    graph = cfg.build_network()
    if graph.n != calibration.n:
        raise ValueError(
            f"configured network has {graph.n} nodes, calibration expects {calibration.n}"
        )
    u = u - u.mean(axis=1, keepdims=True)
    window = standardize(u, calibration.sigma_m, scale=calibration.sigma_scale)
    triple = criteria(whiten(window, calibration.omega_ref))
    flag, label = detect_and_classify(triple, calibration)
    node = (
        localize(window, calibration.omega_ref, impedance_matrix(graph))
        if flag
        else None
    )
    report = DetectionReport(
        criteria=triple,
        flag=flag,
        label=label,
        node=node,
        thresholds=dict(calibration.intervals),
        n=calibration.n,
        t=window.t,
        seed=None,
    )
    if args.out:
        harness.export_report(report, args.format, args.out)
    _print_report(report)
    return 1 if flag else 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    calibration = _load_calibration(cfg)
    table = harness.sweep(
        harness.preset_sweep_configs(cfg), calibration, workers=cfg.sweep_workers
    )
    out = args.out or f"sweep.{args.format}"
    harness.export_report(table, args.format, out)
    for row in table.rows:
        if row.error is not None:
            print(f"{row.network}/{row.scenario}: error: {row.error}")
        else:
            _print_report(row.report)
    print(f"wrote {out}")
    return 0


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    calibration = _load_calibration(cfg)
    spectrum, bounds = harness.whitened_spectrum(cfg, calibration)
    out = args.out or f"spectrum.{args.format}"
    if args.format == "csv":
        harness.export_spectrum(out, spectrum, bounds)
    else:
        doc = {
            "eigenvalues": [float(v) for v in spectrum],
            "mp_lower": bounds[0],
            "mp_upper": bounds[1],
        }
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
    print(f"wrote {out} ({spectrum.size} eigenvalues)")
    return 0


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "sweep": _cmd_sweep,
    "spectrum": _cmd_spectrum,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
