"""Command-line driver.

Subcommands::

    simulate  -- evaluate one launch policy and write the channel report
    optimize  -- run one launch-power optimization strategy
    compare   -- optimize every strategy and tabulate totals and deltas
    sweep     -- scan a flat launch level to expose the throughput optimum

Each run writes a CSV detail file plus a JSON summary carrying the
package version and a hash of the resolved scenario; identical scenarios
produce byte-identical outputs.  Exit codes: 0 success, 1 validation
error, 2 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .grid import PowerSpectrum
from .linkbudget import GsnrReport, run_link
from .optimize import (
    CUBIC, FLAT_ALL_BANDS, FLAT_PER_BAND, THREE_DB, CompareCase,
    VARIANTS, compare_scenarios, maximize_throughput, solve_three_db,
)
from .propagation import ConvergenceError
from .scenario import Scenario, ScenarioError, build_system, parse_scenario, scenario_hash

SCENARIO_DIR_ENV = "SUPERCL_SCENARIO_DIR"


def emit_report(report: GsnrReport, path, metadata: dict | None = None) -> Path:
    """Write the per-channel CSV plus a sibling JSON with the totals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = report.grid
    lines = ["channel_index,f_THz,band,launch_dBm,OSNR_dB,SNR_NL_dB,GSNR_dB,rate_Gbps"]
    for i in range(grid.n_channels):
        lines.append(
            f"{i},{grid.f_thz[i]:.4f},{grid.band_of(i).name},{report.launch_dbm[i]:.4f},"
            f"{report.osnr_db[i]:.4f},{report.snr_nl_db[i]:.4f},{report.gsnr_db[i]:.4f},"
            f"{report.rate_gbps[i]:.4f}"
        )
    payload = {
        "total_tbps": report.total_tbps,
        "channel_count": grid.n_channels,
        "mean_gsnr_db": float(np.mean(report.gsnr_db)),
        "version": __version__,
    }
    payload.update(metadata or {})
    try:
        path.write_text("\n".join(lines) + "\n")
        path.with_suffix(".json").write_text(_json_dumps(payload) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def emit_evolution(evolution, grid, path) -> Path:
    """Write one span's power evolution as CSV: z_km, per-channel dBm."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "z_km," + ",".join(f"ch{i:03d}_dBm" for i in range(grid.n_channels))
    dbm = 10.0 * np.log10(evolution.signal_mw)
    rows = [header]
    for k in range(len(evolution.z_km)):
        rows.append(f"{evolution.z_km[k]:.4f}," + ",".join(f"{v:.4f}" for v in dbm[k]))
    path.write_text("\n".join(rows) + "\n")
    return path


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _resolve_scenario_path(raw: str) -> Path:
    p = Path(raw)
    if p.is_file():
        return p
    env_dir = os.environ.get(SCENARIO_DIR_ENV)
    if env_dir and not p.is_absolute():
        candidate = Path(env_dir) / raw
        if candidate.is_file():
            return candidate
    return p


def _load(args) -> tuple[Scenario, tuple]:
    sc = parse_scenario(_resolve_scenario_path(args.scenario))
    if getattr(args, "isrs", None) is not None:
        sc = dataclasses.replace(sc, isrs=args.isrs == "on")
    if getattr(args, "raman", None) is not None:
        sc = dataclasses.replace(sc, raman_enabled=args.raman == "on")
    if getattr(args, "strategy", None):
        sc = dataclasses.replace(sc, strategy=args.strategy)
    return sc, build_system(sc)


def _out_dir(args, sc: Scenario) -> Path:
    return Path(args.out) if args.out else Path(sc.output_dir)


def _summary(sc: Scenario, extra: dict) -> dict:
    base = {
        "version": __version__,
        "scenario_sha256": scenario_hash(sc),
        "isrs": sc.isrs,
        "raman": sc.raman_enabled,
        "length_km": float(sum(sc.span_lengths_km)),
    }
    base.update(extra)
    return base


def _cmd_simulate(args) -> int:
    sc, (link, grid, curve, link_opts, _) = _load(args)
    launch = PowerSpectrum.flat(sc.launch_flat_dbm, grid.n_channels)
    report = run_link(link, grid, launch, link_opts)
    out = _out_dir(args, sc)
    emit_report(report, out / "report.csv", {"scenario_sha256": scenario_hash(sc)})
    if args.evolution_csv:
        from .propagation import evolve_signals, evolve_with_counterpumps
        if link_opts.raman and link.raman[0] is not None:
            evo = evolve_with_counterpumps(
                link.spans[0], launch, grid, link.raman[0],
                step_km=link_opts.step_km, tol_db=link_opts.raman_tol_db,
                max_sweeps=link_opts.raman_max_sweeps,
            )
        else:
            evo = evolve_signals(
                link.spans[0], launch, grid,
                step_km=link_opts.step_km, isrs_enabled=link_opts.isrs,
            )
        emit_evolution(evo, grid, out / "evolution.csv")
    (out / "summary.json").write_text(_json_dumps(_summary(sc, {
        "command": "simulate",
        "launch_flat_dbm": sc.launch_flat_dbm,
        "total_tbps": report.total_tbps,
    })) + "\n")
    print(f"simulate: {report.total_tbps:.3f} Tb/s over {grid.n_channels} channels -> {out}")
    return 0


def _cmd_optimize(args) -> int:
    sc, (link, grid, curve, link_opts, opt_opts) = _load(args)
    if sc.strategy == THREE_DB:
        result = solve_three_db(link, grid, opt_opts)
    else:
        result = maximize_throughput(link, grid, sc.strategy, opt_opts)
    out = _out_dir(args, sc)
    emit_report(result.report, out / "report.csv", {"scenario_sha256": scenario_hash(sc)})
    summary = _summary(sc, {
        "command": "optimize",
        "strategy": sc.strategy,
        "coefficients_dbm": [float(v) for v in result.policy.params],
        "total_tbps": result.total_tbps,
        "evaluations": result.evaluations,
        "converged": result.converged,
    })
    if result.residual_rms_db is not None:
        summary["residual_rms_db"] = result.residual_rms_db
    (out / "summary.json").write_text(_json_dumps(summary) + "\n")
    print(f"optimize[{sc.strategy}]: {result.total_tbps:.3f} Tb/s "
          f"({result.evaluations} evaluations) -> {out}")
    return 0


def _table_cases(sc: Scenario) -> list[CompareCase]:
    raman = sc.raman_enabled
    return [
        CompareCase("cubic/isrs-on", CUBIC, isrs=True, raman=raman),
        CompareCase("flat-per-band/isrs-on", FLAT_PER_BAND, isrs=True, raman=raman),
        CompareCase("flat-both/isrs-on", FLAT_ALL_BANDS, isrs=True, raman=raman),
        CompareCase("3db-rule/isrs-on", THREE_DB, isrs=True, raman=raman),
        CompareCase("cubic/isrs-off", CUBIC, isrs=False, raman=raman),
        CompareCase("3db-rule/isrs-off", THREE_DB, isrs=False, raman=raman),
    ]


def _cmd_compare(args) -> int:
    sc, (link, grid, curve, link_opts, opt_opts) = _load(args)
    rows = compare_scenarios(link, grid, _table_cases(sc), opt_opts)
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    csv_lines = ["label,strategy,isrs,raman,total_tbps,delta_pct"]
    for row in rows:
        c = row.case
        csv_lines.append(
            f"{c.label},{c.variant},{'on' if c.isrs else 'off'},"
            f"{'on' if c.raman else 'off'},{row.result.total_tbps:.4f},{row.delta_pct:.4f}"
        )
    (out / "compare.csv").write_text("\n".join(csv_lines) + "\n")
    (out / "summary.json").write_text(_json_dumps(_summary(sc, {
        "command": "compare",
        "rows": [
            {"label": r.case.label, "total_tbps": r.result.total_tbps, "delta_pct": r.delta_pct}
            for r in rows
        ],
    })) + "\n")
    for line in csv_lines:
        print(line)
    return 0


def _cmd_sweep(args) -> int:
    sc, (link, grid, curve, link_opts, _) = _load(args)
    levels = np.arange(args.start_dbm, args.stop_dbm + 1e-9, args.step_dbm)
    rows = []
    for level in levels:
        report = run_link(link, grid, PowerSpectrum.flat(float(level), grid.n_channels), link_opts)
        rows.append((float(level), report.total_tbps, float(np.mean(report.gsnr_db))))
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    csv_lines = ["flat_dbm,total_tbps,mean_gsnr_db"]
    csv_lines += [f"{lv:.4f},{t:.4f},{g:.4f}" for lv, t, g in rows]
    (out / "sweep.csv").write_text("\n".join(csv_lines) + "\n")
    best = max(rows, key=lambda r: r[1])
    (out / "summary.json").write_text(_json_dumps(_summary(sc, {
        "command": "sweep",
        "best_flat_dbm": best[0],
        "best_total_tbps": best[1],
    })) + "\n")
    print(f"sweep: optimum flat launch {best[0]:.2f} dBm, {best[1]:.3f} Tb/s -> {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supercl",
        description="GSNR/throughput simulation and launch-power optimization "
                    "for super-(C+L) WDM links",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario TOML file")
        p.add_argument("--out", default=None, help="output directory (overrides scenario)")
        p.add_argument("--isrs", choices=("on", "off"), default=None)
        p.add_argument("--raman", choices=("on", "off"), default=None)

    p_sim = sub.add_parser("simulate", help="evaluate one launch spectrum")
    common(p_sim)
    p_sim.add_argument("--evolution-csv", action="store_true",
                       help="also write the first span's power evolution")
    p_sim.set_defaults(fn=_cmd_simulate)

    p_opt = sub.add_parser("optimize", help="optimize one launch-power strategy")
    common(p_opt)
    p_opt.add_argument("--strategy", choices=VARIANTS, default=None)
    p_opt.set_defaults(fn=_cmd_optimize)

    p_cmp = sub.add_parser("compare", help="optimize all strategies and tabulate")
    common(p_cmp)
    p_cmp.set_defaults(fn=_cmd_compare)

    p_swp = sub.add_parser("sweep", help="scan a flat launch level")
    common(p_swp)
    p_swp.add_argument("--start-dbm", type=float, default=-4.0)
    p_swp.add_argument("--stop-dbm", type=float, default=8.0)
    p_swp.add_argument("--step-dbm", type=float, default=0.5)
    p_swp.set_defaults(fn=_cmd_sweep)
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))
