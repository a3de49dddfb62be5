"""Command-line front end.

Verbs:
  simulate     run a scenario preset (fig2..fig5) or a custom configuration
  psd          spectral estimate of a previously emitted trace file
  sweep        signal-power sweep (fig3 machinery, configurable grid)
  sensitivity  sensitivity table over the reference pressures
  report       analytic sensitivity chain and projection summary

Shared flags: --scenario, --config <path>, --seed <u64>, --out <dir>,
--format {csv,json}. Outputs are UTF-8 tables with a mandatory header row
(SI units in the column names), plus a re-runnable manifest and a metrics
JSON per run. Exit codes: 0 success, 2 config error, 3 physics/validity
error, 4 numerical divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import config as config_mod
from . import presets, readout
from .dynamics import TraceRecord
from .errors import (
    ConfigParseError,
    IntegrationDivergedError,
    InvalidConfigurationError,
    CalibrationFailedError,
    LevisenseError,
)

EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_DIVERGED = 4


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _write_table_csv(path: str, columns: dict) -> None:
    names = list(columns)
    cols = [columns[n] for n in names]
    length = len(cols[0])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(length):
            fh.write(",".join(_fmt(col[i]) for col in cols) + "\n")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _write_table_json(path: str, columns: dict) -> None:
    payload = {name: _jsonable(list(col)) for name, col in columns.items()}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _emit(result: presets.ScenarioResult, cfg: dict, out_dir: str, fmt: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    ext = "csv" if fmt == "csv" else "json"
    writer = _write_table_csv if fmt == "csv" else _write_table_json
    for table_name, columns in result.tables.items():
        path = os.path.join(out_dir, f"{result.name}_{table_name}.{ext}")
        writer(path, columns)
        written.append(path)
    manifest = os.path.join(out_dir, f"{result.name}_manifest.cfg")
    config_mod.write_manifest(cfg, manifest)
    written.append(manifest)
    metrics_path = os.path.join(out_dir, f"{result.name}_metrics.json")
    with open(metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(result.metrics), fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(metrics_path)
    return written


def _resolve_config(args) -> dict:
    cfg = config_mod.default_config()
    if args.config:
        cfg = config_mod.load_config(args.config, base=cfg)
    if args.scenario:
        if args.scenario not in config_mod.SCENARIO_NAMES:
            raise ConfigParseError(
                f"scenario must be one of {config_mod.SCENARIO_NAMES}", key="--scenario"
            )
        cfg["scenario"]["name"] = args.scenario
    if args.seed is not None:
        cfg["scenario"]["seed"] = args.seed
    if args.out:
        cfg["scenario"]["output_dir"] = args.out
    return cfg


def _sweep_powers(cfg: dict) -> np.ndarray | None:
    raw = cfg["sweep"]["powers_w"].strip()
    if not raw:
        return None
    try:
        return np.array([float(tok) for tok in raw.split(",") if tok.strip()])
    except ValueError:
        raise ConfigParseError("cannot parse powers_w list", key="sweep.powers_w") from None


def _run_scenario(cfg: dict) -> presets.ScenarioResult:
    name = cfg["scenario"]["name"]
    seed = cfg["scenario"]["seed"]
    if name == "fig2":
        return presets.run_fig2(seed=seed)
    if name == "fig3":
        return presets.run_fig3(seed=seed, n_segments=cfg["sweep"]["n_segments"],
                                powers_w=_sweep_powers(cfg))
    if name == "fig4":
        return presets.run_fig4(seed=seed)
    if name == "fig5":
        return presets.run_fig5()
    return presets.run_custom(cfg)


def _cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    result = _run_scenario(cfg)
    written = _emit(result, cfg, cfg["scenario"]["output_dir"], args.format)
    for path in written:
        print(path)
    return 0


def _read_trace_csv(path: str) -> TraceRecord:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigParseError(f"cannot read trace file: {exc}") from None
    if "time_s" not in header:
        raise InvalidConfigurationError("trace file needs a time_s column")
    t = data[:, header.index("time_s")]
    for col in ("voltage_v", "position_m"):
        if col in header:
            y = data[:, header.index(col)]
            break
    else:
        raise InvalidConfigurationError("trace file needs voltage_v or position_m")
    dts = np.diff(t)
    if t.size < 2 or not np.allclose(dts, dts[0], rtol=1e-9):
        raise InvalidConfigurationError("trace time grid must be uniform")
    return TraceRecord(
        sample_rate=1.0 / float(dts[0]), samples=y, seed=0, config_digest="external"
    )


def _cmd_psd(args) -> int:
    cfg = _resolve_config(args)
    trace_file = cfg["analysis"]["trace_file"] or os.path.join(
        cfg["scenario"]["output_dir"], "custom_trace.csv"
    )
    trace = _read_trace_csv(trace_file)
    est = readout.psd_average(
        trace,
        cfg["analysis"]["segment_samples"],
        window=cfg["analysis"]["window"],
        n_segments=cfg["analysis"]["n_segments"] or None,
    )
    result = presets.ScenarioResult(
        name="psd",
        tables={"estimate": {"frequency_hz": est.freq_bins, "psd_v2_per_hz": est.psd}},
        metrics={
            "trace_file": trace_file,
            "n_segments": est.n_segments,
            "resolution_bw_hz": est.resolution_bw,
            "window": est.window,
        },
    )
    for path in _emit(result, cfg, cfg["scenario"]["output_dir"], args.format):
        print(path)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    result = presets.run_fig3(
        seed=cfg["scenario"]["seed"],
        n_segments=cfg["sweep"]["n_segments"],
        powers_w=_sweep_powers(cfg),
    )
    result.name = "sweep"
    for path in _emit(result, cfg, cfg["scenario"]["output_dir"], args.format):
        print(path)
    return 0


def _cmd_sensitivity(args) -> int:
    cfg = _resolve_config(args)
    result = presets.sensitivity_summary()
    for path in _emit(result, cfg, cfg["scenario"]["output_dir"], args.format):
        print(path)
    return 0


def _cmd_report(args) -> int:
    cfg = _resolve_config(args)
    sens = presets.sensitivity_summary()
    proj = presets.run_fig5()
    merged = presets.ScenarioResult(
        name="report",
        tables={**sens.tables, **proj.tables},
        metrics={"sensitivity": sens.metrics, "projection": proj.metrics},
    )
    written = _emit(merged, cfg, cfg["scenario"]["output_dir"], args.format)
    m = sens.metrics
    p = proj.metrics
    print("light-power sensitivity (empirical anchor):")
    print(f"  at 0.1 mbar, tau=1 s:        {m['p_min_moderate_w']:.3e} W/Hz "
          f"(reference {m['reference_p_min_moderate_w']:.3e})")
    print(f"  scaled to 6.8e-4 mbar:       {m['p_min_low_pressure_scaled_w']:.3e} W/Hz "
          f"(measured reference {m['reference_p_min_low_w']:.3e}, "
          f"ratio {m['scaled_to_measured_ratio']:.2f}, gauge accuracy "
          f"{m['gauge_accuracy']:.0%} on both readings)")
    print("projection at 1e-7 mbar, tau=1 s (kinetic damping):")
    print(f"  co-propagating threshold:      {p['crossing_power_co_w']:.3e} W "
          f"(reference {p['reference_crossing_co_w']:.3e})")
    print(f"  counter-propagating threshold: {p['crossing_power_counter_w']:.3e} W "
          f"(reference {p['reference_crossing_counter_w']:.3e})")
    print(f"  counter/co transduction ratio: {p['counter_co_ratio']:.1f}")
    print(f"  photon flux at threshold:      "
          f"{p['photon_flux_at_counter_crossing_per_s']:.3e} /s")
    for path in written:
        print(path)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "psd": _cmd_psd,
    "sweep": _cmd_sweep,
    "sensitivity": _cmd_sensitivity,
    "report": _cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levisense",
        description="interference-enhanced weak-light detection: simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--scenario", choices=config_mod.SCENARIO_NAMES, default=None)
        p.add_argument("--config", default=None, help="scenario config file")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationDivergedError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (InvalidConfigurationError, CalibrationFailedError, LevisenseError) as exc:
        print(f"physics/validity error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
