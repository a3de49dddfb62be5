"""Scenario configuration: defaults, file parsing, validation, manifests.

Config files are INI-style nested key-value text (configparser dialect),
one section per component. Every key has a default anchored to the
reference operating point, so an empty file is a valid scenario; unknown
sections or keys are rejected. Pressure accepts an explicit "mbar" suffix
("0.1 mbar") and is stored in Pa; all other values are plain SI numbers.

A run manifest is the fully resolved config re-serialized with the seed
folded in; loading a manifest reproduces the run bit-exactly.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from scipy.constants import pi

from .errors import ConfigParseError

_RB_DEFAULT = 1.0 / (13200 * 16 * 1.5625e-7)  # 30.303 Hz resolution bandwidth

#: section -> key -> (default, type); type is one of float, int, bool, str,
#: or "pressure" (float Pa, accepts an mbar suffix in files).
SCHEMA: dict[str, dict[str, tuple[object, object]]] = {
    "scenario": {
        "name": ("custom", str),
        "seed": (1, int),
        "output_dir": ("levisense_out", str),
    },
    "tweezer": {
        "power_w": (0.414, float),
        "wavelength_m": (1.064e-6, float),
        "numerical_aperture": (0.8, float),
        "waist_m": (0.0, float),  # 0 -> 0.61 lambda / NA
    },
    "signal": {
        "power_w": (493e-9, float),
        "direction": ("co", str),
        "focus_offset_zr": (0.04, float),
        "phase_rad": (0.0, float),
    },
    "particle": {
        "diameter_m": (142e-9, float),
        "density_kg_per_m3": (1850.0, float),
        "rel_permittivity": (2.1, float),
    },
    "environment": {
        "pressure": (10.0, "pressure"),
        "temperature_k": (300.0, float),
        "gas_molar_mass_kg_per_mol": (28.97e-3, float),
        "gas_viscosity_pa_s": (1.85e-5, float),
        "damping_anchor": ("kinetic", str),
    },
    "trap": {
        "frequency_mode": ("calibrated", str),  # calibrated | paraxial
        "frequency_hz": (83.8e3, float),
    },
    "drive": {
        "enabled": (True, bool),
        "am_frequency_hz": (86.0e3, float),
        "modulation_depth": (1.0, float),
        "phase_mode": ("swept", str),
        "phase_rad": (0.0, float),
        "correlation_time_s": (1e-3, float),
        "phase_sigma_rad": (pi, float),
        "sweep_rate_hz": (2.0 * _RB_DEFAULT, float),
        "kappa_anchor": ("empirical", str),  # empirical | model
    },
    "feedback": {
        "enabled": (False, bool),
        "velocity_gain_per_s": (0.0, float),
    },
    "sim": {
        "dt_s": (1.5625e-7, float),
        "duration_s": (0.1056, float),
        "decimate": (16, int),
        "store_velocity": (False, bool),
    },
    "readout": {
        "gain_v_per_m": (1e7, float),
        "noise_floor_v2_per_hz": (1e-9, float),
    },
    "analysis": {
        "segment_samples": (13200, int),
        "n_segments": (0, int),  # 0 -> use all available
        "window": ("rectangular", str),
        "trace_file": ("", str),  # input for the psd verb
    },
    "sweep": {
        "powers_w": ("", str),  # comma-separated; empty -> reference grid
        "n_segments": (560, int),
    },
}

SCENARIO_NAMES = ("fig2", "fig3", "fig4", "fig5", "custom")


def default_config() -> dict:
    """Fully populated configuration at the reference defaults."""
    return {sec: {k: spec[0] for k, spec in keys.items()} for sec, keys in SCHEMA.items()}


def _parse_pressure(raw: str, key: str) -> float:
    parts = raw.split()
    try:
        value = float(parts[0])
    except (ValueError, IndexError):
        raise ConfigParseError(f"cannot parse pressure '{raw}'", key=key) from None
    if len(parts) == 1:
        return value
    unit = parts[1].lower()
    if unit == "pa":
        return value
    if unit == "mbar":
        return value * 100.0
    raise ConfigParseError(f"unknown pressure unit '{parts[1]}' (use Pa or mbar)", key=key)


def _coerce(raw: str, typ, key: str):
    try:
        if typ == "pressure":
            return _parse_pressure(raw, key)
        if typ is bool:
            lowered = raw.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigParseError(
            f"cannot parse '{raw}' as {getattr(typ, '__name__', typ)}", key=key
        ) from None


def parse_config_text(text: str, base: dict | None = None) -> dict:
    """Parse config text over `base` (defaults when omitted), validating keys."""
    cfg = {sec: dict(keys) for sec, keys in (base or default_config()).items()}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigParseError(f"config syntax error: {exc.message.splitlines()[0]}",
                               line=line) from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigParseError(f"unknown section [{section}]", key=section)
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigParseError(
                    f"unknown key in [{section}]", key=f"{section}.{key}"
                )
            cfg[section][key] = _coerce(raw, SCHEMA[section][key][1], f"{section}.{key}")
    _validate(cfg)
    return cfg


def load_config(path: str, base: dict | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file: {exc}") from None
    return parse_config_text(text, base)


def _validate(cfg: dict) -> None:
    if cfg["scenario"]["name"] not in SCENARIO_NAMES:
        raise ConfigParseError(
            f"scenario name must be one of {SCENARIO_NAMES}", key="scenario.name"
        )
    if cfg["signal"]["direction"] not in ("co", "counter"):
        raise ConfigParseError("direction must be co or counter", key="signal.direction")
    if cfg["trap"]["frequency_mode"] not in ("calibrated", "paraxial"):
        raise ConfigParseError(
            "frequency_mode must be calibrated or paraxial", key="trap.frequency_mode"
        )
    if cfg["drive"]["phase_mode"] not in ("fixed", "randomized", "swept"):
        raise ConfigParseError(
            "phase_mode must be fixed, randomized or swept", key="drive.phase_mode"
        )
    if cfg["drive"]["kappa_anchor"] not in ("empirical", "model"):
        raise ConfigParseError(
            "kappa_anchor must be empirical or model", key="drive.kappa_anchor"
        )
    if cfg["environment"]["damping_anchor"] not in ("kinetic", "reference"):
        raise ConfigParseError(
            "damping_anchor must be kinetic or reference", key="environment.damping_anchor"
        )
    if cfg["analysis"]["window"] not in ("rectangular", "hann"):
        raise ConfigParseError(
            "window must be rectangular or hann", key="analysis.window"
        )


def dump_config(cfg: dict) -> str:
    """Serialize a resolved config; floats use shortest round-trip repr."""
    out = io.StringIO()
    for section in SCHEMA:
        out.write(f"[{section}]\n")
        for key in SCHEMA[section]:
            value = cfg[section][key]
            if isinstance(value, bool):
                rendered = "true" if value else "false"
            elif isinstance(value, float):
                rendered = repr(value)
            else:
                rendered = str(value)
            out.write(f"{key} = {rendered}\n")
        out.write("\n")
    return out.getvalue()


def config_digest(cfg: dict) -> str:
    """Hash of the physics-relevant configuration (output location excluded)."""
    stripped = {sec: dict(keys) for sec, keys in cfg.items()}
    stripped["scenario"]["output_dir"] = ""
    return hashlib.sha256(dump_config(stripped).encode()).hexdigest()


def write_manifest(cfg: dict, path: str) -> None:
    """Emit the resolved run manifest; re-running from it reproduces outputs."""
    body = dump_config(cfg)
    header = (
        "# levisense run manifest: fully resolved parameters\n"
        f"# config digest: {config_digest(cfg)}\n"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + body)
