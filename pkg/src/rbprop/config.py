"""Sectioned key-value configuration files.

Every gap-filling default is tracked so the run manifest can flag it.
Unknown sections or keys are hard errors, reported with their line numbers
and all at once.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .beams import ControlBeamSpec, ProbeSpec
from .params import ConfigurationError, GridSpec, PhysicalParams, validate

# schema: section -> key -> (type, default or MANDATORY)
_MANDATORY = object()

_SCHEMA = {
    "atom": {
        "gamma_rad_s": (float, _MANDATORY),
        "big_gamma_over_gamma": (float, _MANDATORY),
        "density_cm3": (float, _MANDATORY),
        "lambda_cm": (float, _MANDATORY),
        "doppler_width_over_gamma": (float, _MANDATORY),
    },
    "detuning": {
        "delta_p_over_gamma": (float, _MANDATORY),
        "delta_R_over_gamma": (float, _MANDATORY),
    },
    "grid": {
        "nx": (int, 256),
        "ny": (int, 256),
        "extent_cm": (float, 0.24),
        "dz_cm": (float, 50.0e-4),
        "cell_length_cm": (float, 5.0),
    },
    "control": {
        "g0_over_gamma": (float, 1.0),
        "waist_cm": (float, 120.0e-4),
        # waist at the back of the cell unless stated
        "waist_position_cm": (float, None),
    },
    "probe": {
        "kind": (str, "gaussian"),
        "g0_over_gamma": (float, 0.2),
        "width_cm": (float, 48.0e-4),
        "centers_cm": (str, ""),
    },
    "run": {
        "snapshot_every": (int, 100),
        "velocity_quadrature": (str, "resolved"),   # resolved | gauss_hermite
        "velocity_nodes": (int, 64),
        "chi_table": (bool, True),
        "table_target_error": (float, 1.0e-4),
        "absorbing_boundary": (bool, False),
    },
    "scan": {
        "r_min_cm": (float, -0.03),
        "r_max_cm": (float, 0.03),
        "r_points": (int, 61),
        "delta_R_min_over_gamma": (float, -0.1),
        "delta_R_max_over_gamma": (float, 0.05),
        "delta_R_points": (int, 151),
        "z_cm": (float, 0.0),
    },
    "oracle": {
        "draws": (int, 100),
    },
}

_BOOL_STRINGS = {"true": True, "yes": True, "1": True, "on": True,
                 "false": False, "no": False, "0": False, "off": False}


@dataclass
class SimulationConfig:
    """Fully resolved configuration plus the list of defaulted keys."""

    params: PhysicalParams
    grid: GridSpec
    control: ControlBeamSpec
    probe: ProbeSpec
    run: dict
    scan: dict
    oracle: dict
    defaulted_keys: list[str] = field(default_factory=list)
    raw: dict = field(default_factory=dict)

    def narrowest_feature(self) -> float:
        return self.probe.width

    def validate(self) -> "SimulationConfig":
        validate(self.params, self.grid, self.narrowest_feature())
        return self


def _coerce(section: str, key: str, text: str, typ, line: int):
    try:
        if typ is bool:
            v = _BOOL_STRINGS.get(text.strip().lower())
            if v is None:
                raise ValueError(text)
            return v
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text.strip()
    except ValueError:
        raise ConfigurationError(
            [f"line {line}: [{section}] {key} = {text!r} is not a valid "
             f"{typ.__name__}"]) from None


def _line_numbers(path: Path) -> dict:
    """Map (section, key) -> line number for error reporting."""
    out = {}
    section = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            out[(section, None)] = lineno
        elif "=" in line and section is not None:
            key = line.split("=", 1)[0].strip()
            out[(section, key)] = lineno
    return out


def parse_config(path: str | Path) -> SimulationConfig:
    """Parse, apply defaults, validate; raise ConfigurationError with the
    complete list of problems otherwise."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError([f"config file {path} does not exist"])
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (delta_R vs delta_r)
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigurationError([f"config parse failure: {exc}"]) from None

    lines = _line_numbers(path)
    problems: list[str] = []
    resolved: dict[str, dict] = {}
    defaulted: list[str] = []

    for section in cp.sections():
        if section not in _SCHEMA:
            problems.append(
                f"line {lines.get((section, None), '?')}: unknown section [{section}]")
            continue
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                problems.append(
                    f"line {lines.get((section, key), '?')}: unknown key "
                    f"[{section}] {key}")

    for section, keys in _SCHEMA.items():
        resolved[section] = {}
        for key, (typ, default) in keys.items():
            if cp.has_option(section, key):
                lineno = lines.get((section, key), 0)
                try:
                    resolved[section][key] = _coerce(
                        section, key, cp.get(section, key), typ, lineno)
                except ConfigurationError as exc:
                    problems.extend(exc.violations)
            elif default is _MANDATORY:
                problems.append(f"missing mandatory key [{section}] {key}")
            else:
                resolved[section][key] = default
                defaulted.append(f"{section}.{key}")

    if problems:
        raise ConfigurationError(problems)

    # waist position default: control focused at the back of the cell
    if resolved["control"]["waist_position_cm"] is None:
        resolved["control"]["waist_position_cm"] = resolved["grid"]["cell_length_cm"]

    centers_text = resolved["probe"]["centers_cm"]
    centers = tuple(float(c) for c in centers_text.split(",") if c.strip()) \
        if centers_text.strip() else ()
    kind = resolved["probe"]["kind"]
    if not centers:
        if kind == "double_gaussian":
            centers = (-70.0e-4, 70.0e-4)
            defaulted.append("probe.centers_cm")
        elif kind == "sech_multi":
            centers = (-120.0e-4, 0.0, 120.0e-4)
            defaulted.append("probe.centers_cm")

    params = PhysicalParams(
        gamma=resolved["atom"]["gamma_rad_s"],
        big_gamma=resolved["atom"]["big_gamma_over_gamma"],
        delta_p=resolved["detuning"]["delta_p_over_gamma"],
        delta_R=resolved["detuning"]["delta_R_over_gamma"],
        doppler_width=resolved["atom"]["doppler_width_over_gamma"],
        density=resolved["atom"]["density_cm3"],
        wavelength=resolved["atom"]["lambda_cm"],
    )
    grid = GridSpec(
        nx=resolved["grid"]["nx"],
        ny=resolved["grid"]["ny"],
        extent=resolved["grid"]["extent_cm"],
        dz=resolved["grid"]["dz_cm"],
        cell_length=resolved["grid"]["cell_length_cm"],
    )
    try:
        control = ControlBeamSpec(
            G0=resolved["control"]["g0_over_gamma"],
            waist_wc=resolved["control"]["waist_cm"],
            waist_position_z0=resolved["control"]["waist_position_cm"],
            wavelength=params.wavelength,
        )
        probe = ProbeSpec(
            kind=kind,
            g0=resolved["probe"]["g0_over_gamma"],
            width=resolved["probe"]["width_cm"],
            centers=centers,
        )
    except ValueError as exc:
        raise ConfigurationError([str(exc)]) from None

    cfg = SimulationConfig(
        params=params, grid=grid, control=control, probe=probe,
        run=resolved["run"], scan=resolved["scan"], oracle=resolved["oracle"],
        defaulted_keys=defaulted, raw=resolved,
    )
    return cfg.validate()


def serialize_config(cfg: SimulationConfig) -> str:
    """Render the fully resolved configuration; re-parsing reproduces it."""
    out = []
    raw = dict(cfg.raw)
    raw["control"] = dict(raw["control"])
    raw["probe"] = dict(raw["probe"])
    raw["control"]["waist_position_cm"] = cfg.control.waist_position_z0
    raw["probe"]["centers_cm"] = ", ".join(f"{c:.9g}" for c in cfg.probe.centers)
    for section, keys in raw.items():
        out.append(f"[{section}]")
        for key, value in keys.items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)  # shortest exact round-trip form
            out.append(f"{key} = {value}")
        out.append("")
    return "\n".join(out)


def config_as_dict(cfg: SimulationConfig) -> dict:
    """JSON-friendly resolved configuration (for the manifest)."""
    out = {}
    for section, keys in cfg.raw.items():
        out[section] = {k: v for k, v in keys.items()}
    out["control"]["waist_position_cm"] = cfg.control.waist_position_z0
    out["probe"]["centers_cm"] = list(cfg.probe.centers)
    return out
