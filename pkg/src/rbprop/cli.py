"""Command line interface.

Subcommands: chi-scan, propagate, analyze, oracle.  Exit status 0 on success,
1 on configuration errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import RunDiagnostics, diagnose
from .config import ConfigurationError, config_as_dict, parse_config
from .fieldio import (OutputLock, OutputLockError, RunManifest, read_field,
                      write_chi_scan_csv, write_diagnostics_csv, write_field,
                      write_profile_csv)
from .params import prefactor_over_gamma
from .solver import NumericsError, StepPlan, propagate
from .susceptibility import (FieldPoint, OracleConvergenceError,
                             TableRefinementError, build_resolved_quadrature,
                             build_velocity_quadrature, chi_doppler_averaged,
                             chi_stationary, steady_state_oracle)
from .beams import control_field, make_probe

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICS = 2


def _worker_count() -> int:
    """Worker-count hint from the environment (results never depend on it)."""
    raw = os.environ.get("RBPROP_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError([f"RBPROP_WORKERS={raw!r} is not an integer"])
    if n < 1:
        raise ConfigurationError(["RBPROP_WORKERS must be >= 1"])
    return n


def _quadrature(cfg):
    kind = cfg.run["velocity_quadrature"]
    if kind == "gauss_hermite":
        return build_velocity_quadrature(cfg.params.doppler_width,
                                         cfg.run["velocity_nodes"])
    if kind == "resolved":
        return build_resolved_quadrature(cfg.params.doppler_width,
                                         cfg.params.delta_p)
    raise ConfigurationError(
        [f"[run] velocity_quadrature must be 'resolved' or 'gauss_hermite', "
         f"got {kind!r}"])


def _start_manifest(cfg, seed: int) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        config=config_as_dict(cfg),
        defaulted_keys=cfg.defaulted_keys,
        seed=seed,
        started_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )


def cmd_chi_scan(cfg, out_dir: Path, seed: int, args) -> int:
    quad = _quadrature(cfg)
    scan = cfg.scan
    manifest = _start_manifest(cfg, seed)
    r_values = np.linspace(scan["r_min_cm"], scan["r_max_cm"], scan["r_points"])
    d_values = np.linspace(scan["delta_R_min_over_gamma"],
                           scan["delta_R_max_over_gamma"],
                           scan["delta_R_points"])
    z = scan["z_cm"]
    g2 = np.full(r_values.shape, cfg.probe.g0 ** 2)
    G2 = np.abs(control_field(cfg.control, r_values, 0.0, z)) ** 2
    rows = []
    for d in d_values:
        params_d = replace(cfg.params, delta_R=float(d))
        chi = chi_doppler_averaged(FieldPoint(g2, G2), params_d, quad)
        rows.extend((float(r), float(d), c) for r, c in zip(r_values, chi))
    rows.sort(key=lambda t: (t[0], t[1]))
    out = write_chi_scan_csv(out_dir / "chi_scan.csv", rows)
    manifest.add_output(out)
    manifest.finished_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    manifest.write(out_dir / "manifest.json")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_propagate(cfg, out_dir: Path, seed: int, args) -> int:
    quad = _quadrature(cfg)
    manifest = _start_manifest(cfg, seed)
    plan = StepPlan(cfg.grid, dz=cfg.grid.dz, order=args.order)
    probe = make_probe(cfg.probe, cfg.grid)
    result = propagate(
        probe, cfg.control, cfg.params, cfg.grid, plan, quad,
        snapshot_every=cfg.run["snapshot_every"],
        use_table=cfg.run["chi_table"] and not args.direct_chi,
        table_target_error=cfg.run["table_target_error"],
        absorbing_boundary=cfg.run["absorbing_boundary"],
        table_seed=seed,
    )
    diagnostics = RunDiagnostics(input_power=probe.power())
    for snap in result.snapshots:
        diagnostics.append(diagnose(snap))
        out = write_field(out_dir / f"field_z{snap.z:08.4f}.rbpf", snap)
        manifest.add_output(out)
    csv_path = write_diagnostics_csv(out_dir / "diagnostics.csv",
                                     diagnostics.records)
    manifest.add_output(csv_path)
    manifest.finished_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    manifest.write(out_dir / "manifest.json")
    print(f"propagated to z = {result.field.z:g} cm; "
          f"{len(result.snapshots)} snapshots in {out_dir}")
    return EXIT_OK


def cmd_analyze(cfg, out_dir: Path, seed: int, args) -> int:
    snapshots = sorted(out_dir.glob("*.rbpf"))
    if not snapshots:
        raise ConfigurationError([f"no field snapshots in {out_dir}"])
    manifest = _start_manifest(cfg, seed)
    fields = sorted((read_field(p, cfg.grid) for p in snapshots),
                    key=lambda f: f.z)
    diagnostics = RunDiagnostics(input_power=fields[0].power())
    for fld in fields:
        diagnostics.append(diagnose(fld))
    last = fields[-1]
    csv_path = write_diagnostics_csv(out_dir / "analysis.csv",
                                     diagnostics.records)
    manifest.add_output(csv_path)
    profile_path = write_profile_csv(out_dir / "profile.csv", last)
    manifest.add_output(profile_path)
    manifest.finished_at = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    manifest.write(out_dir / "analysis_manifest.json")
    print(f"analyzed {len(diagnostics.records)} snapshots; "
          f"wrote {csv_path} and {profile_path}")
    return EXIT_OK


def cmd_oracle(cfg, out_dir: Path, seed: int, args) -> int:
    rng = np.random.default_rng(seed)
    pref = prefactor_over_gamma(cfg.params)
    draws = cfg.oracle["draws"]
    worst = 0.0
    worst_draw = None
    for _ in range(draws):
        g = rng.uniform(0.01, 2.0)
        G = rng.uniform(0.01, 2.0)
        big_gamma = rng.uniform(1.0e-4, 1.0e-2)
        delta_p = rng.uniform(-300.0, 300.0)
        delta_R = rng.uniform(-0.1, 0.1)
        delta_c = delta_p - delta_R
        point = FieldPoint(g * g, G * G)
        closed = chi_stationary(point, delta_p, delta_c, big_gamma, pref)
        ode = steady_state_oracle(point, delta_p, delta_c, big_gamma, pref)
        rel = abs(closed - ode) / abs(ode)
        if rel > worst:
            worst = rel
            worst_draw = (g, G, big_gamma, delta_p, delta_R)
    print(f"oracle sweep: {draws} draws, max relative error {worst:.3e}")
    if worst_draw is not None:
        g, G, bg, dp, dr = worst_draw
        print(f"  worst at g={g:.4f} G={G:.4f} big_gamma={bg:.2e} "
              f"delta_p={dp:.2f} delta_R={dr:.4f}")
    return EXIT_OK if worst < 1.0e-6 else EXIT_NUMERICS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbprop",
        description="Probe beam propagation through a structured Raman vapor")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("chi-scan", "susceptibility map over radius and Raman detuning"),
            ("propagate", "split-step propagation through the cell"),
            ("analyze", "widths, powers and peaks from stored snapshots"),
            ("oracle", "closed form vs density-matrix steady state")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="configuration file")
        p.add_argument("--out", default="rbprop-out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--order", type=int, choices=(2, 4), default=2,
                       help="splitting order for propagate")
        p.add_argument("--direct-chi", action="store_true",
                       help="bypass the susceptibility table")
    return parser


_COMMANDS = {
    "chi-scan": cmd_chi_scan,
    "propagate": cmd_propagate,
    "analyze": cmd_analyze,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _worker_count()
        cfg = parse_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with OutputLock(out_dir):
            return _COMMANDS[args.command](cfg, out_dir, args.seed, args)
    except (ConfigurationError, OutputLockError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericsError, OracleConvergenceError, TableRefinementError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
