"""Command-line front end: ``bec-gwsim <subcommand> --scenario FILE``.

Subcommands
    simulate  evolve the phonon modes under the scenario wave, write mode
              functions and the Bogoliubov summary
    scan      growth exponent of |beta_nn| over a grid of drive frequencies
    plan      Feshbach field schedule for the target wave and its validation
    source    strain and frequency of the binary source, nearest resonant mode
    verify    pull the acoustic metric back through the coordinate chain

Exit codes: 0 success, 2 validation or precondition failure, 3 numerical failure.
Every run writes ``manifest.json`` next to its artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .control import (
    SIGN_CONVENTION,
    max_fractional_modulation,
    plan_field_schedule,
    scattering_length,
    simulated_amplitude,
    sound_speed,
    strain_from_modulation,
    validate_schedule,
)
from .coordinates import amplitude_scaling, verification_grid
from .dynamics import (
    DriveSchedule,
    bogoliubov_extract,
    evolve,
    particle_number,
    resonance_scan,
)
from .errors import DomainError, IntegrationError, PlanningError, PreconditionError, ScenarioError
from .metric import FourVelocity, acoustic_metric, gw_perturbation, minkowski
from .scenario import Scenario, load_scenario
from .sources import KHZ_NOTE, binary_wave_params, resonance_match

DEFAULT_OUT = "out"

# Manifest warnings, keyed to the unresolved modelling questions they trace to.
WARNINGS = {
    "metric.rho-interpretation": "rho in the conformal factor is carried as an opaque scalar (rho0); "
    "its reading as number or mass density is not fixed",
    "coordinates.tau-orientation": "tau is fixed by chi(tau=0) = chi_scale with positive orientation",
    "dynamics.pair-resonance": "a uniform strain keeps modes decoupled; the off-diagonal Bogoliubov "
    "maximum is reported rather than assumed",
    "dynamics.growth-exponent": "exponents are reported for |beta_nn| (slope) and N_n = |beta_nn|^2 "
    "(number_slope); linear growth refers to |beta_nn|",
    "control.sign-convention": "planner uses " + SIGN_CONVENTION + "; simulated_amplitude keeps +prefactor*delta_b",
}


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


class Writer:
    """Single writer for one run's artifacts; tables honour --format."""

    def __init__(self, out: Path, fmt: str):
        self.out = out
        self.fmt = fmt
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, obj):
        (self.out / name).write_text(dumps(obj), encoding="utf-8")
        self.files.append(name)

    def table(self, stem: str, header, rows):
        if self.fmt == "json":
            records = [dict(zip(header, row)) for row in rows]
            self.json(stem + ".json", records)
            return
        name = stem + ".csv"
        with open(self.out / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        self.files.append(name)


def _complex_matrix(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _tolerance(args, scn: Scenario) -> float:
    tol = args.tolerance if args.tolerance is not None else scn.tolerance()
    if not tol > 0:
        raise ScenarioError("tolerance must be positive", "run.tolerance")
    return tol


def _source_warnings(scn: Scenario) -> dict:
    if "source" not in scn.raw:
        return {}
    bw = binary_wave_params(scn.binary_source(), scn.constants)
    if bw.in_khz_range():
        return {}
    return {"sources.khz-discrepancy": KHZ_NOTE.format(omega=bw.omega, hz=bw.frequency_hz)}


def _metric_rows(scn: Scenario, wave, cs0, times):
    """1+1 block of the flow-free phonon metric (conformal factor dropped)."""
    c = scn.constants.c
    cond = scn.condensate()
    eta = minkowski(c)
    rest = FourVelocity.from_1p1(1.0, 0.0)
    rows = []
    for t in times:
        g = acoustic_metric(eta + gw_perturbation(wave, t), cond, cs0, rest, c)
        rows.append((float(t), g[0, 0], g[0, 1], g[1, 1]))
    return rows


# subcommands ---------------------------------------------------------------


def cmd_simulate(args, scn: Scenario, writer: Writer, executor) -> dict:
    basis = scn.basis()
    wave = scn.wave(basis.omega1)
    tol = _tolerance(args, scn)
    periods = scn.periods()
    reduction = scn.reduction()
    drive = DriveSchedule.from_wave(wave)
    t_end = periods * drive.period
    ens = evolve(basis, drive, t_end, tol=tol, reduction=reduction)
    bog = bogoliubov_extract(ens)

    rows = []
    for j, n in enumerate(basis.indices):
        for i, t in enumerate(ens.times):
            q, qd = ens.q[j, i], ens.qdot[j, i]
            rows.append((float(t), int(n), q.real, q.imag, qd.real, qd.imag))
    writer.table("modes", ["t", "mode", "re_q", "im_q", "re_qdot", "im_qdot"], rows)
    writer.table("metric", ["t", "g_tt", "g_tx", "g_xx"], _metric_rows(scn, wave, basis.cs0, ens.times))

    summary = {
        "a_plus": wave.a_plus,
        "omega": wave.omega,
        "omega1": basis.omega1,
        "mode_frequencies": basis.frequencies,
        "periods": periods,
        "t_end": t_end,
        "reduction": reduction,
        "tolerance": tol,
        "alpha": _complex_matrix(bog.alpha),
        "beta": _complex_matrix(bog.beta),
        "beta_abs": np.abs(bog.beta),
        "particle_numbers": particle_number(bog),
        "mode_identity": bog.mode_identity(),
        "identity_defect": bog.identity_defect(),
        "offdiagonal_max": bog.offdiagonal_max(),
        "error_estimate": bog.error_estimate,
        "wronskian_drift": ens.wronskian_drift,
    }
    writer.json("summary.json", summary)
    warnings = {"dynamics.pair-resonance": WARNINGS["dynamics.pair-resonance"]}
    warnings.update(_source_warnings(scn))
    return {"tolerances": {"rtol": tol, "wronskian_max_drift": max(1e3 * tol, 1e-9)}, "warnings": warnings}


def cmd_scan(args, scn: Scenario, writer: Writer, executor) -> dict:
    basis = scn.basis()
    wave = scn.wave(basis.omega1)
    tol = _tolerance(args, scn)
    omegas = scn.scan_omegas(basis.omega1)
    periods = scn.scan_periods()
    reduction = scn.reduction()
    cells = resonance_scan(basis, wave.a_plus, omegas, periods, tol=tol, reduction=reduction, executor=executor)
    header = [
        "omega",
        "mode",
        "slope",
        "beta_abs_final",
        "omega_over_omega1",
        "slope_raw",
        "number_slope",
        "amplitude",
        "n_points",
        "status",
    ]
    rows = [
        (
            c.omega,
            c.mode,
            c.slope,
            c.beta_abs_final,
            c.omega / basis.omega1,
            c.slope_raw,
            c.number_slope,
            c.amplitude,
            c.n_points,
            c.status,
        )
        for c in cells
    ]
    writer.table("scan", header, rows)
    by_mode = {}
    for n in basis.indices:
        finite = [c for c in cells if c.mode == n and np.isfinite(c.slope)]
        if finite:
            best = max(finite, key=lambda c: (c.slope, -c.omega))
            by_mode[str(int(n))] = {"omega": best.omega, "omega_over_omega1": best.omega / basis.omega1, "slope": best.slope}
    writer.json(
        "scan_summary.json",
        {
            "a_plus": wave.a_plus,
            "omega1": basis.omega1,
            "periods": [periods[0], periods[-1]],
            "reduction": reduction,
            "tolerance": tol,
            "max_slope_by_mode": by_mode,
        },
    )
    warnings = {k: WARNINGS[k] for k in ("dynamics.pair-resonance", "dynamics.growth-exponent")}
    warnings.update(_source_warnings(scn))
    return {"tolerances": {"rtol": tol, "wronskian_max_drift": max(1e3 * tol, 1e-9)}, "warnings": warnings}


def _plan_sound_speed(scn: Scenario, fesh) -> float:
    """cs0 at the operating field: from (n, a(B_op)) when a density is given."""
    cond = scn.block("condensate")
    if "number_density" in cond:
        a0 = scattering_length(fesh.B_op, fesh)
        if not a0 > 0:
            raise PreconditionError(f"a(B_op) = {a0:.3e} m is not positive; no stable condensate")
        return float(sound_speed(float(cond["number_density"]), a0, scn.condensate().atom_mass, scn.constants.hbar))
    return scn.condensate().cs0


def cmd_plan(args, scn: Scenario, writer: Writer, executor) -> dict:
    fesh = scn.feshbach()
    target = scn.wave()
    cs0 = _plan_sound_speed(scn, fesh)
    periods = scn.periods()
    delta_b = scn.delta_b()
    limit = max_fractional_modulation(fesh)
    feasibility = {
        "a_bg_m": fesh.a_bg,
        "a_op_m": scattering_length(fesh.B_op, fesh),
        "B_op_gauss": fesh.B_op,
        "B_res_gauss": fesh.B_res,
        "width_gauss": fesh.width,
        "prefactor": fesh.prefactor,
        "cs0_mps": cs0,
        "target_a_plus": target.a_plus,
        "target_omega": target.omega,
        "delta_b_limit": limit,
        "sign_convention": SIGN_CONVENTION,
    }
    if delta_b is not None:
        feasibility["configured_delta_b"] = delta_b
        feasibility["simulated_amplitude"] = simulated_amplitude(delta_b, fesh)
        feasibility["strain_from_configured_delta_b"] = strain_from_modulation(delta_b, fesh)
    try:
        schedule = plan_field_schedule(target, fesh)
    except PlanningError as exc:
        feasibility.update(feasible=False, reason=str(exc))
        writer.json("feasibility.json", feasibility)
        raise
    val = validate_schedule(schedule, target, fesh, cs0=cs0, n_samples=256 * periods + 1, periods=periods)
    rows = zip(val.times, val.field_gauss, val.scattering_length, val.sound_speed, val.h_target, val.h_achieved)
    writer.table("schedule", ["t", "B_gauss", "a_m", "cs_mps", "h_plus_target", "h_plus_achieved"], list(rows))
    feasibility.update(
        feasible=True,
        delta_b=schedule.delta_b,
        max_relative_deviation=val.max_relative_deviation,
        max_field_gauss=float(np.max(val.field_gauss)),
        min_field_gauss=float(np.min(val.field_gauss)),
    )
    writer.json("feasibility.json", feasibility)
    warnings = {"control.sign-convention": WARNINGS["control.sign-convention"]}
    warnings.update(_source_warnings(scn))
    return {"tolerances": {"n_samples": 256 * periods + 1}, "warnings": warnings}


def cmd_source(args, scn: Scenario, writer: Writer, executor) -> dict:
    src = scn.binary_source()
    bw = binary_wave_params(src, scn.constants)
    report = {
        "a_plus": bw.a_plus,
        "omega": bw.omega,
        "frequency_hz": bw.frequency_hz,
        "wavelength": bw.wavelength,
        "far_field_ok": bw.far_field_ok,
        "in_khz_range": bw.in_khz_range(),
        "mass_1": src.mass_1,
        "mass_2": src.mass_2,
        "separation": src.separation,
        "distance": src.distance,
    }
    if "condensate" in scn.raw:
        match = resonance_match(scn.basis(), bw.omega)
        report["nearest_mode"] = {
            "mode": match.mode,
            "detuning": match.detuning,
            "box_length_for_match": match.box_length_for_match,
            "candidates": [list(c) for c in match.candidates],
        }
    text = dumps(report)
    sys.stdout.write(text)
    writer.json("source.json", report)
    notes = {} if bw.far_field_ok else {"far-field": "R <= 10 wavelengths; the far-field formulas are marginal"}
    return {"tolerances": {}, "warnings": _source_warnings(scn), "notes": notes}


def cmd_verify(args, scn: Scenario, writer: Writer, executor) -> dict:
    p = scn.chart()
    grid = scn.chart_grid()
    taus, xis = verification_grid(p, grid["n_tau"], grid["n_xi"], grid["periods"], grid["xi_extent"])
    scaling = amplitude_scaling(p, taus, xis, chi_mode=grid["chi_mode"], executor=executor)
    report = scaling.pop("report")
    writer.table("verify", ["tau", "xi", "residual_tt", "residual_tx", "residual_xx"], list(report.rows()))
    summary = dict(scaling)
    summary.update(
        chi_mode=grid["chi_mode"],
        n_tau=grid["n_tau"],
        n_xi=grid["n_xi"],
        ell=p.ell,
        tau0=p.tau0,
        cs0=p.cs0,
        c=p.c,
        omega=p.wave.omega,
        max_diagonal=report.max_diagonal,
        max_offdiagonal=report.max_offdiagonal,
        max_residual=report.max_residual,
    )
    writer.json("verify_summary.json", summary)
    warnings = {k: WARNINGS[k] for k in ("metric.rho-interpretation", "coordinates.tau-orientation")}
    return {"tolerances": {"fd_relative_step": 1e-3}, "warnings": warnings}


COMMANDS = {
    "simulate": cmd_simulate,
    "scan": cmd_scan,
    "plan": cmd_plan,
    "source": cmd_source,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bec-gwsim", description="Analog gravitational waves in a BEC.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__ or name)
        p.add_argument("--scenario", required=True, type=Path, help="scenario file (.toml or .json)")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: run.output or ./out)")
        p.add_argument("--tolerance", type=float, default=None, help="integrator tolerance override")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid cells")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    return parser


def _manifest(args, scn: Scenario, writer: Writer, info: dict) -> dict:
    return {
        "command": args.command,
        "scenario": scn.path.name if scn.path else None,
        "input_sha256": scn.input_hash,
        "format": args.format,
        "versions": {
            "bec_gwsim": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "constants": {"c": scn.constants.c, "G": scn.constants.G, "hbar": scn.constants.hbar},
        "tolerances": info.get("tolerances", {}),
        "warnings": [{"key": k, "message": v} for k, v in sorted(info.get("warnings", {}).items())],
        "notes": info.get("notes", {}),
        "artifacts": sorted(writer.files),
    }


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ScenarioError("must be at least 1", "--threads")
        scn = load_scenario(args.scenario)
        out = args.out or scn.output_dir() or Path(DEFAULT_OUT)
        writer = Writer(out, args.format)
        pool = ThreadPoolExecutor(max_workers=args.threads) if args.threads > 1 else None
        with pool or nullcontext():
            info = COMMANDS[args.command](args, scn, writer, pool)
        writer.json("manifest.json", _manifest(args, scn, writer, info))
    except (ScenarioError, PreconditionError, PlanningError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
