"""``fgsim`` command line: simulate, sweep, levitate, sensitivity, exclusion.

Each subcommand reads an optional flat JSON config whose keys carry their
units (``radius_m``, ``B_ext_T``...).  Unknown keys are rejected.  The
effective config, with every default filled in, is written next to the
output as ``<out>.config.json`` and reproduces the run when fed back.

Exit codes: 0 success, 2 invalid config or parameters, 3 numerical failure.
"""

import argparse
from dataclasses import dataclass
import json
import logging
import math
import numbers
import os
import sys

from . import __version__
from .dynamics import (TRAJECTORY_HEADER, IntegratorConfig, ModelKind, brick_state, free_state,
                       integrate, levitated_state)
from .errors import FGSimError, NumericalError, ParameterError
from .exotic import SpinSource, exclusion_curve, mass_grid
from .levitation import equilibrium_height, log_radii, suppression_curve, suppression_factor
from .model import CODATA, FGParams, derive, reference_params, scale_params
from .output import atomic_write, json_text, write_csv, write_json
from .pickup import SQUIDParams
from .sensitivity import GasParams, budget, levitated_suppression
from .spectral import SWEEP_HEADER, attach_flux, log_grid, sweep_frequencies

log = logging.getLogger("fgsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


# --------------------------------------------------------------------------
# config schema


@dataclass(frozen=True)
class Field:
    kind: str
    default: object = None
    choices: tuple = ()


def _fg_fields(radius):
    return {
        "radius_m": Field("pos", radius),
        "spin_count": Field("opt_pos"),
        "mass_kg": Field("opt_pos"),
        "moment_per_spin_J_per_T": Field("pos", CODATA.mu_B),
        "g_grav_m_s2": Field("pos", CODATA.g_grav),
    }


def _squid_fields(loop=None):
    return {
        "loop_radius_m": Field("opt_pos", loop),
        "standoff_m": Field("opt_pos", loop),
        "flux_noise_T_m2_per_rtHz": Field("pos", 1e-21),
    }


_GAS = {
    "gas_mass_kg": Field("pos", CODATA.m_He),
    "temperature_K": Field("pos", 4.0),
    "number_density_m3": Field("pos", 3e19),
}

_TOL = {
    "rel_tol": Field("unit", 1e-10),
    "abs_tol": Field("unit", 1e-12),
}

SCHEMAS = {
    "simulate": {
        **_fg_fields(30e-6),
        "model": Field("choice", "free", ("free", "brick", "levitated")),
        "B_ext_T": Field("vec3", [0.0, 0.0, 0.0]),
        "n0": Field("vec3", [1.0, 0.0, 0.0]),
        "ell0": Field("vec3", [0.0, 0.0, 0.0]),
        "tilt_deg": Field("float", 0.0),
        "azimuth_deg": Field("float", 0.0),
        "height_m": Field("opt_pos"),
        "frozen_com": Field("bool", False),
        "image_field_enabled": Field("bool", True),
        "gravity_enabled": Field("bool", True),
        "duration_s": Field("nonneg", 10.0),
        "sample_interval_s": Field("pos", 1e-2),
        **_TOL,
        "max_step_s": Field("opt_pos"),
        "renormalize_n": Field("bool", True),
        "max_steps": Field("int_pos", 200_000_000),
        "flux_mode": Field("choice", "fast", ("fast", "exact", "none")),
        **_squid_fields(),
    },
    "sweep": {
        **_fg_fields(30e-6),
        "omega_L_min_rel": Field("pos", 1e-3),
        "omega_L_max_rel": Field("pos", 1e3),
        "points_per_decade": Field("int_pos", 7),
        "omega_L_rad_s": Field("opt_list"),
        **_TOL,
        **_squid_fields(),
    },
    "levitate": {
        **_fg_fields(30e-6),
        "radius_min_m": Field("pos", 1e-8),
        "radius_max_m": Field("pos", 1e-4),
        "points_per_decade": Field("int_pos", 10),
        "radii_m": Field("opt_list"),
    },
    "sensitivity": {
        **_fg_fields(1e-6),
        **_GAS,
        **_squid_fields(1e-6),
        "t_s": Field("pos", 1e6),
        "suppression": Field("suppression", "levitated"),
    },
    "exclusion": {
        **_fg_fields(1e-6),
        **_GAS,
        **_squid_fields(1e-6),
        "source_radius_m": Field("pos", 1e-3),
        "source_spins": Field("pos", 5e19),
        "gap_m": Field("pos", 1e-3),
        "distance_mode": Field("choice", "gap", ("gap", "center")),
        "polarization_axis": Field("vec3", [0.0, 0.0, 1.0]),
        "source_direction": Field("vec3", [0.0, 0.0, -1.0]),
        "mass_min_eV": Field("pos", 1e-8),
        "mass_max_eV": Field("pos", 1e-2),
        "points_per_decade": Field("int_pos", 10),
        "boson_masses_eV": Field("opt_list"),
        "noise_floor_rad_s": Field("opt_pos"),
        "integration_time_s": Field("pos", 1e6),
        "suppression": Field("suppression", "levitated"),
        "quadrature": Field("choice", "point", ("point", "volume")),
    },
}


def _is_real(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool) and math.isfinite(v)


def _check(key, f, v):
    def bad(what):
        raise ParameterError(f"config key {key!r}: expected {what}, got {v!r}", key)

    k = f.kind
    if k in ("opt_pos", "opt_list") and v is None:
        return None
    if k in ("pos", "opt_pos"):
        if not (_is_real(v) and v > 0):
            bad("a positive number")
        return float(v)
    if k == "nonneg":
        if not (_is_real(v) and v >= 0):
            bad("a non-negative number")
        return float(v)
    if k == "unit":
        if not (_is_real(v) and 0 < v < 1):
            bad("a number in (0, 1)")
        return float(v)
    if k == "float":
        if not _is_real(v):
            bad("a finite number")
        return float(v)
    if k == "int_pos":
        if not (isinstance(v, numbers.Integral) and not isinstance(v, bool) and v > 0):
            bad("a positive integer")
        return int(v)
    if k == "bool":
        if not isinstance(v, bool):
            bad("true or false")
        return v
    if k == "choice":
        if v not in f.choices:
            bad("one of " + ", ".join(f.choices))
        return v
    if k == "vec3":
        if not (isinstance(v, list) and len(v) == 3 and all(_is_real(x) for x in v)):
            bad("a list of three finite numbers")
        return [float(x) for x in v]
    if k == "opt_list":
        if not (isinstance(v, list) and v and all(_is_real(x) and x >= 0 for x in v)):
            bad("a non-empty list of non-negative numbers")
        return [float(x) for x in v]
    if k == "suppression":
        if v == "levitated":
            return v
        if not (_is_real(v) and v >= 1):
            bad('"levitated" or a number >= 1')
        return float(v)
    raise AssertionError(k)


def load_config(command, path=None):
    """Validated config for ``command`` with defaults filled in."""
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ParameterError(f"cannot read config {path}: {exc.strerror}", "config") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"config {path} is not valid JSON: {exc}", "config") from exc
        if not isinstance(raw, dict):
            raise ParameterError("config must be a JSON object", "config")
    schema = SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ParameterError(f"unknown config key {unknown[0]!r} for {command}", unknown[0])
    return {key: _check(key, f, raw.get(key, f.default)) for key, f in schema.items()}


def _fg_params(cfg, consts):
    """FG from the config; spin count and mass default to the reference densities."""
    ref = reference_params(consts)
    scaled = scale_params(ref, cfg["radius_m"])
    if cfg["spin_count"] is None:
        cfg["spin_count"] = scaled.spin_count
    if cfg["mass_kg"] is None:
        cfg["mass_kg"] = scaled.mass
    return FGParams(cfg["radius_m"], cfg["spin_count"], cfg["mass_kg"],
                    cfg["moment_per_spin_J_per_T"])


def _squid(cfg, radius):
    if cfg["loop_radius_m"] is None:
        cfg["loop_radius_m"] = radius
    if cfg["standoff_m"] is None:
        cfg["standoff_m"] = radius
    return SQUIDParams(cfg["loop_radius_m"], cfg["standoff_m"], cfg["flux_noise_T_m2_per_rtHz"])


def _consts(cfg):
    return CODATA.with_gravity(cfg["g_grav_m_s2"])


def _gas(cfg):
    return GasParams(cfg["gas_mass_kg"], cfg["temperature_K"], cfg["number_density_m3"])


def _grid_check(cfg, lo, hi):
    if not cfg[hi] > cfg[lo]:
        raise ParameterError(f"{hi} must exceed {lo}", hi)


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg, args):
    consts = _consts(cfg)
    params = _fg_params(cfg, consts)
    d = derive(params, consts)
    kind = cfg["model"]
    B = cfg["B_ext_T"]
    if kind == "levitated":
        height = cfg["height_m"]
        if height is None:
            height = equilibrium_height(params, d, consts).z_eq
            cfg["height_m"] = height
        tilt = math.radians(cfg["tilt_deg"])
        if not abs(tilt) < math.pi / 2:
            raise ParameterError("tilt_deg must lie strictly between -90 and 90", "tilt_deg")
        state = levitated_state(height, tilt, cfg["ell0"], math.radians(cfg["azimuth_deg"]))
        model = ModelKind.levitated(B, consts.g_grav, cfg["frozen_com"],
                                    cfg["image_field_enabled"], cfg["gravity_enabled"])
    else:
        if not any(cfg["n0"]):
            raise ParameterError("n0 must be non-zero", "n0")
        if kind == "brick":
            if any(cfg["ell0"]):
                raise ParameterError("the brick starts from rest: ell0 must be zero", "ell0")
            state = brick_state(cfg["n0"])
            model = ModelKind.brick(B)
        else:
            state = free_state(cfg["n0"], cfg["ell0"])
            model = ModelKind.free(B)
    icfg = IntegratorConfig(
        rel_tol=cfg["rel_tol"], abs_tol=cfg["abs_tol"],
        max_step=math.inf if cfg["max_step_s"] is None else cfg["max_step_s"],
        sample_interval=cfg["sample_interval_s"], renormalize_n=cfg["renormalize_n"],
        max_steps=cfg["max_steps"])
    squid = _squid(cfg, params.radius)
    log.info("integrating %s FG for %g s", kind, cfg["duration_s"])
    traj = integrate(state, model, d, icfg, cfg["duration_s"], consts)
    if cfg["flux_mode"] != "none":
        traj = attach_flux(traj, squid, cfg["flux_mode"], consts)
    write_csv(args.out, TRAJECTORY_HEADER, traj.rows())
    _figure(args, lambda p: _plots().trajectory_figure(traj, p))
    return (f"simulate: {len(traj)} samples of the {kind} model over {cfg['duration_s']:g} s "
            f"({traj.n_accepted} steps) -> {args.out}")


def cmd_sweep(cfg, args):
    consts = _consts(cfg)
    params = _fg_params(cfg, consts)
    d = derive(params, consts)
    if cfg["omega_L_rad_s"] is not None:
        values = cfg["omega_L_rad_s"]
        if any(not v > 0 for v in values):
            raise ParameterError("omega_L_rad_s entries must be positive", "omega_L_rad_s")
    else:
        _grid_check(cfg, "omega_L_min_rel", "omega_L_max_rel")
        values = [d.omega_I * x for x in log_grid(cfg["omega_L_min_rel"], cfg["omega_L_max_rel"],
                                                  cfg["points_per_decade"])]
    squid = _squid(cfg, params.radius)
    rows = sweep_frequencies(params, values, squid, args.threads, cfg["rel_tol"], cfg["abs_tol"],
                             consts)
    for r in rows:
        if r.error:
            log.warning("omega_L = %g rad/s: %s", r.omega_L, r.error)
    write_csv(args.out, SWEEP_HEADER, (r.csv_fields() for r in rows))
    _figure(args, lambda p: _plots().sweep_figure(rows, d.omega_I, p))
    failed = sum(1 for r in rows if r.error)
    return f"sweep: {len(rows)} Larmor frequencies ({failed} failed) -> {args.out}"


def cmd_levitate(cfg, args):
    consts = _consts(cfg)
    params = _fg_params(cfg, consts)
    d = derive(params, consts)
    if cfg["radii_m"] is not None:
        radii = cfg["radii_m"]
    else:
        _grid_check(cfg, "radius_min_m", "radius_max_m")
        radii = log_radii(cfg["radius_min_m"], cfg["radius_max_m"], cfg["points_per_decade"])
    points = suppression_curve(radii, params, consts)
    write_csv(args.out, ("radius_m", "ratio", "z_eq_m", "B_image_T"),
              ((p.radius, p.ratio, p.z_eq, p.B_image) for p in points))
    _figure(args, lambda p: _plots().suppression_figure(points, p))
    eq = equilibrium_height(params, d, consts)
    ratio = suppression_factor(eq.B_image_mag, d)
    return (f"levitate: {len(points)} radii -> {args.out}; r = {params.radius:g} m floats at "
            f"{eq.z_eq:.6g} m with suppression {ratio:.6g}")


def _noise(cfg, params, consts, t):
    sup = cfg["suppression"]
    if sup == "levitated":
        sup = levitated_suppression(params, consts)
    squid = _squid(cfg, params.radius)
    return budget(params, _gas(cfg), squid, t, sup, consts)


def cmd_sensitivity(cfg, args):
    consts = _consts(cfg)
    params = _fg_params(cfg, consts)
    t = cfg["t_s"]
    nb = _noise(cfg, params, consts, t)
    report = {
        "omega_col_1s": nb.delta_omega_col(1.0),
        "omega_det_1s": nb.delta_omega_det(1.0),
        "crossover_s": nb.crossover_time(),
        "floor_at_t": nb.floor(t),
        "t_s": t,
        "suppression": nb.suppression,
        "dominant_at_t": nb.dominant(t),
    }
    text = json.dumps({k: report[k] for k in sorted(report)}, sort_keys=True)
    if args.out:
        write_json(args.out, report)
    _figure(args, lambda p: _plots().noise_figure(nb, p))
    return text


def cmd_exclusion(cfg, args):
    consts = _consts(cfg)
    params = _fg_params(cfg, consts)
    source = SpinSource(cfg["source_radius_m"], cfg["source_spins"], cfg["gap_m"],
                        tuple(cfg["polarization_axis"]), tuple(cfg["source_direction"]),
                        cfg["distance_mode"])
    if cfg["boson_masses_eV"] is not None:
        masses = cfg["boson_masses_eV"]
    else:
        _grid_check(cfg, "mass_min_eV", "mass_max_eV")
        masses = mass_grid(cfg["mass_min_eV"], cfg["mass_max_eV"], cfg["points_per_decade"])
    nb = _noise(cfg, params, consts, cfg["integration_time_s"])
    if cfg["noise_floor_rad_s"] is None:
        cfg["noise_floor_rad_s"] = nb.floor(cfg["integration_time_s"])
    curve = exclusion_curve(masses, source, params, cfg["noise_floor_rad_s"], nb.suppression,
                            cfg["quadrature"], args.threads,
                            {"integration_time_s": cfg["integration_time_s"]}, consts)
    write_csv(args.out, ("boson_mass_eV", "min_coupling"), curve.rows())
    write_json(args.out + ".meta.json", curve.metadata)
    _figure(args, lambda p: _plots().exclusion_figure(curve, p))
    return (f"exclusion: {len(curve.masses)} masses, massless limit "
            f"{curve.min_coupling[0]:.4g} -> {args.out}")


COMMANDS = {
    "simulate": (cmd_simulate, "integrate one FG trajectory to CSV"),
    "sweep": (cmd_sweep, "spectral lines of free FG and brick versus Larmor frequency"),
    "levitate": (cmd_levitate, "suppression factor versus radius above a superconductor"),
    "sensitivity": (cmd_sensitivity, "collision and SQUID noise budget as JSON"),
    "exclusion": (cmd_exclusion, "minimum detectable pseudoscalar coupling versus boson mass"),
}


# --------------------------------------------------------------------------
# entry point


def _plots():
    from . import plotting
    return plotting


def _figure(args, draw):
    if args.figure is None:
        return
    path = args.figure
    if path == "auto":
        if not args.out:
            raise ParameterError("--figure without a path needs --out", "figure")
        path = os.path.splitext(args.out)[0] + ".png"
    draw(path)
    log.info("figure written to %s", path)


def _threads(value):
    if value is None:
        value = os.environ.get("FGSIM_THREADS", "1")
    try:
        n = int(value)
    except (TypeError, ValueError):
        n = 0
    if n < 1:
        raise ParameterError(f"thread count must be a positive integer, got {value!r}", "threads")
    return n


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (unit-suffixed keys)")
    common.add_argument("--out", help="output path (CSV, or JSON for sensitivity)")
    common.add_argument("--threads", help="worker threads (default: $FGSIM_THREADS or 1)")
    common.add_argument("--verbose", action="store_true", help="log progress to stderr")
    common.add_argument("--figure", nargs="?", const="auto", default=None, metavar="PNG",
                        help="also render a figure (default path: <out> with .png)")
    parser = argparse.ArgumentParser(prog="fgsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"fgsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    func, _ = COMMANDS[args.command]
    try:
        args.threads = _threads(args.threads)
        if args.out is None and args.command != "sensitivity":
            raise ParameterError(f"{args.command} needs --out", "out")
        cfg = load_config(args.command, args.config)
        summary = func(cfg, args)
        if args.out:
            atomic_write(args.out + ".config.json", json_text(_effective(args.command, cfg)))
    except ParameterError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"fgsim {args.command}: invalid input{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        when = "" if exc.time is None else f" at t = {exc.time:.9g} s"
        print(f"fgsim {args.command}: numerical failure{when}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FGSimError as exc:
        print(f"fgsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(summary)
    return EXIT_OK


def _effective(command, cfg):
    return {k: cfg[k] for k in SCHEMAS[command]}


if __name__ == "__main__":
    sys.exit(main())
