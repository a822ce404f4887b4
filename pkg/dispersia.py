#!/usr/bin/env python3
"""
dispersia command-line interface

Commands: solution, table, residual, evolve, compat, export. Logs go to
stderr; ``--json`` output on stdout is canonical (sorted keys, 17 digits).
"""

import functools
import logging
import math
import os
import sys
import time

import click
import numpy as np

from config import load_config
from manifest_utils import create_manifest, finalize_manifest, write_manifest
from modules.shallow_water import __version__
from modules.shallow_water.bathymetry import Bathymetry, ramp_bathymetry
from modules.shallow_water.boussinesq import compatibility_order_test, profile_grid, random_plane_field
from modules.shallow_water.equations import EquationOptions, residual_grid, residual_plane
from modules.shallow_water.errors import (ContractError, DispersiaError, StorageError, ThresholdError,
                                          ValidationError)
from modules.shallow_water.evolve import convergence_study, run
from modules.shallow_water.models import (CaseId, EquationId, EvolutionConfig, Field2D, Grid2D,
                                          PhysicalParams, SolutionFamily, SolutionKind)
from modules.shallow_water.solutions import (commensurate_grid, grid_solution, kp_moving_solution,
                                             make_family, mean_value, reference_table, sample_profile,
                                             wave_metrics)
from modules.shallow_water.storage import (canonical_json, load_snapshots, read_field, read_json,
                                           write_field, write_field_csv, write_json, write_table_csv)

logger = logging.getLogger("dispersia")

ZERO_MEAN_TOLERANCE = 1e-10
FAMILY_ALIASES = {
    "superposition-phys": SolutionKind.SUPERPOSITION_PHYS_PLUS,
    "superposition-math": SolutionKind.SUPERPOSITION_MATH_PLUS,
}
FAMILY_CHOICES = [kind.value for kind in SolutionKind] + list(FAMILY_ALIASES)
EQUATION_CHOICES = [eq.value for eq in EquationId]
CASE_CHOICES = [case.value for case in CaseId]


def parse_family(value):
    return FAMILY_ALIASES.get(value) or SolutionKind(value)


def emit(ctx, payload, text_lines):
    """Print JSON when --json was given, otherwise the human-readable lines"""
    if ctx.obj.get("json"):
        click.echo(canonical_json(payload))
    else:
        for line in text_lines:
            click.echo(line)


def handle_errors(func):
    """Map toolkit errors to their exit codes"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return func(*args, **kwargs)
        except DispersiaError as e:
            logger.error(f"[CLI] {e.message}")
            if ctx.obj.get("json"):
                click.echo(canonical_json(e.to_dict()))
            else:
                click.echo(f"Error: {e.message}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def exit_threshold(message):
    """Exit 3 after the report has been printed"""
    logger.error(f"[CLI] {message}")
    sys.exit(ThresholdError.exit_code)


def json_option(func):
    def callback(ctx, param, value):
        ctx.ensure_object(dict)
        ctx.obj["json"] = ctx.obj.get("json") or value
        return value
    return click.option("--json", "as_json", is_flag=True, expose_value=False, callback=callback,
                        help="Machine-readable output on stdout.")(func)


def physical_options(func):
    for name, help_text in reversed([
        ("alpha", "Nonlinearity parameter."),
        ("beta", "Dispersion parameter."),
        ("gamma", "Transverse parameter."),
        ("delta", "Bottom-variation parameter."),
        ("tau", "Bond number."),
    ]):
        func = click.option(f"--{name}", type=float, default=None, help=help_text)(func)
    return func


def wave_options(func):
    func = click.option("--lambda", "lam", type=float, default=None, help="KP transverse coefficient.")(func)
    func = click.option("--m", type=float, default=None, help="Elliptic parameter.")(func)
    func = click.option("--l", type=float, default=None, help="Transverse wavenumber.")(func)
    func = click.option("--k", type=float, default=None, help="Longitudinal wavenumber.")(func)
    return func


def resolve_params(ctx, alpha=None, beta=None, gamma=None, delta=None, tau=None, **extra):
    values = dict(ctx.obj["config"]["params"])
    for name, value in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta), ("tau", tau)):
        if value is not None:
            values[name] = value
    p = PhysicalParams(alpha=values["alpha"], beta=values["beta"], gamma=values["gamma"],
                       delta=values["delta"], tau=values["tau"], **extra)
    p.require_valid()
    return p


def resolve_family(ctx, kind, k, l, m, lam, p):
    wave = ctx.obj["config"]["wave"]
    k = wave["k"] if k is None else k
    l = wave["l"] if l is None else l
    if m is None:
        m = wave["m_superposition"] if kind.is_superposition else wave["m_cnoidal"]
        if kind.is_soliton:
            m = 1.0
    return make_family(kind, k, l, p, m=m, lam=lam)


def resolve_bathymetry(bathymetry_file, ramp, length_x):
    if bathymetry_file and ramp:
        raise ValidationError("Use either --bathymetry or --ramp, not both")
    if bathymetry_file:
        return Bathymetry.from_dict(read_json(bathymetry_file))
    if ramp:
        return ramp_bathymetry(length_x)
    return None


@click.group()
@click.version_option(__version__, prog_name="dispersia")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for random test fields.")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Logging level (default from config).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Configuration file (default data/config.json or $DISPERSIA_CONFIG).")
@click.pass_context
def cli(ctx, seed, log_level, config_path):
    """Shallow-water wave equations: solutions, residuals, evolution and compatibility checks."""
    ctx.ensure_object(dict)
    try:
        config = load_config(config_path)
    except DispersiaError as e:
        click.echo(f"Error: {e.message}", err=True)
        sys.exit(e.exit_code)
    level = (log_level or config.get("log_level", "INFO")).upper()
    logging.basicConfig(level=getattr(logging, level), stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.obj.update(config=config, seed=seed, rng=np.random.default_rng(seed), json=False)


@cli.command()
@click.argument("family", type=click.Choice(FAMILY_CHOICES))
@wave_options
@physical_options
@click.option("--samples", type=int, default=2048, show_default=True, help="Profile samples per period.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@json_option
@click.pass_context
@handle_errors
def solution(ctx, family, k, l, m, lam, alpha, beta, gamma, delta, tau, samples, out):
    """Build a traveling-wave family and print its amplitude and speed.

    With --out, writes family.json and profile.csv (columns xi,u).
    """
    started = time.perf_counter()
    p = resolve_params(ctx, alpha, beta, gamma, delta, tau)
    s = resolve_family(ctx, parse_family(family), k, l, m, lam, p)
    metrics = wave_metrics(s)
    payload = {"family": s.to_dict(), "metrics": metrics.to_dict()}
    lines = [f"family: {s.kind.value}",
             f"amplitude: {metrics.amplitude:.6f}",
             f"speed: {metrics.speed:.6f}",
             f"omega: {s.wave.omega:.10g}"]
    if s.kind.is_physical:
        mean = mean_value(s)
        status = "PASS" if abs(mean) <= ZERO_MEAN_TOLERANCE else "FAIL"
        payload["zero_mean"] = {"mean": mean, "status": status}
        lines.append(f"zero-mean check: {status} (mean {mean:.3e})")
    if out:
        manifest = create_manifest("solution", {"family": s.to_dict(), "samples": samples})
        write_manifest(out, manifest)
        write_json(os.path.join(out, "family.json"), s.to_dict())
        xi, u = sample_profile(s, samples)
        write_table_csv(os.path.join(out, "profile.csv"), ["xi", "u"], np.column_stack([xi, u]))
        finalize_manifest(out, manifest, outputs={"family": "family.json", "profile": "profile.csv"},
                          wall_time=time.perf_counter() - started)
        lines.append(f"written: {out}")
    emit(ctx, payload, lines)


@cli.command()
@physical_options
@click.option("--k", type=float, default=None)
@click.option("--l", type=float, default=None)
@click.option("--m-cnoidal", type=float, default=None)
@click.option("--m-superposition", type=float, default=None)
@click.option("--tolerance", type=float, default=None, help="Absolute tolerance (default 2e-4).")
@json_option
@click.pass_context
@handle_errors
def table(ctx, alpha, beta, gamma, delta, tau, k, l, m_cnoidal, m_superposition, tolerance):
    """Reproduce the reference amplitudes and speeds of the three wave families."""
    config = ctx.obj["config"]
    wave = config["wave"]
    tolerance = config["table"]["tolerance"] if tolerance is None else tolerance
    p = resolve_params(ctx, alpha, beta, gamma, delta, tau)
    rows = reference_table(p, wave["k"] if k is None else k, wave["l"] if l is None else l,
                           wave["m_cnoidal"] if m_cnoidal is None else m_cnoidal,
                           wave["m_superposition"] if m_superposition is None else m_superposition)
    documents = [row.to_dict(tolerance) for row in rows]
    failures = [d["name"] for d in documents if d["status"] != "PASS"]
    lines = [f"{d['name']:<6} {d['value']:.6f}  ref {d['reference']:.5f}  diff {d['difference']:.2e}  "
             f"{d['status']}" for d in documents]
    emit(ctx, {"tolerance": tolerance, "rows": documents, "passed": not failures}, lines)
    if failures:
        exit_threshold(f"{len(failures)} table value(s) outside tolerance {tolerance:g}: {', '.join(failures)}")


@cli.command()
@click.argument("equation", type=click.Choice(EQUATION_CHOICES))
@click.option("--family", "family", type=click.Choice(FAMILY_CHOICES), default=None,
              help="Closed-form family to audit.")
@click.option("--soliton", "shorthand", flag_value="soliton", help="Shorthand for --family soliton.")
@click.option("--kp-soliton", "shorthand", flag_value="kp-soliton", help="Shorthand for --family kp-soliton.")
@click.option("--solution-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="family.json written by 'solution --out'.")
@click.option("--moving-frame", is_flag=True, help="Map a KdV family into the moving KP frame first.")
@wave_options
@physical_options
@click.option("--field", "field_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Field2D binary of u.")
@click.option("--field-t", "field_t_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Field2D binary of u_t.")
@click.option("--mode", type=click.Choice(["plane-wave", "grid"]), default=None,
              help="Evaluation mode (default plane-wave for families, grid for fields).")
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--bathymetry", "bathymetry_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Bathymetry JSON with a 'segments' list.")
@click.option("--ramp", is_flag=True, help="Use a ramp-and-shelf bottom over the box.")
@click.option("--include-gamma2/--no-gamma2", default=True, show_default=True,
              help="Nested gamma^2 term of the fifth-order equations.")
@click.option("--printed-quartic", is_flag=True,
              help="gardner21 only: add the (3/2)(alpha gamma/beta) u I[u^2 u_yy] bracket term, "
                   "which the default gardner21 residual leaves out.")
@click.option("--threshold", type=float, default=None, help="Fail (exit 3) when max|r| reaches this.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@json_option
@click.pass_context
@handle_errors
def residual(ctx, equation, family, shorthand, solution_file, moving_frame, k, l, m, lam, alpha, beta,
             gamma, delta, tau, field_path, field_t_path, mode, nx, ny, bathymetry_file, ramp,
             include_gamma2, printed_quartic, threshold, out):
    """Evaluate an equation's residual on a family (plane-wave or gridded) or on stored fields.

    By default gardner21 leaves the u I[u^2 u_yy] term out of its transverse
    bracket (coefficient 0); --printed-quartic adds it.
    """
    started = time.perf_counter()
    eq = EquationId(equation)
    options = EquationOptions(include_gamma2=include_gamma2, printed_quartic=printed_quartic)
    family = family or shorthand
    if (family or solution_file) and field_path:
        raise ValidationError("Give either a family or --field, not both")
    p = resolve_params(ctx, alpha, beta, gamma, delta, tau,
                       kp_lambda=lam if eq is EquationId.KP_CLASSICAL else None)

    if field_path:
        if not field_t_path:
            raise ValidationError("--field needs --field-t")
        if mode == "plane-wave":
            raise ContractError("Stored fields can only be evaluated in grid mode")
        u, u_t = read_field(field_path), read_field(field_t_path)
        source = {"field": field_path, "field_t": field_t_path}
    elif family or solution_file:
        if solution_file:
            s = SolutionFamily.from_dict(read_json(solution_file))
        else:
            s = resolve_family(ctx, parse_family(family), k, l, m, lam, p)
        if moving_frame:
            s = kp_moving_solution(s)
        source = {"family": s.to_dict()}
    else:
        raise ValidationError("Nothing to evaluate: give --family, --soliton, --kp-soliton, "
                              "--solution-file or --field")

    mode = mode or ("grid" if field_path else "plane-wave")
    if mode == "plane-wave":
        if bathymetry_file or ramp:
            raise ContractError("Plane-wave residuals are flat-bottom only")
        report = residual_plane(eq, s, ctx.obj["config"]["residual"]["xi_samples"], options)
        if threshold is None:
            threshold = ctx.obj["config"]["residual"]["plane_threshold"]
    else:
        if not field_path:
            grid = commensurate_grid(s, nx or ctx.obj["config"]["grid"]["nx"],
                                     ny or ctx.obj["config"]["grid"]["ny"])
            u, u_t = grid_solution(s, grid)
        bathy = resolve_bathymetry(bathymetry_file, ramp, u.grid.length_x)
        report = residual_grid(eq, u, u_t, bathy, p, options)

    payload = {"report": report.to_dict(), "source": source, "threshold": threshold}
    lines = [f"equation: {eq.value} ({report.mode.value})",
             f"max |r|: {report.max_abs:.3e}",
             f"rms r:   {report.rms:.3e}",
             f"at:      {', '.join(f'{c:.6g}' for c in report.location_of_max)}"]
    if report.flags:
        lines.append(f"flags:   {', '.join(report.flags)}")
    if threshold is not None:
        lines.append(f"status:  {'PASS' if report.passed(threshold) else 'FAIL'} (threshold {threshold:g})")
    if out:
        manifest = create_manifest("residual", {"equation": eq.value, "params": p.to_dict(), "mode": mode,
                                                "options": {"include_gamma2": include_gamma2,
                                                            "printed_quartic": printed_quartic},
                                                "source": source})
        write_manifest(out, manifest)
        write_json(os.path.join(out, "report.json"), report.to_dict())
        finalize_manifest(out, manifest, outputs={"report": "report.json"},
                          wall_time=time.perf_counter() - started)
    emit(ctx, payload, lines)
    if threshold is not None and not report.passed(threshold):
        exit_threshold(f"Residual {report.max_abs:.3e} reaches threshold {threshold:g}")


def _initial_field(ctx, initial, grid, p):
    """u0 from an 'initial' document: a family, a stored field, random, or zero"""
    if "field" in initial:
        return read_field(initial["field"]), None
    if initial.get("zero"):
        return Field2D.zeros(grid), None
    if "random" in initial:
        settings = initial["random"]
        return random_plane_field(grid, ctx.obj["rng"], settings.get("cycles_x", 1), settings.get("cycles_y", 0),
                                  settings.get("modes", 3), settings.get("amplitude", 0.1)), None
    kind = parse_family(initial.get("family", "soliton"))
    s = make_family(kind, initial.get("k", 1.0), initial.get("l", 0.0), p, m=initial.get("m", 1.0),
                    lam=initial.get("lambda"))
    u, _ = grid_solution(s, grid)
    return u, s


@cli.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--equation", type=click.Choice([e.value for e in EquationId]), default=None)
@click.option("--dt", type=float, default=None)
@click.option("--t-end", type=float, default=None)
@click.option("--snapshot-every", type=int, default=None)
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--convergence", is_flag=True, help="Also run the dt, dt/2 vs dt/8 study.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Trajectory directory.")
@json_option
@click.pass_context
@handle_errors
def evolve(ctx, config_file, equation, dt, t_end, snapshot_every, nx, ny, convergence, out):
    """Evolve an initial state with the integrating-factor RK4 solver.

    CONFIG_FILE is JSON with optional 'config' (EvolutionConfig), 'params',
    'grid' and 'initial' ({"family": ..., "k": ..., "l": ...}, {"field": path},
    {"random": {...}} or {"zero": true}) sections; flags override it.
    """
    document = read_json(config_file) if config_file else {}
    defaults = ctx.obj["config"]
    config_doc = {"equation": EquationId.KDV_2P1.value, **defaults["evolution"], **document.get("config", {})}
    for key, value in (("equation", equation), ("dt", dt), ("t_end", t_end), ("snapshot_every", snapshot_every)):
        if value is not None:
            config_doc[key] = value
    cfg = EvolutionConfig.from_dict(config_doc)
    p = PhysicalParams.from_dict({**defaults["params"], **document.get("params", {})})
    p.require_valid()
    grid_doc = {**defaults["grid"], **document.get("grid", {})}
    grid = Grid2D(nx or grid_doc["nx"], ny or grid_doc["ny"], grid_doc["length_x"], grid_doc["length_y"])
    initial = document.get("initial", {"family": "soliton", "k": 1.0, "l": 0.0})

    u0, s = _initial_field(ctx, initial, grid, p)
    trajectory = run(u0, cfg, p, out_dir=out, parameters={"initial": initial, "seed": ctx.obj["seed"]})
    payload = {"trajectory": trajectory.to_dict()}
    lines = [f"equation: {cfg.equation.value}",
             f"steps to t={trajectory.times[-1]:.6g}, snapshots: {len(trajectory.snapshots)}",
             f"mass drift: {trajectory.mass_drift():.3e}",
             f"l2 drift:   {trajectory.l2_drift():.3e}"]
    if s is not None and cfg.equation is EquationId.KDV_2P1 and not s.kind.is_kp:
        exact, _ = grid_solution(s, grid, trajectory.times[-1])
        error = float(np.max(np.abs(trajectory.final.values - exact.values)))
        payload["shape_error"] = error
        lines.append(f"L-inf error vs translated exact solution: {error:.3e}")
    if convergence:
        study = convergence_study(u0, cfg, p)
        payload["convergence"] = study.to_dict()
        lines.append(f"observed order: {study.order:.3f}")
    if out:
        lines.append(f"written: {out}")
    emit(ctx, payload, lines)


@cli.command()
@click.argument("case", type=click.Choice(CASE_CHOICES))
@click.option("--order", type=int, default=None, help="Correction order (default: 1 for case5, 2 otherwise).")
@click.option("--eps", "epsilons", type=float, multiple=True, help="Epsilon values, decreasing (repeatable).")
@click.option("--profile", type=click.Choice(["soliton", "random"]), default="random", show_default=True,
              help="soliton: soliton travelling along x; random: smooth oblique plane field.")
@click.option("--break", "disabled", multiple=True, help="Disable a correction by label (repeatable).")
@click.option("--trial-qga", type=float, default=0.0, help="Trial coefficient of the Case5 gamma/alpha correction.")
@click.option("--printed-quartic", is_flag=True, help="Use the quartic Case7 correction and Gardner term.")
@click.option("--tau", type=float, default=0.0)
@click.option("--bathymetry", "bathymetry_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--ramp", is_flag=True)
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")
@json_option
@click.pass_context
@handle_errors
def compat(ctx, case, order, epsilons, profile, disabled, trial_qga, printed_quartic, tau, bathymetry_file,
           ramp, nx, ny, workers, out):
    """Measure how fast the two Boussinesq equations agree as epsilon shrinks.

    CSV output columns: epsilon,max_difference,max_r1,max_r2.
    """
    started = time.perf_counter()
    case_id = CaseId(case)
    config = ctx.obj["config"]
    epsilons = list(epsilons) or list(config["compat"]["epsilons"])
    workers = workers if workers is not None else config["compat"]["workers"]
    if profile == "soliton":
        p = resolve_params(ctx)
        s = make_family(SolutionKind.SOLITON, config["wave"]["k"], 0.0, p)
        grid = profile_grid(s, nx or config["grid"]["nx"], ny or config["grid"]["ny"])
        u_profile = s
    else:
        grid = Grid2D(nx or config["grid"]["nx"], ny or config["grid"]["ny"], 4 * math.pi, 4 * math.pi)
        u_profile = random_plane_field(grid, ctx.obj["rng"], odd=printed_quartic)
    bathy = resolve_bathymetry(bathymetry_file, ramp, grid.length_x)
    report = compatibility_order_test(case_id, u_profile, epsilons, order=order, grid=grid, bathy=bathy,
                                      disabled=disabled, trial_qga=trial_qga, printed_quartic=printed_quartic,
                                      tau=tau, workers=workers)
    broken = bool(disabled) or trial_qga != 0.0 or printed_quartic
    if report.passed():
        status = "UNEXPECTED-PASS" if broken else "PASS"
    else:
        status = "BROKEN-AS-EXPECTED" if broken else "FAIL"
    payload = {**report.to_dict(), "status": status}
    lines = [f"case: {case_id.value}, order {report.order}, profile {report.profile}"]
    lines += [f"eps={row.epsilon:<8g} max|r1-r2|={row.max_difference:.3e}" for row in report.rows]
    lines.append(f"slope: {report.slope:.3f} (threshold {report.threshold:.2f}) {status}")
    if out:
        manifest = create_manifest("compat", {"case": case_id.value, "order": report.order,
                                              "epsilons": epsilons, "profile": profile,
                                              "disabled": list(disabled), "trial_qga": trial_qga,
                                              "printed_quartic": printed_quartic, "tau": tau,
                                              "grid": grid.to_dict(), "seed": ctx.obj["seed"],
                                              "bathymetry": bathy.to_dict() if bathy else None})
        write_manifest(out, manifest)
        write_table_csv(os.path.join(out, "compat.csv"),
                        ["epsilon", "max_difference", "max_r1", "max_r2"], report.table())
        write_json(os.path.join(out, "compat.json"), payload)
        finalize_manifest(out, manifest, outputs={"table": "compat.csv", "report": "compat.json"},
                          wall_time=time.perf_counter() - started)
    emit(ctx, payload, lines)
    if status in ("FAIL", "UNEXPECTED-PASS"):
        exit_threshold(f"{case_id.value} slope {report.slope:.3f}: {status}")


@cli.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--nx", type=int, default=None)
@click.option("--ny", type=int, default=None)
@click.option("--t", "t", type=float, default=0.0, show_default=True, help="Time at which to grid a family.")
@json_option
@click.pass_context
@handle_errors
def export(ctx, source, out, nx, ny, t):
    """Convert data between formats.

    SOURCE may be a Field2D binary (written as CSV with columns x,y,u), a
    trajectory directory (every snapshot to CSV) or a family.json (gridded
    into u.bin and u_t.bin for 'residual --field').
    """
    started = time.perf_counter()
    manifest = create_manifest("export", {"source": os.path.abspath(source), "t": t})
    write_manifest(out, manifest)
    outputs = {}
    if os.path.isdir(source):
        for index, snapshot in enumerate(load_snapshots(source)):
            name = f"snapshot_{index:05d}.csv"
            write_field_csv(os.path.join(out, name), snapshot)
            outputs[name] = name
    elif source.endswith(".json"):
        s = SolutionFamily.from_dict(read_json(source))
        grid = commensurate_grid(s, nx or ctx.obj["config"]["grid"]["nx"], ny or ctx.obj["config"]["grid"]["ny"])
        u, u_t = grid_solution(s, grid, t)
        write_field(os.path.join(out, "u.bin"), u)
        write_field(os.path.join(out, "u_t.bin"), u_t)
        outputs = {"u": "u.bin", "u_t": "u_t.bin"}
    elif source.endswith(".bin"):
        name = os.path.splitext(os.path.basename(source))[0] + ".csv"
        write_field_csv(os.path.join(out, name), read_field(source))
        outputs = {"csv": name}
    else:
        raise StorageError(f"Cannot tell how to export {source}; expected .bin, .json or a run directory")
    finalize_manifest(out, manifest, outputs=outputs, wall_time=time.perf_counter() - started)
    emit(ctx, {"outputs": outputs, "directory": out}, [f"written: {os.path.join(out, name)}"
                                                        for name in outputs.values()])


def main():
    cli(obj={})


if __name__ == "__main__":
    main()
