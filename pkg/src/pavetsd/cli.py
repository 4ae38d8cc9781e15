"""Command line interface: respond, generate, invert, validate.

Exit codes are part of the contract: 0 on success, 1 when the validation
suite finds a failing check, 2 for configuration or input errors, 3 for
numerical failures inside the response engine.
"""

import argparse
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import (RunConfig, expand_sweep_range, load_config,
                     render_default_config)
from .dataset import (SweepSpec, generate_database, read_database,
                      write_database, write_deflection_matrix)
from .deflection import surface_deflection
from .errors import (ConfigError, DatabaseFormatError, NumericalError,
                     ValidationError)
from .inverse import (InverseProblem, backcalculate, backcalculate_lookup,
                      read_readings, write_results)
from .kernel import kernel_values
from .layers import CircularLoad, PavementStructure
from .svgplot import ChartSeries, line_chart, write_chart
from .tsd import apply_reference_correction, compute_profile, differentiate

__all__ = ["main", "validate_suite"]

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NUMERICAL = 3

DEFLECTION_CSV = "deflection_profile.csv"
SLOPE_CSV = "slope_profile.csv"
DATABASE_CSV = "slope_database.csv"
MATRIX_CSV = "deflection_matrix.csv"
RESULTS_CSV = "backcalc_results.csv"


# ---------------------------------------------------------------------------
# validation suite

@dataclass(frozen=True)
class OracleCheck:
    """Outcome of one analytic check: its worst relative error and limit."""

    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.tolerance


def _kernel_callable(structure, kernel_fn):
    def evaluate(m):
        return kernel_fn(structure, np.ravel(m)).reshape(np.shape(m))
    return evaluate


def _stock_scene():
    """Fixed four-layer stack and rear-wheel contact the checks run on."""
    structure = load_config(None).structure
    force = 2.875 * 1000.0 * 9.81
    pressure = 0.92e6
    disc = CircularLoad(pressure=pressure,
                        radius=math.sqrt(force / (math.pi * pressure)))
    return structure, disc


def _check_boussinesq(config, kernel_fn) -> OracleCheck:
    """Random half-spaces against the closed-form center and edge values."""
    rng = np.random.default_rng(20240311)
    worst = 0.0
    for _ in range(20):
        modulus = 10.0 ** rng.uniform(7.3, 9.7)
        nu = rng.uniform(0.2, 0.45)
        radius = rng.uniform(0.08, 0.2)
        pressure = rng.uniform(0.4e6, 1.2e6)
        structure = PavementStructure.half_space(modulus, nu)
        kernel = _kernel_callable(structure, kernel_fn)
        disc = CircularLoad(pressure=pressure, radius=radius)
        scale = 2.0 * (1.0 - nu * nu) * pressure * radius / modulus
        for r, exact in ((0.0, scale), (radius, scale * 2.0 / math.pi)):
            value = surface_deflection(structure, disc, r,
                                       tol=config.quadrature_tol,
                                       kernel=kernel,
                                       max_evaluations=config.max_evaluations)
            worst = max(worst, abs(value - exact) / abs(exact))
    return OracleCheck("boussinesq-closed-form", worst, 1e-6)


def _check_kernel_plateaus(config, kernel_fn) -> OracleCheck:
    """Kernel limits against the bounding half-space responses.

    At high wavenumber the surface only feels the top layer; at low
    wavenumber only the subgrade. The low probe sits at 1e-9 where the
    linear-in-m approach to the plateau has fully decayed even for the
    softest subgrade.
    """
    structure, _ = _stock_scene()
    worst = 0.0
    for subgrade_mpa in (16.0, 100.0, 250.0):
        probe = structure.with_layer_modulus(len(structure.layers) - 1,
                                             subgrade_mpa * 1e6)
        top = probe.layers[0]
        bottom = probe.layers[-1]
        for m, layer in ((1e4, top), (1e-9, bottom)):
            expected = (2.0 * (1.0 - layer.poissons_ratio ** 2)
                        / layer.youngs_modulus)
            value = float(kernel_fn(probe, np.array([m]))[0])
            worst = max(worst, abs(value - expected) / expected)
    return OracleCheck("kernel-plateau-limits", worst, 1e-6)


def _check_layer_merge(config) -> OracleCheck:
    """Splitting one layer into two identical halves changes nothing."""
    structure, disc = _stock_scene()
    layers = structure.layers
    merged = PavementStructure((
        layers[0],
        replace(layers[1], thickness=layers[1].thickness + layers[2].thickness),
        layers[3]))
    worst = 0.0
    for r in (0.0, 0.3, 1.0, 3.8):
        split_w = surface_deflection(structure, disc, r,
                                     tol=config.quadrature_tol,
                                     max_evaluations=config.max_evaluations)
        merged_w = surface_deflection(merged, disc, r,
                                      tol=config.quadrature_tol,
                                      max_evaluations=config.max_evaluations)
        worst = max(worst, abs(split_w - merged_w) / abs(split_w))
    return OracleCheck("layer-merge-equivalence", worst, 1e-9)


def _check_homogeneity(config) -> OracleCheck:
    """Scaling every modulus by k scales every deflection by 1/k."""
    structure, disc = _stock_scene()
    factor = 2.5
    scaled = PavementStructure(tuple(
        replace(layer, youngs_modulus=layer.youngs_modulus * factor)
        for layer in structure.layers))
    worst = 0.0
    for r in (0.0, 0.3, 1.0):
        base = surface_deflection(structure, disc, r,
                                  tol=config.quadrature_tol,
                                  max_evaluations=config.max_evaluations)
        scaled_w = surface_deflection(scaled, disc, r,
                                      tol=config.quadrature_tol,
                                      max_evaluations=config.max_evaluations)
        worst = max(worst, abs(scaled_w - base / factor) / abs(base / factor))
    return OracleCheck("load-homogeneity", worst, 1e-10)


def validate_suite(config: RunConfig, kernel_fn=None):
    """Run the analytic checks at the configured numerics.

    The scenes are fixed; only the quadrature tolerance and budget come
    from the configuration. ``kernel_fn`` swaps the surface-kernel
    evaluator and exists so tests can prove that a corrupted kernel makes
    the suite fail.
    """
    if kernel_fn is None:
        kernel_fn = kernel_values
    return (_check_boussinesq(config, kernel_fn),
            _check_kernel_plateaus(config, kernel_fn),
            _check_layer_merge(config),
            _check_homogeneity(config))


def cmd_validate(config: RunConfig) -> int:
    checks = validate_suite(config)
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name:<24} max rel err {check.measured:.3e}  "
              f"(tol {check.tolerance:g})")
    failed = sum(1 for check in checks if not check.passed)
    if failed:
        print(f"{failed} of {len(checks)} checks failed")
        return EXIT_CHECKS_FAILED
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# respond

def _manifest_lines(config, extra=()):
    pairs = (("tool", f"pavetsd {__version__}"),
             ("config_hash", config.tsd.config_hash()),
             ("quadrature_tol", repr(config.quadrature_tol)),
             ("contact_mode", config.tsd.contact_mode),
             *extra)
    return [f"# {key}={value}" for key, value in pairs]


def _write_profile_csv(path, manifest, header, x, values) -> None:
    lines = [*manifest, header]
    lines.extend(f"{float(a)!r},{float(b)!r}" for a, b in zip(x, values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii",
                          newline="\n")


def _ensure_output_dir(config: RunConfig) -> Path:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_respond(config: RunConfig, modulus_mpa: float, svg: bool) -> int:
    if not (math.isfinite(modulus_mpa) and modulus_mpa > 0.0):
        raise ConfigError(
            f"the modulus must be positive and finite, got {modulus_mpa:g} MPa")
    structure = config.structure.with_layer_modulus(
        config.sweep.layer_index, modulus_mpa * 1e6)
    profile = compute_profile(structure, config.tsd,
                              tol=config.quadrature_tol,
                              max_evaluations=config.max_evaluations)
    slope = apply_reference_correction(differentiate(profile),
                                       config.tsd.reference_offset)
    out = _ensure_output_dir(config)
    manifest = _manifest_lines(config, (
        ("structure", structure.fingerprint()),
        ("modulus_mpa", repr(float(modulus_mpa)))))
    x = profile.offsets
    deflection_path = out / DEFLECTION_CSV
    slope_path = out / SLOPE_CSV
    _write_profile_csv(deflection_path, manifest, "x_m,deflection_um",
                       x, profile.deflections_um)
    _write_profile_csv(slope_path, manifest, "x_m,slope_um_per_m",
                       x, slope.slopes_um_per_m)
    written = [deflection_path, slope_path]
    if svg:
        xs = tuple(float(v) for v in x)
        deflection_chart = line_chart(
            [ChartSeries("deflection", xs,
                         tuple(float(v) for v in profile.deflections_um))],
            title=f"Surface deflection, swept layer at {modulus_mpa:g} MPa",
            x_label="offset along travel direction (m)",
            y_label="deflection (µm)")
        slope_chart = line_chart(
            [ChartSeries("corrected slope", xs,
                         tuple(float(v) for v in slope.slopes_um_per_m))],
            title=f"Deflection slope, swept layer at {modulus_mpa:g} MPa",
            x_label="offset along travel direction (m)",
            y_label="deflection slope (µm/m)")
        for path, chart in ((out / "deflection_profile.svg", deflection_chart),
                            (out / "slope_profile.svg", slope_chart)):
            write_chart(path, chart)
            written.append(path)
    print(f"wrote {len(x)} samples to " + ", ".join(str(p) for p in written))
    return EXIT_OK


# ---------------------------------------------------------------------------
# generate

def cmd_generate(config: RunConfig) -> int:
    out = _ensure_output_dir(config)
    started = time.perf_counter()
    database, matrix = generate_database(
        config.sweep, config.tsd, tol=config.quadrature_tol,
        workers=config.resolved_threads(),
        max_evaluations=config.max_evaluations)
    elapsed = time.perf_counter() - started
    write_database(database, out / DATABASE_CSV)
    write_deflection_matrix(matrix, out / MATRIX_CSV)
    print(f"generated {database.row_count} rows in {elapsed:.1f} s -> "
          f"{out / DATABASE_CSV}, {out / MATRIX_CSV}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# invert

def cmd_invert(config: RunConfig, readings_path, method: str) -> int:
    readings_path = Path(readings_path)
    if not readings_path.is_file():
        raise ConfigError(f"readings file not found: {readings_path}")
    pairs = read_readings(readings_path)
    if not pairs:
        raise ConfigError(f"readings file {readings_path} has no data rows")
    out = _ensure_output_dir(config)
    results = []
    if method == "lookup":
        database_path = config.output_dir / DATABASE_CSV
        if not database_path.is_file():
            raise ConfigError(
                f"no slope database at {database_path}; run the generate "
                "command first or point --out at the directory that holds it")
        database = read_database(database_path)
        for reading_id, slopes in pairs:
            results.append((reading_id, backcalculate_lookup(slopes, database)))
    else:
        for reading_id, slopes in pairs:
            problem = InverseProblem(observed=slopes,
                                     base_structure=config.structure,
                                     tsd=config.tsd)
            results.append((reading_id, backcalculate(
                problem, tol=config.quadrature_tol,
                max_evaluations=config.max_evaluations)))
    results_path = out / RESULTS_CSV
    write_results(results_path, results)
    print(f"backcalculated {len(results)} readings ({method}) -> {results_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling

def _parse_sweep_flag(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--sweep expects LO:HI:STEP, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--sweep expects numbers, got {text!r}") from exc
    return expand_sweep_range(lo, hi, step)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pavetsd",
        description="Layered pavement response, deflection-slope database "
                    "generation, and subgrade modulus backcalculation.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--print-default-config", action="store_true",
                        help="print the built-in JSON configuration and exit")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON run configuration (omitted sections keep "
                             "their defaults)")
    common.add_argument("--out", metavar="DIR", default=".",
                        help="output directory, created on demand")
    common.add_argument("--threads", type=int, metavar="N",
                        help="sweep worker processes; 0 means one per CPU")
    common.add_argument("--contact", choices=("pressure", "radius"),
                        help="override the wheel contact model")

    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("respond", parents=[common],
                       help="write deflection and slope profiles for one "
                            "structure")
    p.add_argument("--modulus", type=float, required=True, metavar="E",
                   help="modulus in MPa applied to the swept layer")
    p.add_argument("--svg", action="store_true",
                   help="also write SVG charts next to the CSV files")

    p = sub.add_parser("generate", parents=[common],
                       help="run the modulus sweep and write the database "
                            "files")
    p.add_argument("--sweep", metavar="LO:HI:STEP",
                   help="override the modulus ladder, inclusive, in MPa")

    p = sub.add_parser("invert", parents=[common],
                       help="backcalculate the swept modulus for each row of "
                            "a readings file")
    p.add_argument("readings", metavar="READINGS_CSV",
                   help="observations with header id,Sn1,...,Sn7")
    p.add_argument("--method", choices=("brent", "lookup"), default="brent",
                   help="estimator; lookup reads slope_database.csv from the "
                        "output directory")

    sub.add_parser("validate", parents=[common],
                   help="run the analytic validation suite")
    return parser


def _config_for(args) -> RunConfig:
    config = load_config(args.config)
    updates = {"output_dir": Path(args.out)}
    if args.threads is not None:
        updates["threads"] = args.threads
    if args.contact is not None and args.contact != config.tsd.contact_mode:
        updates["tsd"] = replace(config.tsd, contact_mode=args.contact)
    if getattr(args, "sweep", None):
        updates["sweep"] = SweepSpec(
            base_structure=config.structure,
            layer_index=config.sweep.layer_index,
            moduli_mpa=_parse_sweep_flag(args.sweep))
    return replace(config, **updates)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        sys.stdout.write(render_default_config())
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("error: a command is required", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        config = _config_for(args)
        if args.command == "respond":
            return cmd_respond(config, args.modulus, args.svg)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "invert":
            return cmd_invert(config, args.readings, args.method)
        return cmd_validate(config)
    except (ValidationError, DatabaseFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
