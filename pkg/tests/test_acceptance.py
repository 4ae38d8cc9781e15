"""Acceptance checklist: ten end-to-end checks, one verdict line each.

Every test measures its target quantity, records a PASS/FAIL line with
the measured value and the pinned tolerance (the scoreboard is printed
after the run summary, see conftest.py), then asserts. Tolerances are
stated in the lines themselves so a failure is diagnosable from the
scoreboard alone.

Check 2 is expected to fail for the two softest subgrades and is marked
strict-xfail: the surface kernel approaches its long-wavelength plateau
linearly in the wavenumber, and at the 1e-6 1/m probe the true relative
deviation for the 16 and 100 MPa subgrades still exceeds the 1e-6
tolerance (the exact deviations are frozen as a regression band in
test_kernel.py). The check asserts the stated tolerance anyway so the
scoreboard reports the honest FAIL, and strict mode turns an unexpected
pass into an error instead of quietly masking a changed kernel.
"""

import math
import time
import warnings
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from pavetsd import (
    GRAVITY,
    CircularLoad,
    DeflectionProfile,
    ElasticLayer,
    InverseProblem,
    PavementStructure,
    SweepSpec,
    TsdConfiguration,
    apply_reference_correction,
    backcalculate,
    backcalculate_lookup,
    compute_profile,
    default_structure,
    differentiate,
    generate_database,
    simulate_sensor_reading,
    surface_deflection,
    surface_response_kernel,
    write_database,
    write_deflection_matrix,
)


def record(log, number, name, ok, detail):
    """Append one scoreboard line and echo it; returns the verdict."""
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:02d}  {name}: {detail}"
    log.append(line)
    print(line)
    return ok


@pytest.fixture(scope="session")
def dataset_build(tmp_path_factory):
    """One timed default sweep, shared by checks 5 through 9.

    Builds the full 235-structure database and deflection matrix once,
    writes both files, and keeps the wall time for the budget check.
    """
    t0 = time.perf_counter()
    database, matrix = generate_database(SweepSpec(), TsdConfiguration(),
                                         tol=1e-8, workers=1)
    elapsed = time.perf_counter() - t0
    out = tmp_path_factory.mktemp("acceptance-dataset")
    db_path = out / "slope_database.csv"
    matrix_path = out / "deflection_matrix.csv"
    write_database(database, db_path)
    write_deflection_matrix(matrix, matrix_path)
    return SimpleNamespace(database=database, matrix=matrix, elapsed=elapsed,
                           db_path=db_path, matrix_path=matrix_path)


def test_criterion_01_boussinesq_closed_form(acceptance_log):
    rng = np.random.default_rng(1017)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(20):
        e = 10.0 ** rng.uniform(7.3, 9.7)
        nu = rng.uniform(0.2, 0.45)
        a = rng.uniform(0.08, 0.2)
        p = rng.uniform(0.4e6, 1.2e6)
        half_space = PavementStructure((
            ElasticLayer(thickness=None, youngs_modulus=e, poissons_ratio=nu),))
        load = CircularLoad(pressure=p, radius=a)
        w = surface_deflection(half_space, load, 0.0, tol=1e-8)
        expected = 2.0 * p * a * (1.0 - nu * nu) / e
        worst = max(worst, abs(w / expected - 1.0))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 1.0
    assert record(acceptance_log, 1, "boussinesq-closed-form", ok,
                  f"20 random half-space draws at r=0, worst rel err "
                  f"{worst:.3e} (tol 1e-06), {elapsed:.2f} s (budget 1 s)")


@pytest.mark.xfail(strict=True, reason=(
    "the kernel approaches the subgrade plateau linearly in m, so at the "
    "1e-6 1/m probe the 16 and 100 MPa subgrades still deviate by more "
    "than 1e-6 relative (physics, frozen in test_kernel.py); asserted at "
    "the stated tolerance anyway so the scoreboard stays honest"))
def test_criterion_02_kernel_asymptotic_limits(acceptance_log):
    probes = []
    ok = True
    for mpa in (16.0, 100.0, 250.0):
        structure = default_structure(mpa)
        top, sub = structure.layers[0], structure.layers[-1]
        dev_hi = abs(surface_response_kernel(structure, 1e4)
                     / (2.0 * (1.0 - top.poissons_ratio ** 2)
                        / top.youngs_modulus) - 1.0)
        dev_lo = abs(surface_response_kernel(structure, 1e-6)
                     / (2.0 * (1.0 - sub.poissons_ratio ** 2)
                        / sub.youngs_modulus) - 1.0)
        probes.append(f"E={mpa:g}: m=1e4 {dev_hi:.1e}, m=1e-6 {dev_lo:.1e}")
        ok = ok and dev_hi <= 1e-6 and dev_lo <= 1e-6
    assert record(acceptance_log, 2, "kernel-asymptotic-limits", ok,
                  "plateau rel dev (tol 1e-06 each): " + "; ".join(probes))


def test_criterion_03_layer_merge_equivalence(acceptance_log):
    base = default_structure(100.0)
    merged = PavementStructure((
        base.layers[0],
        ElasticLayer(thickness=0.18, youngs_modulus=9300e6,
                     poissons_ratio=0.35),
        base.layers[3],
    ))
    load = CircularLoad(
        pressure=0.92e6,
        radius=math.sqrt(2.875e3 * GRAVITY / (math.pi * 0.92e6)))
    worst = 0.0
    for r in (0.0, 0.3, 1.0, 3.8):
        w4 = surface_deflection(base, load, r, tol=1e-10)
        w3 = surface_deflection(merged, load, r, tol=1e-10)
        worst = max(worst, abs(w3 / w4 - 1.0))
    ok = worst <= 1e-9
    assert record(acceptance_log, 3, "layer-merge-equivalence", ok,
                  f"identical middle layers merged to one 0.18 m layer, "
                  f"worst rel diff {worst:.3e} at r in {{0, 0.3, 1.0, 3.8}} "
                  f"(tol 1e-09)")


def test_criterion_04_linearity(acceptance_log):
    structure = default_structure(100.0)
    fixed_contact = replace(TsdConfiguration(), contact_mode="radius")
    w_base = compute_profile(structure, fixed_contact).deflections_um
    w_doubled = compute_profile(
        structure, fixed_contact.with_scaled_loads(2.0)).deflections_um
    load_dev = float(np.max(np.abs(w_doubled / (2.0 * w_base) - 1.0)))

    k = 2.5
    stiffened = PavementStructure(tuple(
        replace(layer, youngs_modulus=layer.youngs_modulus * k)
        for layer in structure.layers))
    tsd = TsdConfiguration()
    w = compute_profile(structure, tsd).deflections_um
    w_stiff = compute_profile(stiffened, tsd).deflections_um
    moduli_dev = float(np.max(np.abs(w_stiff * k / w - 1.0)))

    ok = load_dev <= 1e-10 and moduli_dev <= 1e-10
    assert record(acceptance_log, 4, "linearity", ok,
                  f"all loads x2 (fixed contact radius) dev {load_dev:.2e}, "
                  f"all moduli x{k:g} dev {moduli_dev:.2e} over 401-sample "
                  f"profiles (tol 1e-10 each)")


def test_criterion_05_dataset_regeneration(acceptance_log, dataset_build):
    database, matrix = dataset_build.database, dataset_build.matrix
    moduli_ok = (database.row_count == 235
                 and database.moduli_mpa[0] == 16.0
                 and database.moduli_mpa[-1] == 250.0
                 and bool(np.all(np.diff(database.moduli_mpa) == 1.0)))
    offsets = matrix.offsets_m
    grid_ok = (offsets.size == 401 and offsets[0] == 0.0
               and abs(offsets[-1] - 4.0) < 1e-12
               and bool(np.allclose(np.diff(offsets), 0.01,
                                    rtol=0.0, atol=1e-12)))
    block_ok = matrix.deflections_um.shape == (401, 235)
    lines = dataset_build.matrix_path.read_text(encoding="ascii").splitlines()
    table = [line for line in lines if line and not line.startswith("#")]
    fields = table[0].count(",") + 1
    file_ok = (len(table) == 402
               and all(line.count(",") + 1 == fields for line in table))
    ok = (moduli_ok and grid_ok and block_ok and file_ok
          and dataset_build.elapsed < 120.0)
    assert record(acceptance_log, 5, "dataset-regeneration", ok,
                  f"database {database.row_count} rows (16..250 MPa, 1 MPa "
                  f"steps); matrix 401 offsets (0..4 m, 1 cm) x "
                  f"{matrix.deflections_um.shape[1]} modulus columns, csv "
                  f"{len(table)} table lines x {fields} fields; "
                  f"{dataset_build.elapsed:.1f} s (budget 120 s)")


def test_criterion_06_reference_correction(acceptance_log, dataset_build):
    database, matrix = dataset_build.database, dataset_build.matrix
    reference = TsdConfiguration().reference_offset
    k = int(np.argmin(np.abs(matrix.offsets_m - reference)))
    exact_zero = True
    raw_matches = True
    for j in range(matrix.moduli_mpa.size):
        profile = DeflectionProfile(
            offsets=matrix.offsets_m,
            deflections_um=matrix.deflections_um[:, j],
            structure_id=f"sweep-{matrix.moduli_mpa[j]:g}",
            config_hash=matrix.manifest["config_hash"])
        corrected = apply_reference_correction(differentiate(profile),
                                               reference)
        exact_zero = exact_zero and corrected.slopes_um_per_m[k] == 0.0
        raw_matches = raw_matches and (corrected.reference_value
                                       == database.raw_reference_slopes[j])
    soft = abs(float(database.raw_reference_slopes[0]))
    stiff = abs(float(database.raw_reference_slopes[-1]))
    ok = exact_zero and raw_matches and soft > stiff
    assert record(acceptance_log, 6, "reference-correction", ok,
                  f"corrected slope at x={reference:g} m exactly 0.0 for all "
                  f"{matrix.moduli_mpa.size} rows: {exact_zero}; stored raw "
                  f"reference slopes match bitwise: {raw_matches}; |raw| "
                  f"{soft:.3f} (16 MPa) > {stiff:.3f} (250 MPa) um/m")


def test_criterion_07_monotone_sensor_columns(acceptance_log, dataset_build):
    slopes = dataset_build.database.sensor_slopes
    diffs = np.diff(slopes, axis=0)
    strict = [bool(np.all(col > 0.0) or np.all(col < 0.0)) for col in diffs.T]
    ok = all(strict)
    margin = float(np.min(np.abs(diffs)))
    assert record(acceptance_log, 7, "monotone-sensor-columns", ok,
                  f"Sn1..Sn7 strictly monotone in modulus across "
                  f"{slopes.shape[0]} rows: {sum(strict)}/7 columns, "
                  f"smallest row-to-row step {margin:.2e} um/m")


def test_criterion_08_inverse_round_trip(acceptance_log, dataset_build):
    truths = (16.0, 50.0, 100.0, 175.0, 250.0)
    tsd = TsdConfiguration()
    readings = [simulate_sensor_reading(default_structure(e), tsd)
                for e in truths]
    t0 = time.perf_counter()
    solutions = [backcalculate(InverseProblem(observed=r.slopes))
                 for r in readings]
    elapsed = time.perf_counter() - t0
    worst_rt = max(abs(s.modulus_mpa - e) for s, e in zip(solutions, truths))
    with warnings.catch_warnings():
        # exact end-row hits trip the envelope warning; harmless here
        warnings.simplefilter("ignore")
        lookups = [backcalculate_lookup(r, dataset_build.database)
                   for r in readings]
    worst_gap = max(abs(l.modulus_mpa - s.modulus_mpa)
                    for l, s in zip(lookups, solutions))
    ok = worst_rt <= 0.01 and worst_gap <= 0.5 and elapsed < 30.0
    assert record(acceptance_log, 8, "inverse-round-trip", ok,
                  f"truths {{16, 50, 100, 175, 250}} MPa: worst round-trip "
                  f"err {worst_rt:.2e} MPa (tol 0.01), worst "
                  f"bracketed-vs-lookup gap {worst_gap:.2e} MPa (tol 0.5), "
                  f"5 solves in {elapsed:.1f} s (budget 30 s)")


def test_criterion_09_byte_determinism(acceptance_log, dataset_build,
                                       tmp_path):
    database, matrix = generate_database(SweepSpec(), TsdConfiguration(),
                                         tol=1e-8, workers=1)
    db_path = tmp_path / "slope_database.csv"
    matrix_path = tmp_path / "deflection_matrix.csv"
    write_database(database, db_path)
    write_deflection_matrix(matrix, matrix_path)
    same_db = db_path.read_bytes() == dataset_build.db_path.read_bytes()
    same_matrix = (matrix_path.read_bytes()
                   == dataset_build.matrix_path.read_bytes())
    ok = same_db and same_matrix
    assert record(acceptance_log, 9, "byte-determinism", ok,
                  f"second full default run: slope database byte-identical: "
                  f"{same_db} ({db_path.stat().st_size} bytes); deflection "
                  f"matrix byte-identical: {same_matrix} "
                  f"({matrix_path.stat().st_size} bytes)")


def test_criterion_10_differentiation_accuracy(acceptance_log):
    x = TsdConfiguration().offsets()
    profile = DeflectionProfile(offsets=x, deflections_um=np.exp(-x),
                                structure_id="analytic-exp",
                                config_hash="0" * 12)
    slopes = differentiate(profile).slopes_um_per_m
    exact = -np.exp(-x)
    worst = float(np.max(np.abs(slopes[1:-1] / exact[1:-1] - 1.0)))
    ok = worst < 2e-5
    assert record(acceptance_log, 10, "differentiation-accuracy", ok,
                  f"w(x)=exp(-x) on the 1 cm grid, worst interior slope rel "
                  f"err {worst:.3e} (tol 2e-05, second-order stencil bound "
                  f"h^2/6 = {0.01 ** 2 / 6:.3e})")
