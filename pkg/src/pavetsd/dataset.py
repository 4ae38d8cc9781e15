"""Subgrade modulus sweep and the slope/deflection database files.

One database row is the full forward pipeline (profile, slope, reference
correction, sensor sampling) run on the fixed layer stack with one
subgrade modulus.  The default sweep covers 16..250 MPa in 1 MPa steps,
235 rows.  Files are CSV behind a short ``#``-prefixed manifest block so
a run is self-describing and byte reproducible.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DatabaseFormatError,
    NumericalError,
    PavetsdError,
    ValidationError,
)
from .hankel import DEFAULT_BUDGET
from .layers import ElasticLayer, PavementStructure
from .tsd import (
    GRAVITY,
    TsdConfiguration,
    apply_reference_correction,
    compute_profile,
    differentiate,
    sample_sensors,
)

__all__ = [
    "DEFAULT_MODULI_MPA",
    "DeflectionMatrix",
    "SlopeDatabase",
    "SweepSpec",
    "default_structure",
    "generate_database",
    "read_database",
    "sweep_modulus",
    "write_database",
    "write_deflection_matrix",
]

DEFAULT_MODULI_MPA = tuple(float(v) for v in range(16, 251))

_SLOPE_HEADER = "MR_MPa,Sn1,Sn2,Sn3,Sn4,Sn5,Sn6,Sn7,Sn8_raw"
_SENSOR_COUNT = 7


def default_structure(subgrade_mpa: float = 100.0) -> PavementStructure:
    """The stock four-layer stack: two bound course groups over subgrade.

    0.06 m at 7000 MPa, twice 0.09 m at 9300 MPa, then a semi-infinite
    subgrade; Poisson's ratio 0.35 throughout.
    """
    return PavementStructure(layers=(
        ElasticLayer(thickness=0.06, youngs_modulus=7000e6,
                     poissons_ratio=0.35),
        ElasticLayer(thickness=0.09, youngs_modulus=9300e6,
                     poissons_ratio=0.35),
        ElasticLayer(thickness=0.09, youngs_modulus=9300e6,
                     poissons_ratio=0.35),
        ElasticLayer(thickness=None, youngs_modulus=subgrade_mpa * 1e6,
                     poissons_ratio=0.35),
    ))


@dataclass(frozen=True)
class SweepSpec:
    """Which layer to sweep, over which modulus values (MPa).

    ``layer_index`` is a 0-based index into the layer stack; ``None``
    selects the last (semi-infinite) layer.  Values must be strictly
    increasing and positive.
    """

    base_structure: PavementStructure = field(default_factory=default_structure)
    layer_index: int | None = None
    moduli_mpa: tuple = DEFAULT_MODULI_MPA

    def __post_init__(self):
        n_layers = len(self.base_structure.layers)
        index = self.layer_index
        if index is None:
            index = n_layers - 1
        if not isinstance(index, int) or not (0 <= index < n_layers):
            raise ValidationError(
                f"swept layer index {self.layer_index!r} is outside the "
                f"{n_layers}-layer stack")
        values = tuple(float(v) for v in self.moduli_mpa)
        if not values:
            raise ValidationError("modulus sweep needs at least one value")
        arr = np.array(values)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValidationError("sweep moduli must be positive and finite")
        if np.any(np.diff(arr) <= 0.0):
            raise ValidationError("sweep moduli must be strictly increasing")
        object.__setattr__(self, "layer_index", index)
        object.__setattr__(self, "moduli_mpa", values)


def sweep_modulus(spec: SweepSpec) -> tuple[PavementStructure, ...]:
    """One structure per sweep value, differing only in the swept layer."""
    return tuple(
        spec.base_structure.with_layer_modulus(spec.layer_index, value * 1e6)
        for value in spec.moduli_mpa)


@dataclass(frozen=True, eq=False)
class SlopeDatabase:
    """Corrected sensor slopes (Sn1..Sn7) plus the raw reference slope.

    One row per swept modulus, strictly increasing, the units the files
    use: MPa for the modulus, micrometers per meter for the slopes.
    """

    moduli_mpa: np.ndarray
    sensor_slopes: np.ndarray
    raw_reference_slopes: np.ndarray
    manifest: dict

    def __post_init__(self):
        moduli = np.asarray(self.moduli_mpa, dtype=np.float64)
        slopes = np.asarray(self.sensor_slopes, dtype=np.float64)
        raw = np.asarray(self.raw_reference_slopes, dtype=np.float64)
        if moduli.ndim != 1 or moduli.size == 0:
            raise ValidationError("database needs at least one modulus row")
        if not np.all(np.isfinite(moduli)) or np.any(moduli <= 0.0):
            raise ValidationError("database moduli must be positive and finite")
        if np.any(np.diff(moduli) <= 0.0):
            raise ValidationError("modulus rows must be strictly increasing")
        if slopes.shape != (moduli.size, _SENSOR_COUNT):
            raise ValidationError(
                f"slope table must be {moduli.size} rows by "
                f"{_SENSOR_COUNT} sensor columns, got {slopes.shape}")
        if raw.shape != (moduli.size,):
            raise ValidationError(
                "raw reference column must have one value per modulus row")
        if not (np.all(np.isfinite(slopes)) and np.all(np.isfinite(raw))):
            raise ValidationError("database slope values must be finite")
        manifest = {str(k): str(v) for k, v in dict(self.manifest).items()}
        object.__setattr__(self, "moduli_mpa", moduli)
        object.__setattr__(self, "sensor_slopes", slopes)
        object.__setattr__(self, "raw_reference_slopes", raw)
        object.__setattr__(self, "manifest", manifest)
        for arr in (moduli, slopes, raw):
            arr.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, SlopeDatabase):
            return NotImplemented
        return (self.manifest == other.manifest
                and np.array_equal(self.moduli_mpa, other.moduli_mpa)
                and np.array_equal(self.sensor_slopes, other.sensor_slopes)
                and np.array_equal(self.raw_reference_slopes,
                                   other.raw_reference_slopes))

    @property
    def row_count(self) -> int:
        return int(self.moduli_mpa.size)


@dataclass(frozen=True, eq=False)
class DeflectionMatrix:
    """Deflection profiles side by side, one column per swept modulus."""

    offsets_m: np.ndarray
    moduli_mpa: np.ndarray
    deflections_um: np.ndarray
    manifest: dict

    def __post_init__(self):
        offsets = np.asarray(self.offsets_m, dtype=np.float64)
        moduli = np.asarray(self.moduli_mpa, dtype=np.float64)
        w = np.asarray(self.deflections_um, dtype=np.float64)
        if offsets.ndim != 1 or offsets.size < 2:
            raise ValidationError("matrix needs at least two offset rows")
        if np.any(np.diff(offsets) <= 0.0):
            raise ValidationError("matrix offsets must be strictly increasing")
        if moduli.ndim != 1 or moduli.size == 0:
            raise ValidationError("matrix needs at least one modulus column")
        if np.any(np.diff(moduli) <= 0.0):
            raise ValidationError("matrix columns must be strictly increasing")
        if w.shape != (offsets.size, moduli.size):
            raise ValidationError(
                f"deflection block must be {offsets.size} by {moduli.size}, "
                f"got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValidationError("deflection columns must be strictly positive")
        manifest = {str(k): str(v) for k, v in dict(self.manifest).items()}
        object.__setattr__(self, "offsets_m", offsets)
        object.__setattr__(self, "moduli_mpa", moduli)
        object.__setattr__(self, "deflections_um", w)
        object.__setattr__(self, "manifest", manifest)
        for arr in (offsets, moduli, w):
            arr.setflags(write=False)


def _pipeline_row(structure, tsd, tol, max_evaluations):
    """Full forward pipeline for one structure; picklable for worker pools."""
    profile = compute_profile(structure, tsd, tol=tol,
                              max_evaluations=max_evaluations)
    corrected = apply_reference_correction(differentiate(profile),
                                           tsd.reference_offset)
    reading = sample_sensors(corrected, tsd)
    return (profile.deflections_um, np.array(reading.slopes),
            reading.raw_reference_slope)


def _collect_rows(spec, structures, tsd, tol, max_evaluations, workers):
    if workers <= 1 or len(structures) <= 1:
        rows = []
        for value, structure in zip(spec.moduli_mpa, structures):
            try:
                rows.append(_pipeline_row(structure, tsd, tol, max_evaluations))
            except PavetsdError as exc:
                raise NumericalError(
                    f"sweep failed at modulus {value:g} MPa: {exc}") from exc
        return rows
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_pipeline_row, s, tsd, tol, max_evaluations)
                   for s in structures]
        rows = []
        for value, future in zip(spec.moduli_mpa, futures):
            try:
                rows.append(future.result())
            except PavetsdError as exc:
                raise NumericalError(
                    f"sweep failed at modulus {value:g} MPa: {exc}") from exc
        return rows


def _nonmonotone_columns(slopes: np.ndarray) -> list:
    """Names of sensor columns that are not strictly monotone down the sweep.

    The corrected near sensors genuinely reverse direction at the soft end
    of the default sweep: the reference slope subtracted from every column
    grows quickly as the subgrade softens, while the slopes close to the
    load barely move, so the difference folds.  The far columns stay
    monotone, which is what the joint-residual solver actually uses.
    """
    if slopes.shape[0] < 2:
        return []
    names = []
    for j in range(slopes.shape[1]):
        steps = np.diff(slopes[:, j])
        if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
            names.append(f"Sn{j + 1}")
    return names


def _build_manifest(tsd: TsdConfiguration, tol: float) -> dict:
    return {
        "tool": f"pavetsd {__version__}",
        "config_hash": tsd.config_hash(),
        "quadrature_tol": repr(float(tol)),
        "contact_mode": tsd.contact_mode,
        "g": repr(GRAVITY),
    }


def generate_database(spec: SweepSpec, tsd: TsdConfiguration, *,
                      tol: float = 1e-8, workers: int = 1,
                      max_evaluations: int = DEFAULT_BUDGET):
    """Run the forward pipeline over the sweep.

    Returns ``(SlopeDatabase, DeflectionMatrix)`` assembled in modulus
    order.  Rows may be computed by a worker pool (``workers > 1``); the
    result is identical either way.  Any per-structure failure aborts
    with the offending modulus named.  Sensor columns that fold over the
    sweep are reported with a warning rather than an error: generation
    still completes, and backcalculation stays well posed because it
    minimizes over all sensors jointly instead of bracketing on one.
    """
    if len(tsd.sensor_offsets) != _SENSOR_COUNT:
        raise ValidationError(
            f"the slope database schema carries exactly {_SENSOR_COUNT} "
            f"sensor columns, the configuration has {len(tsd.sensor_offsets)}")
    structures = sweep_modulus(spec)
    rows = _collect_rows(spec, structures, tsd, tol, max_evaluations,
                         int(workers))
    slopes = np.vstack([r[1] for r in rows])
    folded = _nonmonotone_columns(slopes)
    if folded:
        warnings.warn(
            "sensor columns not strictly monotone in the swept modulus: "
            f"{', '.join(folded)}; single-column nearest-row lookups there "
            "can be ambiguous", stacklevel=2)
    manifest = _build_manifest(tsd, tol)
    moduli = np.array(spec.moduli_mpa)
    database = SlopeDatabase(
        moduli_mpa=moduli, sensor_slopes=slopes,
        raw_reference_slopes=np.array([r[2] for r in rows]),
        manifest=manifest)
    matrix = DeflectionMatrix(
        offsets_m=tsd.offsets(), moduli_mpa=moduli,
        deflections_um=np.column_stack([r[0] for r in rows]),
        manifest=manifest)
    return database, matrix


def _fmt(value) -> str:
    # shortest decimal that round-trips the exact float64
    return repr(float(value))


def _column_label(value: float) -> str:
    if float(value).is_integer():
        return f"E{int(value):03d}"
    return "E" + repr(float(value))


def write_database(database: SlopeDatabase, path) -> None:
    """Write the slope database as manifest lines, a header row, then rows."""
    lines = [f"# {k}={v}" for k, v in database.manifest.items()]
    lines.append(_SLOPE_HEADER)
    for i in range(database.row_count):
        fields = [_fmt(database.moduli_mpa[i])]
        fields.extend(_fmt(v) for v in database.sensor_slopes[i])
        fields.append(_fmt(database.raw_reference_slopes[i]))
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii",
                          newline="\n")


def write_deflection_matrix(matrix: DeflectionMatrix, path) -> None:
    """Write the deflection matrix; column labels carry the modulus in MPa."""
    lines = [f"# {k}={v}" for k, v in matrix.manifest.items()]
    labels = ",".join(_column_label(v) for v in matrix.moduli_mpa)
    lines.append("x_m," + labels)
    for i in range(matrix.offsets_m.size):
        fields = [_fmt(matrix.offsets_m[i])]
        fields.extend(_fmt(v) for v in matrix.deflections_um[i])
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii",
                          newline="\n")


def read_database(path) -> SlopeDatabase:
    """Parse a slope database file, enforcing schema and row ordering."""
    text = Path(path).read_text(encoding="ascii")
    manifest = {}
    header = None
    data = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            if header is not None:
                raise DatabaseFormatError(
                    f"line {lineno}: manifest line after the header row")
            key, sep, value = line[1:].strip().partition("=")
            if not sep or not key.strip():
                raise DatabaseFormatError(
                    f"line {lineno}: manifest lines must be '# key=value'")
            manifest[key.strip()] = value
        elif header is None:
            header = (lineno, line)
        else:
            data.append((lineno, line))
    if header is None:
        raise DatabaseFormatError("no header row found")
    expected = _SLOPE_HEADER.split(",")
    got = header[1].split(",")
    if got != expected:
        missing = [c for c in expected if c not in got]
        extra = [c for c in got if c not in expected]
        if missing:
            raise DatabaseFormatError(
                f"header is missing column(s): {', '.join(missing)}")
        if extra:
            raise DatabaseFormatError(
                f"header has unexpected column(s): {', '.join(extra)}")
        raise DatabaseFormatError("header columns are out of order")
    if not data:
        raise DatabaseFormatError("database has no data rows")
    values = []
    for lineno, line in data:
        fields = line.split(",")
        if len(fields) != len(expected):
            raise DatabaseFormatError(
                f"line {lineno}: expected {len(expected)} fields, "
                f"got {len(fields)}")
        try:
            values.append([float(f) for f in fields])
        except ValueError as exc:
            raise DatabaseFormatError(
                f"line {lineno}: non-numeric value ({exc})") from exc
    table = np.array(values)
    try:
        return SlopeDatabase(moduli_mpa=table[:, 0],
                             sensor_slopes=table[:, 1:8],
                             raw_reference_slopes=table[:, 8],
                             manifest=manifest)
    except ValidationError as exc:
        raise DatabaseFormatError(str(exc)) from exc
