"""Backcalculation of the subgrade modulus from corrected sensor slopes.

The forward model is the restricted-row sensor simulation (bitwise equal
to the full pipeline); the objective is weighted least squares over the
seven sensors.  Two estimators: a bracketed scalar minimization on the
modulus bounds, and a database lookup refined by a local quadratic fit.
Forward evaluations are memoized module-wide since every solver path
revisits the same scan moduli.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .dataset import SlopeDatabase, default_structure
from .errors import DatabaseFormatError, ValidationError
from .hankel import DEFAULT_BUDGET
from .layers import PavementStructure
from .optimize import minimize_bounded
from .tsd import SensorReading, TsdConfiguration, simulate_sensor_reading

__all__ = [
    "InverseProblem",
    "InverseSolution",
    "SensitivityReport",
    "backcalculate",
    "backcalculate_lookup",
    "read_readings",
    "residual",
    "sensitivity_report",
    "write_results",
]

_METHOD_TAGS = ("bracketed-minimization", "lookup", "grid-scan")
_SCAN_POINTS = 9
_BOUND_SNAP_MPA = 0.01

_READINGS_HEADER = "id,Sn1,Sn2,Sn3,Sn4,Sn5,Sn6,Sn7"
_RESULTS_HEADER = "id,MR_MPa,residual,method,at_bound"


@dataclass(frozen=True)
class InverseProblem:
    """Observed corrected slopes plus everything the forward model needs.

    ``observed`` pairs with the configuration's sensor offsets, in
    micrometers per meter.  ``weights`` are the per-sensor least-squares
    weights; the default treats all sensors equally.
    """

    observed: tuple
    base_structure: PavementStructure = field(default_factory=default_structure)
    tsd: TsdConfiguration = field(default_factory=TsdConfiguration)
    bounds_mpa: tuple = (16.0, 250.0)
    weights: tuple = None

    def __post_init__(self):
        observed = tuple(float(v) for v in self.observed)
        n_sensors = len(self.tsd.sensor_offsets)
        if len(observed) != n_sensors:
            raise ValidationError(
                f"observed reading has {len(observed)} values, the "
                f"configuration defines {n_sensors} sensors")
        if not all(np.isfinite(observed)):
            raise ValidationError("observed slopes must be finite")
        bounds = tuple(float(v) for v in self.bounds_mpa)
        if len(bounds) != 2 or not all(np.isfinite(bounds)):
            raise ValidationError("modulus bounds must be two finite values")
        if not (0.0 < bounds[0] < bounds[1]):
            raise ValidationError(
                "modulus bounds must be positive and ordered")
        weights = self.weights
        if weights is None:
            weights = (1.0,) * n_sensors
        weights = tuple(float(v) for v in weights)
        if len(weights) != n_sensors:
            raise ValidationError(
                "need one weight per sensor (or none for uniform)")
        if not all(np.isfinite(weights)) or any(w < 0.0 for w in weights):
            raise ValidationError("weights must be finite and nonnegative")
        if not any(w > 0.0 for w in weights):
            raise ValidationError("at least one sensor weight must be positive")
        object.__setattr__(self, "observed", observed)
        object.__setattr__(self, "bounds_mpa", bounds)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class InverseSolution:
    """Estimate plus diagnostics.

    ``residual_norm`` is the square root of the weighted sum of squared
    slope differences at the estimate (for the lookup estimator: at the
    nearest database row).  ``iterations`` counts objective evaluations,
    memoized hits included; the lookup path reports 0.
    """

    modulus_mpa: float
    residual_norm: float
    iterations: int
    method: str
    per_sensor_residuals: tuple
    at_bound: bool

    def __post_init__(self):
        if self.method not in _METHOD_TAGS:
            raise ValidationError(f"unknown method tag {self.method!r}")
        if not (np.isfinite(self.modulus_mpa) and self.modulus_mpa > 0.0):
            raise ValidationError("estimated modulus must be positive")
        if not (np.isfinite(self.residual_norm) and self.residual_norm >= 0.0):
            raise ValidationError("residual norm must be nonnegative")
        object.__setattr__(self, "per_sensor_residuals",
                           tuple(float(v) for v in self.per_sensor_residuals))


@lru_cache(maxsize=4096)
def _forward_slopes(base_structure, tsd, modulus_mpa, tol, max_evaluations):
    """Sensor slopes for the base stack with the last layer's modulus set."""
    structure = base_structure.with_layer_modulus(
        len(base_structure.layers) - 1, modulus_mpa * 1e6)
    reading = simulate_sensor_reading(structure, tsd, tol=tol,
                                      max_evaluations=max_evaluations)
    return reading.slopes


def residual(problem: InverseProblem, modulus_mpa: float, *,
             tol: float = 1e-8,
             max_evaluations: int = DEFAULT_BUDGET) -> float:
    """Weighted sum of squared slope differences at one trial modulus."""
    lo, hi = problem.bounds_mpa
    e = float(modulus_mpa)
    if not (lo <= e <= hi):
        raise ValidationError(
            f"trial modulus {e:g} MPa is outside the bounds [{lo:g}, {hi:g}]")
    model = _forward_slopes(problem.base_structure, problem.tsd, e,
                            float(tol), int(max_evaluations))
    return float(sum(w * (m - o) ** 2 for w, m, o in
                     zip(problem.weights, model, problem.observed)))


def _scan_is_unimodal(values) -> bool:
    """True when the sequence strictly falls, then strictly rises."""
    rising = False
    for prev, cur in zip(values, values[1:]):
        if cur == prev:
            return False
        if cur > prev:
            rising = True
        elif rising:
            return False
    return True


def _minimize_objective(objective, lo: float, hi: float, *,
                        xatol: float = 1e-3, max_iterations: int = 200):
    """Scan for a bracket, then polish; falls back to a 1 MPa grid scan."""
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    values = [objective(float(e)) for e in grid]
    if _scan_is_unimodal(values):
        method = "bracketed-minimization"
        k = int(np.argmin(values))
    else:
        method = "grid-scan"
        grid = np.append(np.arange(lo, hi, 1.0), hi)
        values = [objective(float(e)) for e in grid]
        k = int(np.argmin(values))
    left = float(grid[max(k - 1, 0)])
    right = float(grid[min(k + 1, grid.size - 1)])
    best = minimize_bounded(objective, left, right, xatol=xatol,
                            max_iterations=max_iterations)
    return best.x, best.fx, method


def backcalculate(problem: InverseProblem, *, tol: float = 1e-8,
                  max_evaluations: int = DEFAULT_BUDGET) -> InverseSolution:
    """Estimate the modulus by bracketed minimization of the residual.

    A nine-point scan locates the bracket first; when the scan is not
    unimodal the solver degrades to an exhaustive 1 MPa scan before the
    local polish and tags the result "grid-scan".
    """
    lo, hi = problem.bounds_mpa
    count = 0

    def objective(e):
        nonlocal count
        count += 1
        return residual(problem, e, tol=tol, max_evaluations=max_evaluations)

    estimate, fx, method = _minimize_objective(objective, lo, hi)
    estimate = min(max(estimate, lo), hi)
    model = _forward_slopes(problem.base_structure, problem.tsd,
                            float(estimate), float(tol),
                            int(max_evaluations))
    return InverseSolution(
        modulus_mpa=float(estimate),
        residual_norm=float(np.sqrt(max(fx, 0.0))),
        iterations=count,
        method=method,
        per_sensor_residuals=tuple(m - o for m, o in
                                   zip(model, problem.observed)),
        at_bound=(estimate - lo <= _BOUND_SNAP_MPA
                  or hi - estimate <= _BOUND_SNAP_MPA))


def _quadratic_vertex(x, y):
    """Vertex abscissa of the parabola through three (x, y) points."""
    d21 = x[1] - x[0]
    d23 = x[1] - x[2]
    num = d21 ** 2 * (y[1] - y[2]) - d23 ** 2 * (y[1] - y[0])
    den = d21 * (y[1] - y[2]) - d23 * (y[1] - y[0])
    if den == 0.0:
        return x[1]
    return x[1] - 0.5 * num / den


def backcalculate_lookup(reading, database: SlopeDatabase, *,
                         weights=None) -> InverseSolution:
    """Estimate the modulus from the nearest database row.

    The nearest row by weighted squared distance wins; when it has two
    neighbors, a quadratic fit through the three nearest moduli refines
    the estimate.  A reading whose distance keeps falling toward an end
    row is outside the database envelope: the estimate clamps there and
    an extrapolation warning is issued.
    """
    observed = reading.slopes if isinstance(reading, SensorReading) else reading
    observed = tuple(float(v) for v in observed)
    n_sensors = database.sensor_slopes.shape[1]
    if len(observed) != n_sensors:
        raise ValidationError(
            f"reading has {len(observed)} values, the database carries "
            f"{n_sensors} sensor columns")
    if weights is None:
        weights = (1.0,) * n_sensors
    weights = tuple(float(v) for v in weights)
    if len(weights) != n_sensors:
        raise ValidationError("need one weight per sensor column")
    if any(w < 0.0 for w in weights) or not any(w > 0.0 for w in weights):
        raise ValidationError("weights must be nonnegative, one positive")

    deltas = database.sensor_slopes - np.array(observed)
    distances = deltas ** 2 @ np.array(weights)
    k = int(np.argmin(distances))
    moduli = database.moduli_mpa
    estimate = float(moduli[k])
    at_bound = k == 0 or k == moduli.size - 1
    if at_bound and moduli.size > 1:
        inward = k + 1 if k == 0 else k - 1
        if distances[inward] > distances[k]:
            warnings.warn(
                f"reading lies outside the database envelope; estimate "
                f"clamped at {estimate:g} MPa", stacklevel=2)
    elif not at_bound and distances[k] > 0.0:
        # an exact row hit stays on the row; anything else gets the
        # three-point parabola refinement
        window = slice(k - 1, k + 2)
        vertex = _quadratic_vertex(moduli[window], distances[window])
        estimate = float(min(max(vertex, moduli[k - 1]), moduli[k + 1]))
    return InverseSolution(
        modulus_mpa=estimate,
        residual_norm=float(np.sqrt(max(float(distances[k]), 0.0))),
        iterations=0,
        method="lookup",
        per_sensor_residuals=tuple(float(v) for v in deltas[k]),
        at_bound=at_bound)


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    """Central-difference sensor sensitivities over a modulus grid."""

    moduli_mpa: tuple
    step_mpa: float
    derivatives: np.ndarray
    relative_spread: np.ndarray

    def __post_init__(self):
        for arr in (self.derivatives, self.relative_spread):
            arr.setflags(write=False)


def sensitivity_report(structure: PavementStructure, tsd: TsdConfiguration,
                       moduli_mpa, *, step_mpa: float = 0.5,
                       tol: float = 1e-8,
                       max_evaluations: int = DEFAULT_BUDGET) -> SensitivityReport:
    """Sensor slope derivatives with respect to the modulus, per sensor.

    Derivatives are central differences with the given step (µm/m per
    MPa).  ``relative_spread`` is each sensor's slope range over the
    grid normalized by its largest magnitude, the spread-vs-stiffness
    signal the outer sensors are expected to amplify.
    """
    values = tuple(float(v) for v in moduli_mpa)
    if not values:
        raise ValidationError("sensitivity needs at least one modulus value")
    h = float(step_mpa)
    if not (h > 0.0):
        raise ValidationError("sensitivity step must be positive")
    if min(values) - h <= 0.0:
        raise ValidationError(
            "sensitivity stencil would cross zero modulus; reduce the step")

    def slopes_at(e):
        return np.array(_forward_slopes(structure, tsd, float(e),
                                        float(tol), int(max_evaluations)))

    derivatives = np.vstack([
        (slopes_at(v + h) - slopes_at(v - h)) / (2.0 * h) for v in values])
    table = np.vstack([slopes_at(v) for v in values])
    scale = np.max(np.abs(table), axis=0)
    spread = (table.max(axis=0) - table.min(axis=0)) / np.where(
        scale > 0.0, scale, 1.0)
    return SensitivityReport(moduli_mpa=values, step_mpa=h,
                             derivatives=derivatives,
                             relative_spread=spread)


def read_readings(path):
    """Parse a readings CSV (header ``id,Sn1..Sn7``) into (id, slopes) pairs."""
    text = Path(path).read_text(encoding="ascii")
    lines = [line for line in text.splitlines()
             if line.strip() and not line.startswith("#")]
    if not lines:
        raise DatabaseFormatError("readings file is empty")
    expected = _READINGS_HEADER.split(",")
    got = lines[0].split(",")
    if got != expected:
        unknown = [c for c in got if c not in expected]
        if unknown:
            raise DatabaseFormatError(
                f"readings header has unknown column(s): {', '.join(unknown)}")
        missing = [c for c in expected if c not in got]
        if missing:
            raise DatabaseFormatError(
                f"readings header is missing column(s): {', '.join(missing)}")
        raise DatabaseFormatError("readings header columns are out of order")
    if len(lines) == 1:
        raise DatabaseFormatError("readings file has no data rows")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != len(expected):
            raise DatabaseFormatError(
                f"line {lineno}: expected {len(expected)} fields, "
                f"got {len(fields)}")
        name = fields[0].strip()
        if not name:
            raise DatabaseFormatError(f"line {lineno}: empty reading id")
        try:
            rows.append((name, tuple(float(f) for f in fields[1:])))
        except ValueError as exc:
            raise DatabaseFormatError(
                f"line {lineno}: non-numeric slope ({exc})") from exc
    return rows


def write_results(path, results) -> None:
    """Write (id, InverseSolution) pairs as the results CSV."""
    lines = [_RESULTS_HEADER]
    for name, solution in results:
        lines.append(",".join([
            str(name),
            repr(float(solution.modulus_mpa)),
            repr(float(solution.residual_norm)),
            solution.method,
            "true" if solution.at_bound else "false",
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii",
                          newline="\n")
