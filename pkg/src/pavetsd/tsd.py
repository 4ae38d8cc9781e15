"""Ten-wheel deflectometer simulation over a layered pavement.

The vehicle's wheel loads are superposed along a measurement line to give
the surface deflection profile, which is differentiated to deflection
slope, zeroed against the far reference sensor, and sampled at the laser
positions.  The mechanics are static linear elastic throughout; vehicle
speed and load frequency are carried as metadata only.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .deflection import surface_deflection
from .errors import ConfigError, HankelConvergenceError, ValidationError
from .hankel import DEFAULT_BUDGET, hankel_integrate_many
from .kernel import SurfaceKernelSamples
from .layers import CircularLoad, PavementStructure

__all__ = [
    "GRAVITY",
    "BasinIndices",
    "DeflectionProfile",
    "SensorReading",
    "SlopeProfile",
    "TsdConfiguration",
    "WheelLoad",
    "apply_reference_correction",
    "basin_indices",
    "compute_profile",
    "default_wheels",
    "differentiate",
    "sample_sensors",
    "simulate_sensor_reading",
    "superposed_deflection",
]

GRAVITY = 9.81  # m/s^2, converts tons-force input to newtons

#: how far a sensor may sit from its nearest grid row, relative to the step
_GRID_TOL = 1e-6


@dataclass(frozen=True)
class WheelLoad:
    """One wheel: position in the vehicle frame and its vertical force.

    ``x`` runs along the travel axis toward the front wheel groups, ``y``
    across the vehicle.  ``force`` is in newtons and may be zero; an
    unloaded wheel contributes nothing and carries no contact disc.
    """

    x: float
    y: float
    force: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(
                f"wheel position must be finite, got ({self.x!r}, {self.y!r})")
        if not (math.isfinite(self.force) and self.force >= 0.0):
            raise ValidationError(
                f"wheel force must be finite and nonnegative, got {self.force!r}")

    @classmethod
    def from_tons(cls, x: float, y: float, tons: float) -> "WheelLoad":
        """Wheel with its load given in tons-force."""
        return cls(x, y, tons * 1000.0 * GRAVITY)


# stock vehicle layout: two rear dual pairs at x = 0 straddle the
# measurement line, two loaded wheel groups sit ahead of the sensor span
_STOCK_LAYOUT = (
    (0.0, -0.187, 2.875),
    (0.0, 0.187, 2.875),
    (0.0, 1.913, 2.875),
    (0.0, 2.287, 2.875),
    (8.150, -0.187, 1.55),
    (8.150, 0.187, 1.55),
    (8.150, 1.913, 1.55),
    (8.150, 2.287, 1.55),
    (11.750, -0.187, 3.15),
    (11.750, 2.287, 3.15),
)


def default_wheels() -> tuple[WheelLoad, ...]:
    """The stock ten-wheel layout with per-wheel loads in tons-force."""
    return tuple(WheelLoad.from_tons(x, y, tons)
                 for x, y, tons in _STOCK_LAYOUT)


def _grid_index(x0: float, step: float, count: int, position) -> int | None:
    """Row of ``position`` on the uniform grid, or None when off the grid."""
    if not math.isfinite(position):
        return None
    k = int(round((position - x0) / step))
    if k < 0 or k >= count:
        return None
    if abs(position - (x0 + k * step)) > _GRID_TOL * step:
        return None
    return k


@dataclass(frozen=True)
class TsdConfiguration:
    """Vehicle, measurement-line, and sensor geometry for one simulation.

    Contact discs are derived per wheel.  In ``"pressure"`` mode the
    inflation pressure is held fixed and each radius follows from the
    wheel force; in ``"radius"`` mode the disc radius is held fixed and
    the pressure follows.  The measurement line defaults to the midline
    of the rear dual pair; the other dual pair's midline (y = 2.1) is a
    legitimate alternative and simply another value of
    ``measurement_line_y``.
    """

    wheels: tuple[WheelLoad, ...] = field(default_factory=default_wheels)
    contact_mode: str = "pressure"
    contact_pressure: float = 0.92e6      # Pa
    tire_radius: float = 0.15             # m
    measurement_line_y: float = 0.0       # m
    profile_start: float = 0.0            # m
    profile_end: float = 4.0              # m
    profile_step: float = 0.01            # m
    sensor_offsets: tuple[float, ...] = (0.1, 0.2, 0.3, 0.45, 0.6, 0.9, 1.1)
    reference_offset: float = 3.8         # m
    vehicle_speed: float = 20.0           # m/s, metadata only
    load_frequency: float = 10.0          # Hz, metadata only
    temperature_c: float = 15.0           # metadata only

    def __post_init__(self):
        object.__setattr__(self, "wheels", tuple(self.wheels))
        object.__setattr__(self, "sensor_offsets", tuple(self.sensor_offsets))
        if not self.wheels:
            raise ConfigError("at least one wheel is required")
        for wheel in self.wheels:
            if not isinstance(wheel, WheelLoad):
                raise ConfigError(f"wheels must be WheelLoad entries, got {wheel!r}")
        if self.contact_mode not in ("pressure", "radius"):
            raise ConfigError(
                f"contact_mode must be 'pressure' or 'radius', got {self.contact_mode!r}")
        if not (math.isfinite(self.contact_pressure) and self.contact_pressure > 0.0):
            raise ConfigError(
                f"contact_pressure must be positive, got {self.contact_pressure!r}")
        if not (math.isfinite(self.tire_radius) and self.tire_radius > 0.0):
            raise ConfigError(
                f"tire_radius must be positive, got {self.tire_radius!r}")
        for name in ("measurement_line_y", "vehicle_speed", "load_frequency",
                     "temperature_c"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if not (math.isfinite(self.profile_step) and self.profile_step > 0.0):
            raise ConfigError(
                f"profile_step must be positive, got {self.profile_step!r}")
        span = self.profile_end - self.profile_start
        if not (math.isfinite(span) and span > 0.0):
            raise ConfigError("profile_end must exceed profile_start")
        steps = span / self.profile_step
        if abs(steps - round(steps)) > _GRID_TOL * max(1.0, steps):
            raise ConfigError(
                "the profile span must be a whole number of profile steps")
        count = int(round(steps)) + 1
        if not self.sensor_offsets:
            raise ConfigError("at least one sensor offset is required")
        previous = -math.inf
        for offset in self.sensor_offsets:
            if not offset > previous:
                raise ConfigError("sensor offsets must be strictly increasing")
            previous = offset
            if _grid_index(self.profile_start, self.profile_step, count,
                           offset) is None:
                raise ConfigError(
                    f"sensor offset {offset!r} is not a grid sample of the "
                    "measurement span; sampling never interpolates")
        if _grid_index(self.profile_start, self.profile_step, count,
                       self.reference_offset) is None:
            raise ConfigError(
                f"reference offset {self.reference_offset!r} is not a grid "
                "sample of the measurement span")

    @property
    def sample_count(self) -> int:
        span = self.profile_end - self.profile_start
        return int(round(span / self.profile_step)) + 1

    def offsets(self) -> np.ndarray:
        """All measurement-line grid offsets, profile_start first."""
        return self.profile_start + np.arange(self.sample_count) * self.profile_step

    def wheel_contacts(self) -> tuple[tuple[int, WheelLoad, CircularLoad], ...]:
        """Loaded wheels with their contact discs; zero-force wheels drop out.

        Each entry keeps the wheel's index in the configured tuple, so
        error reports stay traceable to the layout.
        """
        out = []
        for i, wheel in enumerate(self.wheels):
            if wheel.force == 0.0:
                continue
            if self.contact_mode == "pressure":
                disc = CircularLoad(
                    pressure=self.contact_pressure,
                    radius=math.sqrt(wheel.force / (math.pi * self.contact_pressure)))
            else:
                disc = CircularLoad(
                    pressure=wheel.force / (math.pi * self.tire_radius ** 2),
                    radius=self.tire_radius)
            out.append((i, wheel, disc))
        return tuple(out)

    def with_scaled_loads(self, factor: float) -> "TsdConfiguration":
        """Same geometry with every wheel force scaled by ``factor``."""
        if not (math.isfinite(factor) and factor >= 0.0):
            raise ValidationError(
                f"load scale must be finite and nonnegative, got {factor!r}")
        wheels = tuple(replace(w, force=w.force * factor) for w in self.wheels)
        return replace(self, wheels=wheels)

    def config_hash(self) -> str:
        """Short stable id over every configured field (provenance tag)."""
        parts = [self.contact_mode]
        for w in self.wheels:
            parts.append(f"{w.x!r},{w.y!r},{w.force!r}")
        for value in (self.contact_pressure, self.tire_radius,
                      self.measurement_line_y, self.profile_start,
                      self.profile_end, self.profile_step,
                      *self.sensor_offsets, self.reference_offset,
                      self.vehicle_speed, self.load_frequency,
                      self.temperature_c):
            parts.append(repr(value))
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]


def _uniform_step(offsets: np.ndarray) -> float:
    """The grid step, after checking the offsets really are uniform."""
    step = (offsets[-1] - offsets[0]) / (offsets.size - 1)
    if not (np.isfinite(step) and step > 0.0):
        raise ValidationError("offsets must be strictly increasing")
    if float(np.abs(np.diff(offsets) - step).max()) > 1e-9 * step:
        raise ValidationError("offsets must form a uniform grid")
    return step


@dataclass(frozen=True, eq=False)
class DeflectionProfile:
    """Surface deflection on a uniform measurement-line grid.

    Deflections are in micrometers, downward positive; provenance ties
    the samples back to one structure and one vehicle configuration.
    """

    offsets: np.ndarray
    deflections_um: np.ndarray
    structure_id: str
    config_hash: str

    def __post_init__(self):
        x = np.array(self.offsets, dtype=np.float64)
        w = np.array(self.deflections_um, dtype=np.float64)
        if x.ndim != 1 or x.shape != w.shape or x.size < 2:
            raise ValidationError(
                "a profile needs matching 1-D offset and deflection arrays "
                "with at least two samples")
        _uniform_step(x)
        if not np.all(np.isfinite(w) & (w > 0.0)):
            raise ValidationError("deflections must be finite and positive")
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "offsets", x)
        object.__setattr__(self, "deflections_um", w)


@dataclass(frozen=True, eq=False)
class SlopeProfile:
    """Deflection slope on the profile grid, micrometers per meter.

    ``corrected`` marks whether the reference zeroing has been applied;
    ``reference_value`` then holds the raw slope that was subtracted and
    ``reference_offset`` where it was read.
    """

    offsets: np.ndarray
    slopes_um_per_m: np.ndarray
    corrected: bool
    reference_value: float | None
    reference_offset: float | None
    structure_id: str
    config_hash: str

    def __post_init__(self):
        x = np.array(self.offsets, dtype=np.float64)
        s = np.array(self.slopes_um_per_m, dtype=np.float64)
        if x.ndim != 1 or x.shape != s.shape or x.size < 2:
            raise ValidationError(
                "a slope profile needs matching 1-D offset and slope arrays "
                "with at least two samples")
        step = _uniform_step(x)
        if not np.all(np.isfinite(s)):
            raise ValidationError("slopes must be finite")
        if self.corrected:
            if self.reference_value is None or self.reference_offset is None:
                raise ValidationError(
                    "a corrected slope profile must record the reference "
                    "value and offset")
            k = _grid_index(float(x[0]), float(step), x.size,
                            self.reference_offset)
            if k is None:
                raise ValidationError(
                    "the reference offset must be a grid sample")
            if s[k] != 0.0:
                raise ValidationError(
                    "a corrected slope profile must read exactly zero at "
                    "the reference offset")
        x.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "offsets", x)
        object.__setattr__(self, "slopes_um_per_m", s)


@dataclass(frozen=True)
class SensorReading:
    """Corrected slopes at the laser sensor offsets, micrometers per meter.

    ``raw_reference_slope`` keeps the slope that was zeroed out at the
    reference offset; it is the diagnostic that distinguishes a wide
    soft-subgrade basin from a stiff one.
    """

    sensor_offsets: tuple[float, ...]
    slopes: tuple[float, ...]
    raw_reference_slope: float
    structure_id: str
    config_hash: str

    def __post_init__(self):
        if len(self.sensor_offsets) != len(self.slopes):
            raise ValidationError("one slope per sensor offset")


@dataclass(frozen=True)
class BasinIndices:
    """Deflection-basin shape indices, in micrometers.

    ``sci_um`` is the surface curvature index w(origin) - w(origin+0.3);
    ``bdi_um`` the base damage index w(origin+0.3) - w(origin+0.6).
    """

    sci_um: float
    bdi_um: float

    def __post_init__(self):
        if not (math.isfinite(self.sci_um) and math.isfinite(self.bdi_um)):
            raise ValidationError("basin indices must be finite")


def _kernel_table(structure, tsd, samples):
    if samples is not None:
        return samples
    contacts = tsd.wheel_contacts()
    if not contacts:
        return None
    radii = [disc.radius for _, _, disc in contacts]
    return SurfaceKernelSamples.for_contact_radii(structure, radii)


def _contact_classes(tsd):
    """Distinct deflection-curve classes among the loaded wheels.

    Wheels sharing longitudinal position, transverse gap to the
    measurement line, and contact disc trace identical curves, so each
    class is integrated once and weighted by its multiplicity.  The first
    member's wheel index is kept for error reports.
    """
    classes = {}
    for i, wheel, disc in tsd.wheel_contacts():
        key = (wheel.x, abs(tsd.measurement_line_y - wheel.y),
               disc.radius, disc.pressure)
        if key in classes:
            classes[key][0] += 1
        else:
            classes[key] = [1, i]
    return [(key, mult, first) for key, (mult, first) in classes.items()]


def superposed_deflection(structure: PavementStructure, tsd: TsdConfiguration,
                          x: float, *, tol: float = 1e-8, samples=None,
                          max_evaluations: int = DEFAULT_BUDGET) -> float:
    """Deflection at offset ``x`` on the measurement line, in micrometers.

    A literal sum over the loaded wheels of the single-disc response at
    each wheel's horizontal distance from the measurement point.
    """
    if not (tsd.profile_start - 1e-9 <= x <= tsd.profile_end + 1e-9):
        raise ValidationError(
            f"offset {x!r} lies outside the measurement span "
            f"[{tsd.profile_start:g}, {tsd.profile_end:g}]")
    samples = _kernel_table(structure, tsd, samples)
    total = 0.0
    for i, wheel, disc in tsd.wheel_contacts():
        r = float(np.hypot(x - wheel.x, tsd.measurement_line_y - wheel.y))
        try:
            total += surface_deflection(structure, disc, r, tol=tol,
                                        kernel=samples,
                                        max_evaluations=max_evaluations)
        except HankelConvergenceError as exc:
            raise HankelConvergenceError(
                f"wheel {i}: {exc}", partial_estimate=exc.partial_estimate,
                evaluations=exc.evaluations) from exc
    return total * 1e6


def _superposed_values(structure, tsd, x, *, tol=1e-8, samples=None,
                       max_evaluations=DEFAULT_BUDGET) -> np.ndarray:
    """Superposed deflection in micrometers at an array of offsets.

    Every offset's value is a pure function of that offset alone, so any
    subset of the grid evaluates bitwise identically to the full grid;
    the restricted sensor evaluations rely on this.
    """
    x = np.asarray(x, dtype=np.float64)
    samples = _kernel_table(structure, tsd, samples)
    total = np.zeros(x.shape)
    for (wx, dy, radius, pressure), mult, first in _contact_classes(tsd):
        r = np.hypot(x - wx, dy)
        try:
            vals = hankel_integrate_many(samples, radius, r, tol=tol,
                                         max_evaluations=max_evaluations)
        except HankelConvergenceError as exc:
            raise HankelConvergenceError(
                f"wheel {first}: {exc}",
                partial_estimate=exc.partial_estimate,
                evaluations=exc.evaluations) from exc
        total += float(mult) * (pressure * radius * vals)
    return total * 1e6


def compute_profile(structure: PavementStructure, tsd: TsdConfiguration, *,
                    tol: float = 1e-8, samples=None,
                    max_evaluations: int = DEFAULT_BUDGET) -> DeflectionProfile:
    """Superposed deflection at every grid offset of the measurement line."""
    w = _superposed_values(structure, tsd, tsd.offsets(), tol=tol,
                           samples=samples, max_evaluations=max_evaluations)
    return DeflectionProfile(offsets=tsd.offsets(), deflections_um=w,
                             structure_id=structure.fingerprint(),
                             config_hash=tsd.config_hash())


def _slope_at(w, k: int, n: int, delta):
    """Second-order slope estimate at grid row ``k``.

    Written difference-first so a constant input yields exactly zero at
    the one-sided ends too.
    """
    if 0 < k < n - 1:
        return (w[k + 1] - w[k - 1]) / (2.0 * delta)
    if k == 0:
        return (3.0 * (w[1] - w[0]) - (w[2] - w[1])) / (2.0 * delta)
    return (3.0 * (w[n - 1] - w[n - 2]) - (w[n - 2] - w[n - 3])) / (2.0 * delta)


def _stencil_rows(k: int, n: int) -> tuple[int, ...]:
    """Grid rows the slope stencil at row ``k`` reads."""
    if 0 < k < n - 1:
        return (k - 1, k + 1)
    if k == 0:
        return (0, 1, 2)
    return (n - 3, n - 2, n - 1)


def differentiate(profile: DeflectionProfile) -> SlopeProfile:
    """Slope of the deflection profile, micrometers per meter.

    Central differences at interior rows, second-order one-sided stencils
    at both ends.
    """
    x = profile.offsets
    w = profile.deflections_um
    n = x.size
    if n < 3:
        raise ValidationError("slope needs at least three profile samples")
    delta = _uniform_step(x)
    slopes = np.array([_slope_at(w, k, n, delta) for k in range(n)])
    return SlopeProfile(offsets=x, slopes_um_per_m=slopes, corrected=False,
                        reference_value=None, reference_offset=None,
                        structure_id=profile.structure_id,
                        config_hash=profile.config_hash)


def apply_reference_correction(slope: SlopeProfile,
                               reference_offset: float) -> SlopeProfile:
    """Shift the slope curve so it reads zero at the reference offset.

    Idempotent: a profile already corrected at that offset is returned
    unchanged, keeping the originally recorded raw reference value.
    """
    if slope.corrected:
        if slope.reference_offset == reference_offset:
            return slope
        raise ValidationError(
            "slope profile is already corrected at a different reference offset")
    x = slope.offsets
    step = _uniform_step(x)
    k = _grid_index(float(x[0]), float(step), x.size, reference_offset)
    if k is None:
        raise ValidationError(
            f"reference offset {reference_offset!r} is not a grid sample; "
            "the correction never interpolates")
    raw = float(slope.slopes_um_per_m[k])
    return SlopeProfile(offsets=x,
                        slopes_um_per_m=slope.slopes_um_per_m - raw,
                        corrected=True, reference_value=raw,
                        reference_offset=float(reference_offset),
                        structure_id=slope.structure_id,
                        config_hash=slope.config_hash)


def sample_sensors(slope: SlopeProfile,
                   tsd: TsdConfiguration) -> SensorReading:
    """Corrected slope at each configured sensor offset, by exact row lookup."""
    if not slope.corrected:
        raise ValidationError(
            "sensor sampling requires a corrected slope profile")
    x = slope.offsets
    step = _uniform_step(x)
    values = []
    for offset in tsd.sensor_offsets:
        k = _grid_index(float(x[0]), float(step), x.size, offset)
        if k is None:
            raise ValidationError(
                f"sensor offset {offset!r} is not a sample of the slope grid")
        values.append(float(slope.slopes_um_per_m[k]))
    return SensorReading(sensor_offsets=tuple(tsd.sensor_offsets),
                         slopes=tuple(values),
                         raw_reference_slope=float(slope.reference_value),
                         structure_id=slope.structure_id,
                         config_hash=slope.config_hash)


def basin_indices(profile: DeflectionProfile,
                  origin: float = 0.0) -> BasinIndices:
    """Basin shape indices from deflections at origin, +0.3 m and +0.6 m."""
    x = profile.offsets
    step = _uniform_step(x)
    rows = []
    for target in (origin, origin + 0.3, origin + 0.6):
        k = _grid_index(float(x[0]), float(step), x.size, target)
        if k is None:
            raise ValidationError(
                f"basin indices need a profile sample at {target!r}")
        rows.append(k)
    w = profile.deflections_um
    return BasinIndices(sci_um=float(w[rows[0]] - w[rows[1]]),
                        bdi_um=float(w[rows[1]] - w[rows[2]]))


def simulate_sensor_reading(structure: PavementStructure,
                            tsd: TsdConfiguration, *, tol: float = 1e-8,
                            samples=None,
                            max_evaluations: int = DEFAULT_BUDGET) -> SensorReading:
    """Sensor reading straight from the forward model.

    Evaluates the deflection only at the grid rows the slope stencils
    touch, then applies the same difference and zeroing arithmetic as the
    full pipeline.  The result is bitwise identical to running
    compute_profile, differentiate, apply_reference_correction and
    sample_sensors, at a fraction of the cost; the inverse solver leans
    on this for its residual evaluations.
    """
    x = tsd.offsets()
    n = x.size
    if n < 3:
        raise ValidationError("slope needs at least three profile samples")
    delta = _uniform_step(x)
    x0 = float(x[0])
    step = float(delta)
    rows = []
    for target in (*tsd.sensor_offsets, tsd.reference_offset):
        k = _grid_index(x0, step, n, target)
        if k is None:
            raise ValidationError(
                f"offset {target!r} is not a grid sample of the measurement span")
        rows.append(k)
    needed = sorted({i for k in rows for i in _stencil_rows(k, n)})
    w_vals = _superposed_values(structure, tsd, x[needed], tol=tol,
                                samples=samples,
                                max_evaluations=max_evaluations)
    w = dict(zip(needed, w_vals))
    slopes = {k: _slope_at(w, k, n, delta) for k in set(rows)}
    raw = slopes[rows[-1]]
    values = tuple(float(slopes[k] - raw) for k in rows[:-1])
    return SensorReading(sensor_offsets=tuple(tsd.sensor_offsets),
                         slopes=values,
                         raw_reference_slope=float(raw),
                         structure_id=structure.fingerprint(),
                         config_hash=tsd.config_hash())
