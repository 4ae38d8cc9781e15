"""Run configuration: defaults, JSON loading, and validation.

A run is described by one JSON document with four sections: ``structure``
(the layer stack), ``tsd`` (vehicle, contact, and sensor geometry),
``sweep`` (which layer is varied and over which moduli), and ``numerics``
(quadrature tolerance, evaluation budget, worker count). Every key has a
default, and the defaults regenerate the stock database layout, so a bare
``generate`` run needs no file at all.

Moduli and pressures are given in megapascals in config files and on the
command line; they are converted to pascals at the package boundary.
"""

import copy
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .dataset import SweepSpec
from .errors import ConfigError
from .hankel import DEFAULT_BUDGET, TOL_RANGE
from .layers import ElasticLayer, PavementStructure
from .tsd import TsdConfiguration, WheelLoad

__all__ = ["RunConfig", "default_config_dict", "expand_sweep_range",
           "load_config", "render_default_config"]

_DEFAULT_CONFIG = {
    "structure": {
        "layers": [
            {"thickness_m": 0.06, "modulus_mpa": 7000.0, "poissons_ratio": 0.35},
            {"thickness_m": 0.09, "modulus_mpa": 9300.0, "poissons_ratio": 0.35},
            {"thickness_m": 0.09, "modulus_mpa": 9300.0, "poissons_ratio": 0.35},
            {"thickness_m": None, "modulus_mpa": 100.0, "poissons_ratio": 0.35},
        ],
    },
    "tsd": {
        "wheels": [
            {"x_m": 0.0, "y_m": -0.187, "load_tons": 2.875},
            {"x_m": 0.0, "y_m": 0.187, "load_tons": 2.875},
            {"x_m": 0.0, "y_m": 1.913, "load_tons": 2.875},
            {"x_m": 0.0, "y_m": 2.287, "load_tons": 2.875},
            {"x_m": 8.15, "y_m": -0.187, "load_tons": 1.55},
            {"x_m": 8.15, "y_m": 0.187, "load_tons": 1.55},
            {"x_m": 8.15, "y_m": 1.913, "load_tons": 1.55},
            {"x_m": 8.15, "y_m": 2.287, "load_tons": 1.55},
            {"x_m": 11.75, "y_m": -0.187, "load_tons": 3.15},
            {"x_m": 11.75, "y_m": 2.287, "load_tons": 3.15},
        ],
        "contact_mode": "pressure",
        "contact_pressure_mpa": 0.92,
        "tire_radius_m": 0.15,
        "measurement_line_y_m": 0.0,
        "profile_start_m": 0.0,
        "profile_end_m": 4.0,
        "profile_step_m": 0.01,
        "sensor_offsets_m": [0.1, 0.2, 0.3, 0.45, 0.6, 0.9, 1.1],
        "reference_offset_m": 3.8,
        "vehicle_speed_mps": 20.0,
        "load_frequency_hz": 10.0,
        "temperature_c": 15.0,
    },
    "sweep": {
        "layer_index": None,
        "moduli_mpa": {"start": 16.0, "stop": 250.0, "step": 1.0},
    },
    "numerics": {
        "quadrature_tol": 1e-8,
        "max_evaluations": DEFAULT_BUDGET,
        "threads": 1,
    },
}


def default_config_dict() -> dict:
    """A fresh copy of the built-in configuration document."""
    return copy.deepcopy(_DEFAULT_CONFIG)


def render_default_config() -> str:
    """The built-in configuration as formatted JSON."""
    return json.dumps(_DEFAULT_CONFIG, indent=2) + "\n"


def _number(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite, got {value!r}")
    return float(value)


def _integer(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    return value


def _check_keys(section: str, data: dict, allowed) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r} in section {section!r}")


def expand_sweep_range(start: float, stop: float, step: float):
    """Inclusive modulus ladder from ``start`` to ``stop`` in MPa.

    The span must be a whole number of steps; the same rule the command
    line's LO:HI:STEP argument follows.
    """
    for name, value in (("start", start), ("stop", stop), ("step", step)):
        if not math.isfinite(value):
            raise ConfigError(f"sweep {name} must be finite, got {value!r}")
    if step <= 0.0:
        raise ConfigError(f"sweep step must be positive, got {step!r}")
    if stop < start:
        raise ConfigError(
            f"sweep stop {stop!r} must not be below start {start!r}")
    span = (stop - start) / step
    count = int(round(span))
    if abs(span - count) > 1e-9 * max(1.0, span):
        raise ConfigError(
            f"sweep range {start!r}:{stop!r} is not a whole number of "
            f"{step!r} steps")
    return tuple(float(start + k * step) for k in range(count + 1))


def _build_structure(data: dict) -> PavementStructure:
    _check_keys("structure", data, ("layers",))
    entries = data["layers"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("structure.layers must be a nonempty list")
    layers = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"structure.layers[{i}] must be an object")
        _check_keys(f"structure.layers[{i}]", entry,
                    ("thickness_m", "modulus_mpa", "poissons_ratio"))
        for key in ("modulus_mpa", "poissons_ratio"):
            if key not in entry:
                raise ConfigError(f"structure.layers[{i}] is missing {key!r}")
        thickness = entry.get("thickness_m")
        if thickness is not None:
            thickness = _number(f"structure.layers[{i}]", "thickness_m",
                                thickness)
        layers.append(ElasticLayer(
            thickness=thickness,
            youngs_modulus=_number(f"structure.layers[{i}]", "modulus_mpa",
                                   entry["modulus_mpa"]) * 1e6,
            poissons_ratio=_number(f"structure.layers[{i}]", "poissons_ratio",
                                   entry["poissons_ratio"])))
    return PavementStructure(tuple(layers))


def _build_tsd(data: dict) -> TsdConfiguration:
    _check_keys("tsd", data, ("wheels", "contact_mode", "contact_pressure_mpa",
                              "tire_radius_m", "measurement_line_y_m",
                              "profile_start_m", "profile_end_m",
                              "profile_step_m", "sensor_offsets_m",
                              "reference_offset_m", "vehicle_speed_mps",
                              "load_frequency_hz", "temperature_c"))
    entries = data["wheels"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("tsd.wheels must be a nonempty list")
    wheels = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"tsd.wheels[{i}] must be an object")
        _check_keys(f"tsd.wheels[{i}]", entry, ("x_m", "y_m", "load_tons"))
        for key in ("x_m", "y_m", "load_tons"):
            if key not in entry:
                raise ConfigError(f"tsd.wheels[{i}] is missing {key!r}")
        wheels.append(WheelLoad.from_tons(
            _number(f"tsd.wheels[{i}]", "x_m", entry["x_m"]),
            _number(f"tsd.wheels[{i}]", "y_m", entry["y_m"]),
            _number(f"tsd.wheels[{i}]", "load_tons", entry["load_tons"])))
    mode = data["contact_mode"]
    if mode not in ("pressure", "radius"):
        raise ConfigError(
            f"tsd.contact_mode must be 'pressure' or 'radius', got {mode!r}")
    offsets = data["sensor_offsets_m"]
    if not isinstance(offsets, list) or not offsets:
        raise ConfigError("tsd.sensor_offsets_m must be a nonempty list")
    return TsdConfiguration(
        wheels=tuple(wheels),
        contact_mode=mode,
        contact_pressure=_number("tsd", "contact_pressure_mpa",
                                 data["contact_pressure_mpa"]) * 1e6,
        tire_radius=_number("tsd", "tire_radius_m", data["tire_radius_m"]),
        measurement_line_y=_number("tsd", "measurement_line_y_m",
                                   data["measurement_line_y_m"]),
        profile_start=_number("tsd", "profile_start_m",
                              data["profile_start_m"]),
        profile_end=_number("tsd", "profile_end_m", data["profile_end_m"]),
        profile_step=_number("tsd", "profile_step_m", data["profile_step_m"]),
        sensor_offsets=tuple(
            _number("tsd", f"sensor_offsets_m[{i}]", v)
            for i, v in enumerate(offsets)),
        reference_offset=_number("tsd", "reference_offset_m",
                                 data["reference_offset_m"]),
        vehicle_speed=_number("tsd", "vehicle_speed_mps",
                              data["vehicle_speed_mps"]),
        load_frequency=_number("tsd", "load_frequency_hz",
                               data["load_frequency_hz"]),
        temperature_c=_number("tsd", "temperature_c", data["temperature_c"]))


def _build_sweep(data: dict, structure: PavementStructure) -> SweepSpec:
    _check_keys("sweep", data, ("layer_index", "moduli_mpa"))
    index = data["layer_index"]
    if index is not None:
        index = _integer("sweep", "layer_index", index)
    moduli = data["moduli_mpa"]
    if isinstance(moduli, dict):
        _check_keys("sweep.moduli_mpa", moduli, ("start", "stop", "step"))
        for key in ("start", "stop", "step"):
            if key not in moduli:
                raise ConfigError(f"sweep.moduli_mpa is missing {key!r}")
        values = expand_sweep_range(
            _number("sweep.moduli_mpa", "start", moduli["start"]),
            _number("sweep.moduli_mpa", "stop", moduli["stop"]),
            _number("sweep.moduli_mpa", "step", moduli["step"]))
    elif isinstance(moduli, list):
        if not moduli:
            raise ConfigError("sweep.moduli_mpa must not be empty")
        values = tuple(_number("sweep", f"moduli_mpa[{i}]", v)
                       for i, v in enumerate(moduli))
    else:
        raise ConfigError(
            "sweep.moduli_mpa must be a list of values or a "
            "start/stop/step object")
    return SweepSpec(base_structure=structure, layer_index=index,
                     moduli_mpa=values)


@dataclass(frozen=True)
class RunConfig:
    """Everything one command invocation needs, fully validated.

    ``threads`` counts sweep worker processes; zero means one per
    available CPU. The output directory comes from the command line, not
    the JSON document, and is created on demand by the commands that
    write files.
    """

    structure: PavementStructure = field(
        default_factory=lambda: _build_structure(
            default_config_dict()["structure"]))
    tsd: TsdConfiguration = field(default_factory=TsdConfiguration)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    quadrature_tol: float = 1e-8
    max_evaluations: int = DEFAULT_BUDGET
    threads: int = 1
    output_dir: Path = Path(".")

    def __post_init__(self):
        if not isinstance(self.structure, PavementStructure):
            raise ConfigError("structure must be a PavementStructure")
        if not isinstance(self.tsd, TsdConfiguration):
            raise ConfigError("tsd must be a TsdConfiguration")
        if not isinstance(self.sweep, SweepSpec):
            raise ConfigError("sweep must be a SweepSpec")
        lo, hi = TOL_RANGE
        tol = self.quadrature_tol
        if not (isinstance(tol, (int, float)) and not isinstance(tol, bool)
                and lo <= float(tol) <= hi):
            raise ConfigError(
                f"quadrature tolerance must lie within [{lo:g}, {hi:g}], "
                f"got {tol!r}")
        object.__setattr__(self, "quadrature_tol", float(tol))
        if (isinstance(self.max_evaluations, bool)
                or not isinstance(self.max_evaluations, int)
                or self.max_evaluations < 1):
            raise ConfigError(
                f"max_evaluations must be a positive integer, got "
                f"{self.max_evaluations!r}")
        if (isinstance(self.threads, bool) or not isinstance(self.threads, int)
                or self.threads < 0):
            raise ConfigError(
                f"threads must be a nonnegative integer (0 means one per "
                f"CPU), got {self.threads!r}")
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    def resolved_threads(self) -> int:
        if self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


def _config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("the configuration document must be a JSON object")
    _check_keys("config", data, ("structure", "tsd", "sweep", "numerics"))
    merged = default_config_dict()
    for section, content in data.items():
        if not isinstance(content, dict):
            raise ConfigError(f"section {section!r} must be an object")
        merged[section].update(content)

    structure = _build_structure(merged["structure"])
    tsd = _build_tsd(merged["tsd"])
    sweep = _build_sweep(merged["sweep"], structure)

    numerics = merged["numerics"]
    _check_keys("numerics", numerics,
                ("quadrature_tol", "max_evaluations", "threads"))
    return RunConfig(
        structure=structure, tsd=tsd, sweep=sweep,
        quadrature_tol=_number("numerics", "quadrature_tol",
                               numerics["quadrature_tol"]),
        max_evaluations=_integer("numerics", "max_evaluations",
                                 numerics["max_evaluations"]),
        threads=_integer("numerics", "threads", numerics["threads"]))


def load_config(path=None) -> RunConfig:
    """Build a run configuration from a JSON file, or the defaults.

    Sections and keys omitted from the file keep their default values;
    unknown keys are rejected by name so typos do not silently fall back
    to a default.
    """
    if path is None:
        return _config_from_dict({})
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return _config_from_dict(data)
