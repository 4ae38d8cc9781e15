"""Layered-elastic pavement response, TSD simulation, and M_R backcalculation."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DatabaseFormatError,
    HankelConvergenceError,
    KernelConditioningError,
    NumericalError,
    PavetsdError,
    ValidationError,
)
from .layers import CircularLoad, ElasticLayer, PavementStructure
from .kernel import SurfaceKernelSamples, surface_response_kernel
from .hankel import HankelResult, hankel_integrate, hankel_integrate_many
from .deflection import surface_deflection
from .tsd import (
    GRAVITY,
    BasinIndices,
    DeflectionProfile,
    SensorReading,
    SlopeProfile,
    TsdConfiguration,
    WheelLoad,
    apply_reference_correction,
    basin_indices,
    compute_profile,
    default_wheels,
    differentiate,
    sample_sensors,
    simulate_sensor_reading,
    superposed_deflection,
)
from .dataset import (
    DeflectionMatrix,
    SlopeDatabase,
    SweepSpec,
    default_structure,
    generate_database,
    read_database,
    sweep_modulus,
    write_database,
    write_deflection_matrix,
)
from .inverse import (
    InverseProblem,
    InverseSolution,
    SensitivityReport,
    backcalculate,
    backcalculate_lookup,
    read_readings,
    residual,
    sensitivity_report,
    write_results,
)
from .optimize import ScalarMinimum, minimize_bounded
from .config import (
    RunConfig,
    default_config_dict,
    expand_sweep_range,
    load_config,
    render_default_config,
)
from .svgplot import ChartSeries, line_chart, write_chart

__all__ = [
    "BasinIndices",
    "ChartSeries",
    "CircularLoad",
    "ConfigError",
    "DatabaseFormatError",
    "DeflectionMatrix",
    "DeflectionProfile",
    "ElasticLayer",
    "GRAVITY",
    "HankelConvergenceError",
    "HankelResult",
    "InverseProblem",
    "InverseSolution",
    "KernelConditioningError",
    "NumericalError",
    "PavementStructure",
    "PavetsdError",
    "RunConfig",
    "ScalarMinimum",
    "SensitivityReport",
    "SensorReading",
    "SlopeDatabase",
    "SlopeProfile",
    "SurfaceKernelSamples",
    "SweepSpec",
    "TsdConfiguration",
    "ValidationError",
    "WheelLoad",
    "apply_reference_correction",
    "backcalculate",
    "backcalculate_lookup",
    "basin_indices",
    "compute_profile",
    "default_config_dict",
    "default_structure",
    "default_wheels",
    "differentiate",
    "expand_sweep_range",
    "generate_database",
    "hankel_integrate",
    "hankel_integrate_many",
    "line_chart",
    "load_config",
    "minimize_bounded",
    "read_database",
    "read_readings",
    "render_default_config",
    "residual",
    "sample_sensors",
    "sensitivity_report",
    "simulate_sensor_reading",
    "superposed_deflection",
    "surface_deflection",
    "surface_response_kernel",
    "sweep_modulus",
    "write_chart",
    "write_database",
    "write_deflection_matrix",
    "write_results",
    "__version__",
]
