"""Domain types for the layered elastic system.

Everything is strict SI: pascals, meters, newtons.  Unit conversion happens
at I/O boundaries only (config ingestion, CSV emission).
"""

import hashlib
import math
from dataclasses import dataclass, field, replace

from .errors import ValidationError

#: marker accepted for a semi-infinite bottom layer (None is also accepted)
SEMI_INFINITE = math.inf


@dataclass(frozen=True)
class ElasticLayer:
    """One isotropic linear elastic layer.

    :param thickness: layer thickness in meters; ``None`` (or ``math.inf``)
        marks the semi-infinite bottom layer.
    :param youngs_modulus: Young's modulus in pascals, > 0.
    :param poissons_ratio: Poisson's ratio, strictly inside (0, 0.5).
    :param bond: interface condition with the layer below; only
        ``"bonded"`` is implemented.  ``"unbonded"`` is recognized as valid
        vocabulary but rejected with a clear error.
    :param temperature_c: carried as metadata, not used by the mechanics.
    """

    thickness: float | None
    youngs_modulus: float
    poissons_ratio: float
    bond: str = "bonded"
    temperature_c: float = 15.0

    def __post_init__(self):
        e = self.youngs_modulus
        if not (math.isfinite(e) and e > 0.0):
            raise ValidationError(
                f"youngs_modulus must be positive and finite, got {e!r}")
        nu = self.poissons_ratio
        if not (0.0 < nu < 0.5):
            raise ValidationError(
                f"poissons_ratio must be strictly inside (0, 0.5), got {nu!r}")
        t = self.thickness
        if t is not None and t != math.inf:
            if not (math.isfinite(t) and t > 0.0):
                raise ValidationError(
                    f"thickness must be positive and finite or semi-infinite, got {t!r}")
        if self.bond == "unbonded":
            raise ValidationError(
                "unbonded interfaces are recognized but not implemented; "
                "only 'bonded' is supported")
        if self.bond != "bonded":
            raise ValidationError(f"unknown interface condition {self.bond!r}")

    @property
    def semi_infinite(self) -> bool:
        return self.thickness is None or self.thickness == math.inf

    @property
    def shear_modulus(self) -> float:
        return self.youngs_modulus / (2.0 * (1.0 + self.poissons_ratio))


@dataclass(frozen=True)
class PavementStructure:
    """Ordered stack of layers, surface first, semi-infinite last."""

    layers: tuple[ElasticLayer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 1:
            raise ValidationError("structure needs at least one layer")
        for i, layer in enumerate(layers[:-1]):
            if layer.semi_infinite:
                raise ValidationError(
                    f"layer {i} is semi-infinite but is not the last layer")
        if not layers[-1].semi_infinite:
            raise ValidationError("the last layer must be semi-infinite")

    @classmethod
    def half_space(cls, youngs_modulus: float, poissons_ratio: float) -> "PavementStructure":
        return cls((ElasticLayer(None, youngs_modulus, poissons_ratio),))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def total_finite_thickness(self) -> float:
        return sum(l.thickness for l in self.layers if not l.semi_infinite)

    def with_layer_modulus(self, index: int, youngs_modulus: float) -> "PavementStructure":
        """A copy differing only in layer ``index``'s modulus (pascals)."""
        if not 0 <= index < len(self.layers):
            raise ValidationError(
                f"layer index {index} out of range for {len(self.layers)} layers")
        new = list(self.layers)
        new[index] = replace(new[index], youngs_modulus=youngs_modulus)
        return PavementStructure(tuple(new))

    def fingerprint(self) -> str:
        """Short stable id of the mechanical parameters (provenance tag)."""
        parts = []
        for l in self.layers:
            t = "inf" if l.semi_infinite else repr(l.thickness)
            parts.append(f"{t}:{l.youngs_modulus!r}:{l.poissons_ratio!r}:{l.bond}")
        digest = hashlib.sha256("|".join(parts).encode()).hexdigest()
        return digest[:12]


@dataclass(frozen=True)
class CircularLoad:
    """Uniform vertical pressure over a circular surface area.

    ``pressure`` may be zero (the degenerate no-load case used by linearity
    checks, which must evaluate to exactly zero deflection); the radius is
    always strictly positive so the contact geometry stays well defined.
    """

    pressure: float
    radius: float
    center: tuple[float, float] = field(default=(0.0, 0.0))

    def __post_init__(self):
        if not (math.isfinite(self.pressure) and self.pressure >= 0.0):
            raise ValidationError(
                f"pressure must be finite and nonnegative, got {self.pressure!r}")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValidationError(
                f"contact radius must be positive and finite, got {self.radius!r}")

    @property
    def total_force(self) -> float:
        return self.pressure * math.pi * self.radius ** 2
