"""Surface deflection of a layered structure under a circular load.

w(r) = p * a * Int_0^inf [F(m)/m] J1(m a) J0(m r) dm, downward positive,
with F the structure's surface response kernel.  Pure function of its
arguments; pass a sampled kernel to amortize the layer solves when many
offsets are evaluated against one structure.
"""

import numpy as np

from .errors import ValidationError
from .hankel import DEFAULT_BUDGET, hankel_integrate
from .kernel import kernel_values
from .layers import CircularLoad, PavementStructure

__all__ = ["surface_deflection"]


def direct_kernel(structure: PavementStructure):
    """Shape-preserving kernel callable backed by per-call layer solves."""
    def evaluate(m):
        return kernel_values(structure, np.ravel(m)).reshape(np.shape(m))
    return evaluate


def surface_deflection(structure: PavementStructure, load: CircularLoad,
                       r: float, tol: float = 1e-8, kernel=None,
                       max_evaluations: int = DEFAULT_BUDGET) -> float:
    """Deflection in meters at horizontal distance r from the load axis.

    kernel: optional callable F(m) (e.g. a sampled kernel table); defaults
    to solving the layer system directly at every quadrature node.
    """
    if not isinstance(load, CircularLoad):
        raise ValidationError("load must be a CircularLoad")
    if load.pressure == 0.0:
        return 0.0
    if kernel is None:
        kernel = direct_kernel(structure)
    result = hankel_integrate(kernel, load.radius, r, tol=tol,
                              max_evaluations=max_evaluations)
    return load.pressure * load.radius * result.value
