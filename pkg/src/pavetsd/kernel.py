"""Per-wavenumber layered elastic solve and the sampled surface kernel.

Formulation
-----------
Axisymmetric elasticity via a biharmonic strain potential.  Writing the
potential of layer ``i`` at wavenumber ``m`` as

    phi_i(z) = (A_i + B_i * m*(z - z_top)) * exp(-m*(z - z_top))
             + (C_i + D_i * m*(z - z_bot)) * exp(+m*(z - z_bot))

anchors the decaying exponential at the layer's top and the growing one at
its bottom, so every matrix entry is bounded by a polynomial in m*h and the
assembly cannot overflow no matter how large m*h grows (naive transfer
matrices blow up near m*h ~ 700).  With scaled coefficients the transformed
field quantities reduce to dimensionless combinations of the four basis
functions and their first three derivatives:

    normal stress   sigma ~ (1-nu)*phi''' - (2-nu)*phi'
    shear stress    tau   ~ nu*phi'' + (1-nu)*phi
    vertical displ. w     ~ [(1-2nu)*phi'' - 2(1-nu)*phi] / (2G)
    radial displ.   u     ~ phi' / (2G)

The boundary-value problem per wavenumber: unit normal traction and zero
shear at the surface, continuity of (w, u, sigma, tau) at every bonded
interface, decay at depth (the semi-infinite layer keeps only A, B).  The
surface kernel is

    F(m) = w-row(layer 0, surface) . x

with x the coefficient vector, and the deflection under a uniform circular
pressure follows as  w(r) = p*a * Int [F(m)/m] J1(m*a) J0(m*r) dm.

For a homogeneous half-space this reduces to F = 2(1-nu^2)/E for every m,
which is the anchor oracle used throughout the tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelConditioningError, ValidationError
from .layers import PavementStructure

__all__ = [
    "surface_response_kernel",
    "kernel_values",
    "SurfaceKernelSamples",
]


def _decaying_blocks(zeta):
    """Basis rows (phi, phi', phi'', phi''') for (A + B*zeta)*exp(-zeta)."""
    e = np.exp(-zeta)
    ze = zeta * e
    return (
        (e, ze),
        (-e, e - ze),
        (e, ze - 2.0 * e),
        (-e, 3.0 * e - ze),
    )


def _growing_blocks(zeta):
    """Basis rows for (C + D*zeta)*exp(+zeta), evaluated at zeta <= 0."""
    g = np.exp(zeta)
    zg = zeta * g
    return (
        (g, zg),
        (g, g + zg),
        (g, 2.0 * g + zg),
        (g, 3.0 * g + zg),
    )


def _field_rows(layer, phi, dphi, d2phi, d3phi):
    """(sigma, tau, w, u) row blocks from the stacked basis rows.

    The w and u rows carry the 1/(2G) material factor; callers that only
    need continuity may rescale them freely (scaling an equation does not
    change the solution).
    """
    nu = layer.poissons_ratio
    two_g = 2.0 * layer.shear_modulus
    sigma = tuple((1.0 - nu) * a3 - (2.0 - nu) * a1 for a3, a1 in zip(d3phi, dphi))
    tau = tuple(nu * a2 + (1.0 - nu) * a0 for a2, a0 in zip(d2phi, phi))
    w = tuple(((1.0 - 2.0 * nu) * a2 - 2.0 * (1.0 - nu) * a0) / two_g
              for a2, a0 in zip(d2phi, phi))
    u = tuple(a1 / two_g for a1 in dphi)
    return sigma, tau, w, u


def _layer_rows_at(layer, m, location):
    """Stacked (sigma, tau, w, u) blocks for one layer at 'top' or 'bottom'.

    Returns four lists of per-column arrays; finite layers contribute four
    columns (A, B, C, D), the semi-infinite layer two (A, B).
    """
    zeros = np.zeros_like(m)
    if layer.semi_infinite:
        assert location == "top", "semi-infinite layer has no bottom interface"
        dec = _decaying_blocks(zeros)
        phi = [dec[0][0], dec[0][1]]
        dphi = [dec[1][0], dec[1][1]]
        d2 = [dec[2][0], dec[2][1]]
        d3 = [dec[3][0], dec[3][1]]
    else:
        t = m * layer.thickness
        if location == "top":
            dec = _decaying_blocks(zeros)
            gro = _growing_blocks(-t)
        else:
            dec = _decaying_blocks(t)
            gro = _growing_blocks(zeros)
        phi = [dec[0][0], dec[0][1], gro[0][0], gro[0][1]]
        dphi = [dec[1][0], dec[1][1], gro[1][0], gro[1][1]]
        d2 = [dec[2][0], dec[2][1], gro[2][0], gro[2][1]]
        d3 = [dec[3][0], dec[3][1], gro[3][0], gro[3][1]]
    return _field_rows(layer, phi, dphi, d2, d3)


def kernel_values(structure: PavementStructure, m) -> np.ndarray:
    """Surface response kernel F(m) (1/Pa) for an array of wavenumbers.

    Assembles and solves the per-wavenumber layer system in one batched
    call; see the module docstring for the formulation.
    """
    m = np.atleast_1d(np.asarray(m, dtype=np.float64))
    if m.size == 0:
        return np.empty(0)
    if not np.all(np.isfinite(m)) or np.any(m <= 0.0):
        raise ValidationError("wavenumbers must be finite and positive")

    layers = structure.layers
    n = len(layers)
    nm = m.size
    size = 4 * (n - 1) + 2
    a_mat = np.zeros((nm, size, size))
    rhs = np.zeros((nm, size))
    rhs[:, 0] = -1.0

    def put(row, col0, block):
        for j, col in enumerate(block):
            a_mat[:, row, col0 + j] += col

    def put_neg(row, col0, block):
        for j, col in enumerate(block):
            a_mat[:, row, col0 + j] -= col

    # surface: unit normal traction, zero shear
    sigma, tau, w_top, _ = _layer_rows_at(layers[0], m, "top")
    put(0, 0, sigma)
    put(1, 0, tau)

    # bonded interfaces: continuity of w, u, sigma, tau.  The displacement
    # rows are rescaled to O(1) so partial pivoting sees balanced equations.
    for j in range(n - 1):
        upper, lower = layers[j], layers[j + 1]
        row = 2 + 4 * j
        s_u, t_u, w_u, u_u = _layer_rows_at(upper, m, "bottom")
        s_l, t_l, w_l, u_l = _layer_rows_at(lower, m, "top")
        scale = 2.0 * max(upper.shear_modulus, lower.shear_modulus)
        w_u = [scale * c for c in w_u]
        u_u = [scale * c for c in u_u]
        w_l = [scale * c for c in w_l]
        u_l = [scale * c for c in u_l]
        cu, cl = 4 * j, 4 * (j + 1)
        put(row, cu, w_u)
        put_neg(row, cl, w_l)
        put(row + 1, cu, u_u)
        put_neg(row + 1, cl, u_l)
        put(row + 2, cu, s_u)
        put_neg(row + 2, cl, s_l)
        put(row + 3, cu, t_u)
        put_neg(row + 3, cl, t_l)

    try:
        x = np.linalg.solve(a_mat, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        bad = _first_singular(a_mat, m)
        raise KernelConditioningError(
            f"singular layer system at m = {bad:g} 1/m for structure "
            f"{structure.fingerprint()}",
            wavenumber=bad, structure_id=structure.fingerprint()) from None

    f = np.zeros(nm)
    for j, col in enumerate(w_top):
        f += col * x[:, j]

    if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
        bad = float(m[np.nonzero(~np.isfinite(f) | (f <= 0.0))[0][0]])
        raise KernelConditioningError(
            f"kernel evaluation lost positivity/finiteness at m = {bad:g} 1/m "
            f"for structure {structure.fingerprint()}",
            wavenumber=bad, structure_id=structure.fingerprint())
    return f


def _first_singular(a_mat, m):
    for i in range(a_mat.shape[0]):
        try:
            np.linalg.solve(a_mat[i], np.zeros(a_mat.shape[1]))
        except np.linalg.LinAlgError:
            return float(m[i])
    return float(m[0])


def surface_response_kernel(structure: PavementStructure, m: float) -> float:
    """F(m) for a single wavenumber m > 0 (1/Pa)."""
    if np.ndim(m) != 0:
        raise ValidationError("surface_response_kernel takes a scalar wavenumber")
    return float(kernel_values(structure, np.array([float(m)]))[0])


# Sampling nodes live on one shared geometric family so that tables
# requested for different radius sets still agree wherever they overlap.
NODES_PER_DECADE = 256
_LN_STEP = math.log(10.0) / NODES_PER_DECADE

# Every radius-derived table at least covers this band (1/m), aligning the
# end nodes (and hence the out-of-range clamp values) across tables.
_SHARED_BAND_LO = 1e-6
_SHARED_BAND_HI = 1e5


@dataclass(frozen=True, eq=False)
class SurfaceKernelSamples:
    """F(m) sampled on a uniform log-wavenumber grid, with interpolation.

    The kernel is load-independent, so one sampled table per structure
    serves every (contact radius, offset) evaluation of the sweep.
    Interpolation is cubic Hermite in (ln m, ln F) with fourth-order
    finite-difference slopes; outside the sampled span the kernel is
    clamped to its end values (both ends are asymptotic plateaus).
    Node positions come from a fixed global family (see ``sample``), so
    two tables whose spans overlap share nodes on the overlap.
    Instances are immutable and safe to share across workers.
    """

    structure_id: str
    wavenumbers: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values <= 0.0) or not np.all(np.isfinite(self.values)):
            raise KernelConditioningError(
                "sampled kernel must be positive and finite",
                structure_id=self.structure_id)
        ln_m = np.log(self.wavenumbers)
        ln_f = np.log(self.values)
        slopes = np.empty_like(ln_f)
        slopes[2:-2] = (ln_f[:-4] - 8.0 * ln_f[1:-3]
                        + 8.0 * ln_f[3:-1] - ln_f[4:]) / 12.0
        slopes[1] = 0.5 * (ln_f[2] - ln_f[0])
        slopes[-2] = 0.5 * (ln_f[-1] - ln_f[-3])
        slopes[0] = -1.5 * ln_f[0] + 2.0 * ln_f[1] - 0.5 * ln_f[2]
        slopes[-1] = 1.5 * ln_f[-1] - 2.0 * ln_f[-2] + 0.5 * ln_f[-3]
        # recover the family index of the first node; nodes sit at
        # exp(k * _LN_STEP), so the rounding below is exact
        object.__setattr__(self, "_k_lo", int(round(ln_m[0] / _LN_STEP)))
        object.__setattr__(self, "_ln_f", ln_f)
        object.__setattr__(self, "_slopes", slopes)
        for arr in (self.wavenumbers, self.values, ln_f, slopes):
            arr.setflags(write=False)

    @classmethod
    def sample(cls, structure: PavementStructure, m_lo: float,
               m_hi: float) -> "SurfaceKernelSamples":
        if not (0.0 < m_lo < m_hi):
            raise ValidationError("need 0 < m_lo < m_hi for kernel sampling")
        # Nodes come from one global geometric family (anchor m = 1, fixed
        # ratio) rounded outward to cover the request, so tables built for
        # overlapping spans share node positions exactly and interpolate
        # to matching values regardless of which radii requested them.
        k_lo = math.floor(math.log(m_lo) / _LN_STEP)
        k_hi = math.ceil(math.log(m_hi) / _LN_STEP)
        if k_hi - k_lo + 1 < 400:
            raise ValidationError("kernel table needs at least 400 nodes")
        m = np.exp(np.arange(k_lo, k_hi + 1) * _LN_STEP)
        f = kernel_values(structure, m)
        return cls(structure.fingerprint(), m, f)

    @classmethod
    def for_contact_radii(cls, structure: PavementStructure,
                          radii) -> "SurfaceKernelSamples":
        """Sampled kernel spanning m*a in [1e-6, 1e4] for every radius given.

        The span is widened to a shared absolute band so that tables built
        for different radius sets put their first node at the same family
        position; quadrature refinement that dips below the sampled range
        then clamps to an identical plateau value no matter which radii the
        table was requested for.
        """
        a_min = min(radii)
        a_max = max(radii)
        if not (0.0 < a_min <= a_max):
            raise ValidationError("contact radii must be positive")
        return cls.sample(structure, min(1e-6 / a_max, _SHARED_BAND_LO),
                          max(1e4 / a_min, _SHARED_BAND_HI))

    def evaluate(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=np.float64)
        # node-space coordinate relative to the global family anchor, so
        # tables with different spans interpolate bit-identically on the
        # interior of their overlap
        g = np.log(np.clip(m, self.wavenumbers[0], self.wavenumbers[-1]))
        g = g * (1.0 / _LN_STEP)
        i = np.clip(np.floor(g).astype(np.int64) - self._k_lo,
                    0, self._ln_f.size - 2)
        xi = g - (i + self._k_lo)
        xi2 = xi * xi
        xi3 = xi2 * xi
        h00 = 2.0 * xi3 - 3.0 * xi2 + 1.0
        h10 = xi3 - 2.0 * xi2 + xi
        h01 = 3.0 * xi2 - 2.0 * xi3
        h11 = xi3 - xi2
        ln_f = (h00 * self._ln_f[i] + h10 * self._slopes[i]
                + h01 * self._ln_f[i + 1] + h11 * self._slopes[i + 1])
        return np.exp(ln_f)

    __call__ = evaluate
