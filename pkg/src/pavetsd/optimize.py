"""Bounded scalar minimization, golden-section steps with parabolic fits.

The classic bounded variant: the bracket [a, b] shrinks every iteration,
a parabola through the three best points proposes the next probe, and a
golden-section step is taken whenever the parabola is unhelpful (outside
the bracket, or not shrinking fast enough).  No derivatives needed, and
no dependency beyond the standard library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

__all__ = ["ScalarMinimum", "minimize_bounded"]

_GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
_SQRT_EPS = math.sqrt(2.220446049250313e-16)


@dataclass(frozen=True)
class ScalarMinimum:
    """Minimizer location and diagnostics from ``minimize_bounded``."""

    x: float
    fx: float
    iterations: int
    converged: bool


def minimize_bounded(fn, lower: float, upper: float, *,
                     xatol: float = 1e-3,
                     max_iterations: int = 200) -> ScalarMinimum:
    """Minimize ``fn`` on ``[lower, upper]`` to a position tolerance.

    Convergence means the remaining bracket pins the minimizer to within
    roughly ``xatol`` (plus a relative floor near machine precision).  If
    the iteration cap is hit first the best point so far is returned with
    ``converged`` False.
    """
    if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
        raise ValidationError("minimization needs finite bounds with "
                              "lower < upper")
    if not (xatol > 0.0):
        raise ValidationError("xatol must be positive")
    if max_iterations < 1:
        raise ValidationError("need at least one iteration")

    a, b = float(lower), float(upper)
    x = w = v = a + _GOLDEN * (b - a)
    fx = fw = fv = float(fn(x))
    d = e = 0.0

    for iteration in range(1, max_iterations + 1):
        midpoint = 0.5 * (a + b)
        tol1 = _SQRT_EPS * abs(x) + xatol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - midpoint) <= tol2 - 0.5 * (b - a):
            return ScalarMinimum(x=x, fx=fx, iterations=iteration,
                                 converged=True)

        use_golden = True
        if abs(e) > tol1:
            # fit a parabola through (x, w, v)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev, e = e, d
            if (abs(p) < abs(0.5 * q * e_prev) and p > q * (a - x)
                    and p < q * (b - x)):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if x < midpoint else -tol1
                use_golden = False
        if use_golden:
            e = (b - x) if x < midpoint else (a - x)
            d = _GOLDEN * e

        u = x + d if abs(d) >= tol1 else x + (tol1 if d > 0.0 else -tol1)
        fu = float(fn(u))

        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu

    return ScalarMinimum(x=x, fx=fx, iterations=max_iterations,
                         converged=False)
