"""Oscillatory quadrature for inverse Hankel deflection integrals.

Evaluates I(a, r) = Int_0^inf [F(m)/m] J1(m a) J0(m r) dm by substituting
u = m*s with s = max(a, r), so the faster-oscillating Bessel factor always
has argument u.  The u axis is partitioned at that factor's zeros, each
zero interval is integrated with fixed-order Gauss-Legendre panels, and the
alternating sequence of partial sums is accelerated with Wynn's epsilon
algorithm; convergence is two successive accelerated estimates agreeing to
the requested relative tolerance.  A geometric ladder of extra panel edges
resolves the kernel's transition band inside the early zero intervals,
where a single panel would straddle most of F's variation.

Offsets equal to the contact radius are the degenerate case: both Bessel
factors then oscillate at the same frequency, so intervals cut at one
factor's zeros hold a full period of the product and the terms stop
alternating.  Those members are partitioned at the merged (interleaved)
zeros of J0 and J1 instead, and their partial sums are accelerated on a
power-of-two prefix ladder: the product's asymptotics leave an algebraic
drift on top of the alternation, and sampling at geometrically spaced
prefixes turns every drift component into a geometric one, which the
epsilon table removes exactly.

The ladder is a fixed geometric family (anchored at u = 1, cut off below
LADDER_LO where the integrand weight is negligible), so the panel layout is
a pure function of the fast factor alone.  Members of a batch share the
layout while keeping their own kernel argument u/s and slow factor, and
every member's accelerated estimate is a pure function of its own prefix of
zero-interval terms.  Together this makes each integral's value bitwise
independent of batch composition, of how far the shared layout extends, and
of which other offsets are evaluated alongside it; the profile simulator
and the inverse solver rely on exactly this property to evaluate sensor
subsets against full-profile results.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import bessel
from .errors import HankelConvergenceError, ValidationError

__all__ = ["HankelResult", "hankel_integrate", "hankel_integrate_many"]

GAUSS_ORDER = 12
MIN_INTERVALS = 8          # accelerated estimates compared from this depth on
DEPTH_CAP = 16             # deepest epsilon column used
LADDER_RATIO = 1.4         # geometric spacing of the refinement edges
LADDER_LO = 1e-3           # below this u the integrand weight is negligible
START_INTERVALS = 16
GROWTH = 1.6
TOL_RANGE = (1e-12, 1e-4)
DEFAULT_BUDGET = 20000

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(GAUSS_ORDER)


@dataclass(frozen=True)
class HankelResult:
    value: float
    evaluations: int
    intervals: int
    converged: bool


def _accelerated_diagonals(partials):
    """Wynn epsilon diagonal estimates for each prefix of partial sums.

    partials: (members, K) array of cumulative sums.  Returns (diag, valid)
    of the same shape; diag[:, k] is the deepest finite even-column epsilon
    estimate using partial sums 0..k only, valid marks finite entries.
    Exact for geometric sequences from the second even column on.
    """
    p = np.asarray(partials, dtype=np.float64)
    n_mem, n_k = p.shape
    diag = p.copy()
    valid = np.isfinite(p)
    prev2 = np.zeros((n_mem, n_k + 1))
    prev2_ok = np.ones((n_mem, n_k + 1), dtype=bool)
    prev = p
    prev_ok = valid.copy()
    for c in range(1, min(n_k, DEPTH_CAP + 1)):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            cur = prev2[:, 1:-1] + 1.0 / (prev[:, 1:] - prev[:, :-1])
        cur_ok = (prev2_ok[:, 1:-1] & prev_ok[:, 1:] & prev_ok[:, :-1]
                  & np.isfinite(cur))
        if c % 2 == 0:
            diag[:, c:] = np.where(cur_ok, cur, diag[:, c:])
        prev2, prev2_ok = prev, prev_ok
        prev, prev_ok = cur, cur_ok
    return diag, valid


def _ladder_points(u_hi):
    """The fixed geometric edge family LADDER_RATIO**j inside (LADDER_LO, u_hi).

    Anchored at u = 1 and independent of every other input, so any two
    integrals subdivide a given zero interval identically.
    """
    j_lo = int(math.floor(math.log(LADDER_LO) / math.log(LADDER_RATIO))) + 1
    j_hi = int(math.ceil(math.log(u_hi) / math.log(LADDER_RATIO)))
    pts = LADDER_RATIO ** np.arange(j_lo, j_hi + 1, dtype=np.float64)
    return pts[(pts > LADDER_LO) & (pts < u_hi)]


def _merged_zeros(n):
    """First n members of the interleaved J0 and J1 zero sequence."""
    half = n // 2 + 1
    pairs = np.column_stack((np.asarray(bessel.j0_zeros(half)),
                             np.asarray(bessel.j1_zeros(half))))
    return pairs.ravel()[:n]


_EDGE_BASE = 8


def _edge_nodes(n_terms):
    """Term indices 8*2^i - 1 available within the first n_terms terms.

    Odd indices, so each sampled partial sum closes a whole period of the
    J0*J1 product; doubling indices make the remaining error components
    geometric along the ladder.
    """
    out = []
    k = _EDGE_BASE
    while k <= n_terms:
        out.append(k - 1)
        k *= 2
    return np.asarray(out, dtype=np.int64)


def _panel_layout(fast, n_intervals):
    """Panel edges and owning zero-interval ids, a pure function of inputs.

    Growing n_intervals only appends panels; existing edges are unchanged,
    which keeps every member's prefix of terms stable across block growth.
    """
    if fast == "j01":
        zeros = _merged_zeros(n_intervals)
    else:
        zeros_fn = bessel.j0_zeros if fast == "j0" else bessel.j1_zeros
        zeros = np.asarray(zeros_fn(n_intervals))
    edges = np.concatenate(([0.0], zeros))
    pts = _ladder_points(zeros[-1])
    # drop ladder points that essentially coincide with a zero edge
    place = np.searchsorted(edges, pts)
    gap = np.minimum(np.abs(pts - edges[place.clip(0, edges.size - 1)]),
                     np.abs(pts - edges[place - 1]))
    pts = pts[gap > 1e-9 * pts]
    edges = np.sort(np.concatenate((edges, pts)))
    ids = np.searchsorted(zeros, edges[:-1], side="right")
    return edges, ids


def _integrate_group(kernel, s, rho, fast, tol, max_evaluations):
    """Batched integral of F(u/s) J_slow(u rho) J_fast(u) / u over u > 0.

    kernel must map positive wavenumber arrays to values of the same shape.
    Returns (values, evaluations, intervals) arrays over members.  Raises
    HankelConvergenceError for the first member whose accelerated estimates
    fail to agree within the evaluation budget.
    """
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    rho = np.atleast_1d(np.asarray(rho, dtype=np.float64))
    n_mem = s.size
    if fast == "j01":
        # r == a: the whole oscillation lives in the shared factor and the
        # per-member slow factor degenerates to one
        fast_fn = lambda u: bessel.j0(u) * bessel.j1(u)
        slow_fn = np.ones_like
    elif fast == "j0":
        fast_fn, slow_fn = bessel.j0, bessel.j1
    else:
        fast_fn, slow_fn = bessel.j1, bessel.j0

    terms = np.empty((n_mem, 0))
    evals_after = np.empty(0, dtype=np.int64)  # kernel evals through interval k
    n_done = 0
    target = START_INTERVALS
    values = np.zeros(n_mem)
    evaluations = np.zeros(n_mem, dtype=np.int64)
    intervals_used = np.zeros(n_mem, dtype=np.int64)
    accepted = np.zeros(n_mem, dtype=bool)

    while True:
        edges, ids = _panel_layout(fast, target)
        panel_count = np.bincount(ids, minlength=target)
        cum_evals = GAUSS_ORDER * np.cumsum(panel_count)
        # trim the block so the per-member budget is never exceeded
        fit = int(np.searchsorted(cum_evals, max_evaluations, side="right"))
        if fit < target:
            if fit <= n_done:
                break
            target = fit
            edges, ids = _panel_layout(fast, target)
            cum_evals = cum_evals[:target]
        new = ids >= n_done
        lo_e = edges[:-1][new]
        hi_e = edges[1:][new]
        new_ids = ids[new]
        half = 0.5 * (hi_e - lo_e)
        mid = 0.5 * (hi_e + lo_e)
        u = (mid[:, None] + half[:, None] * _GAUSS_X[None, :]).ravel()
        wt = (half[:, None] * _GAUSS_W[None, :]).ravel()
        shared = fast_fn(u) * wt / u
        f_vals = kernel(u[None, :] / s[:, None])
        slow = slow_fn(u[None, :] * rho[:, None])
        contrib = (f_vals * slow * shared[None, :]).reshape(
            n_mem, lo_e.size, GAUSS_ORDER).sum(axis=2)
        starts = np.searchsorted(new_ids, np.arange(n_done, target))
        terms = np.hstack((terms, np.add.reduceat(contrib, starts, axis=1)))
        evals_after = cum_evals
        n_done = target

        partials = np.cumsum(terms, axis=1)
        if fast == "j01":
            nodes = _edge_nodes(n_done)
            diag, valid = _accelerated_diagonals(partials[:, nodes])
            evals_for = evals_after[nodes]
            intervals_for = nodes + 1
            min_cmp = 2
        else:
            diag, valid = _accelerated_diagonals(partials)
            evals_for = evals_after
            intervals_for = np.arange(1, n_done + 1)
            min_cmp = MIN_INTERVALS - 1
        ok = valid[:, 1:] & valid[:, :-1]
        delta = np.abs(diag[:, 1:] - diag[:, :-1])
        scale = np.maximum(np.abs(diag[:, 1:]), 1e-300)
        agree = ok & (delta <= tol * scale)
        agree[:, :min_cmp] = False
        hit = agree.any(axis=1)
        first = np.argmax(agree, axis=1)
        newly = hit & ~accepted
        if np.any(newly):
            k_acc = first[newly] + 1
            rows = np.nonzero(newly)[0]
            values[rows] = diag[rows, k_acc]
            evaluations[rows] = evals_for[k_acc]
            intervals_used[rows] = intervals_for[k_acc]
            accepted[rows] = True
        if accepted.all():
            return values, evaluations, intervals_used
        target = int(math.ceil(target * GROWTH)) + 2

    bad = int(np.nonzero(~accepted)[0][0])
    if n_done > 0:
        partial = float(diag[bad, -1]) if diag.shape[1] else float(partials[bad, -1])
        spent = int(evals_after[n_done - 1])
    else:
        # budget too small for even one full oscillation interval: spend it
        # on the leading subpanels so the report still carries an estimate
        edges, _ = _panel_layout(fast, 1)
        n_sub = min(max_evaluations // GAUSS_ORDER, edges.size - 1)
        lo_e = edges[:n_sub]
        hi_e = edges[1:n_sub + 1]
        half = 0.5 * (hi_e - lo_e)
        mid = 0.5 * (hi_e + lo_e)
        u = (mid[:, None] + half[:, None] * _GAUSS_X[None, :]).ravel()
        wt = (half[:, None] * _GAUSS_W[None, :]).ravel()
        shared = fast_fn(u) * wt / u
        f_vals = kernel(u[None, :] / s[bad:bad + 1, None])
        slow = slow_fn(u[None, :] * rho[bad:bad + 1, None])
        partial = float((f_vals * slow * shared[None, :]).sum())
        spent = GAUSS_ORDER * n_sub
    raise HankelConvergenceError(
        f"oscillatory integral did not converge within {max_evaluations} "
        f"kernel evaluations (member s = {s[bad]:g} m)",
        partial_estimate=partial, evaluations=spent)


def hankel_integrate(kernel, a, r, tol=1e-8,
                     max_evaluations=DEFAULT_BUDGET) -> HankelResult:
    """Integral of [F(m)/m] J1(m a) J0(m r) over m > 0.

    kernel: callable (sampled tables are callable) mapping positive
    wavenumber arrays to kernel values, shape preserved.
    """
    if not (np.isfinite(a) and a > 0.0):
        raise ValidationError("contact radius must be positive and finite")
    if not (np.isfinite(r) and r >= 0.0):
        raise ValidationError("offset must be non-negative and finite")
    if not (TOL_RANGE[0] <= tol <= TOL_RANGE[1]):
        raise ValidationError(
            f"quadrature tolerance must lie in [{TOL_RANGE[0]:g}, "
            f"{TOL_RANGE[1]:g}], got {tol:g}")
    if max_evaluations < GAUSS_ORDER:
        raise ValidationError("evaluation budget below one quadrature panel")
    s = max(a, r)
    if r == a:
        fast, rho = "j01", 1.0
    elif r > a:
        fast, rho = "j0", a / s
    else:
        fast, rho = "j1", r / s
    values, evals, n_int = _integrate_group(
        kernel, np.array([s]), np.array([rho]), fast, tol, max_evaluations)
    return HankelResult(value=float(values[0]), evaluations=int(evals[0]),
                        intervals=int(n_int[0]), converged=True)


def hankel_integrate_many(kernel, a, r, tol=1e-8,
                          max_evaluations=DEFAULT_BUDGET) -> np.ndarray:
    """Deflection integral for one contact radius at many offsets.

    Offsets are grouped by which Bessel factor oscillates faster and each
    group is evaluated with the shared panel family, so out[i] is bitwise
    equal to hankel_integrate(kernel, a, r[i], ...).value.
    """
    if not (np.isfinite(a) and a > 0.0):
        raise ValidationError("contact radius must be positive and finite")
    r = np.asarray(r, dtype=np.float64)
    if r.size == 0:
        return np.zeros(r.shape)
    if not np.all(np.isfinite(r) & (r >= 0.0)):
        raise ValidationError("offsets must be non-negative and finite")
    if not (TOL_RANGE[0] <= tol <= TOL_RANGE[1]):
        raise ValidationError(
            f"quadrature tolerance must lie in [{TOL_RANGE[0]:g}, "
            f"{TOL_RANGE[1]:g}], got {tol:g}")
    if max_evaluations < GAUSS_ORDER:
        raise ValidationError("evaluation budget below one quadrature panel")
    flat = r.ravel()
    out = np.empty(flat.shape)
    far = flat > a
    if far.any():
        s = flat[far]
        vals, _, _ = _integrate_group(kernel, s, a / s, "j0", tol,
                                      max_evaluations)
        out[far] = vals
    near = flat < a
    if near.any():
        s = np.full(int(near.sum()), a)
        vals, _, _ = _integrate_group(kernel, s, flat[near] / a, "j1", tol,
                                      max_evaluations)
        out[near] = vals
    edge = flat == a
    if edge.any():
        s = np.full(int(edge.sum()), a)
        vals, _, _ = _integrate_group(kernel, s, np.ones(s.size), "j01", tol,
                                      max_evaluations)
        out[edge] = vals
    return out.reshape(r.shape)
