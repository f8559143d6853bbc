"""Independent reference solvers used to verify the main path.

These share no oracle or learner code with the cone solvers, so agreement
between the two is evidence rather than tautology.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]


@dataclass
class BaselineResult:
    value: float
    certificate: object
    iterations: int
    gap: float | None = None


@njit(cache=True)
def _bc_iterate(centers, radii, iters):
    n, d = centers.shape
    c = centers[0].copy()
    for t in range(1, iters + 1):
        far_i = 0
        far_v = -1.0
        for i in range(n):
            s = 0.0
            for j in range(d):
                diff = c[j] - centers[i, j]
                s += diff * diff
            v = math.sqrt(s) + radii[i]
            if v > far_v:
                far_v = v
                far_i = i
        s = 0.0
        for j in range(d):
            diff = centers[far_i, j] - c[j]
            s += diff * diff
        dist = math.sqrt(s)
        step = 1.0 / (t + 1.0)
        if dist > 0.0:
            scale = 1.0 + radii[far_i] / dist
            for j in range(d):
                c[j] += step * scale * (centers[far_i, j] - c[j])
        # if the farthest center coincides with c, only its own radius
        # matters and no move helps
    return c


def meb_baseline(points, radii=None, eps_base: float = 1e-3) -> BaselineResult:
    """Core-set style iteration for the minimum enclosing ball of spheres:
    walk 1/(t+1) of the way toward the far side of the currently farthest
    sphere, for ceil(1/eps_base^2) steps.  Returns the certified covering
    radius at the final center, a (1 + eps_base)-approximation."""
    if not 0.0 < eps_base <= 0.1:
        raise ValueError("eps_base must be in (0, 0.1]")
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("points must be (n, d)")
    if radii is None:
        rad = np.zeros(pts.shape[0])
    else:
        rad = np.ascontiguousarray(radii, dtype=np.float64)
    if pts.shape[0] == 1:
        return BaselineResult(value=float(rad[0]), certificate=pts[0].copy(),
                              iterations=0)
    iters = math.ceil(1.0 / eps_base ** 2)
    c = _bc_iterate(pts, rad, iters)
    value = float((np.linalg.norm(pts - c, axis=1) + rad).max())
    return BaselineResult(value=value, certificate=np.asarray(c), iterations=iters)


@njit(cache=True)
def _gilbert_iterate(P, Q, gap_tol, max_iters):
    n1, d = P.shape
    n2 = Q.shape[0]
    mu = np.zeros(n1)
    gam = np.zeros(n2)
    mu[0] = 1.0
    gam[0] = 1.0
    z = np.empty(d)
    for k in range(d):
        z[k] = P[0, k] - Q[0, k]

    gap = math.inf
    it = 0
    for it in range(1, max_iters + 1):
        # linearized objective: pick the single best vertex on each simplex
        best_i = 0
        best_pi = math.inf
        for i in range(n1):
            s = 0.0
            for k in range(d):
                s += P[i, k] * z[k]
            if s < best_pi:
                best_pi = s
                best_i = i
        best_j = 0
        best_qj = -math.inf
        for j in range(n2):
            s = 0.0
            for k in range(d):
                s += Q[j, k] * z[k]
            if s > best_qj:
                best_qj = s
                best_j = j
        zdiff = 0.0
        denom = 0.0
        for k in range(d):
            dk = (P[best_i, k] - Q[best_j, k]) - z[k]
            zdiff += z[k] * dk
            denom += dk * dk
        gap = -2.0 * zdiff
        if gap < gap_tol:
            break
        if denom == 0.0:
            break
        lam = -zdiff / denom
        if lam > 1.0:
            lam = 1.0
        if lam <= 0.0:
            break
        for i in range(n1):
            mu[i] *= 1.0 - lam
        for j in range(n2):
            gam[j] *= 1.0 - lam
        mu[best_i] += lam
        gam[best_j] += lam
        for k in range(d):
            z[k] += lam * ((P[best_i, k] - Q[best_j, k]) - z[k])
    return mu, gam, z, gap, it


def gilbert_baseline(P, Q, gap_tol: float = 1e-6,
                     max_iters: int = 10 ** 6) -> BaselineResult:
    """Frank-Wolfe on min |P mu - Q gam|^2 over the product of simplices,
    with exact line search and the linearization gap as stopping rule.
    Hitting the iteration cap reports the achieved gap."""
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    mu, gam, z, gap, it = _gilbert_iterate(P, Q, gap_tol, max_iters)
    value = float(np.linalg.norm(z))
    return BaselineResult(value=value, certificate=(mu, gam), iterations=int(it),
                          gap=float(gap))
