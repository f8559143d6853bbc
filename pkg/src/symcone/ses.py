"""Smallest enclosing sphere of a set of spheres, solved as a feasibility
search over a product of second-order cones.

The first input sphere plays the easy-constraint role: the oracle optimizes
a linear function over the ball of centers that keep sphere 1 enclosed at
radius alpha, which has a closed form.  The remaining n-1 spheres supply the
hard constraints and the n-1 cone blocks.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import meta
from ._reduce import part_sum
from .cones import SQRT2, Cone, Element, SecondOrder
from .meta import (EarlyStopConfig, OracleSpec, Orientation, Separated,
                   SolveReport, Witness)


@dataclass(frozen=True)
class SesInstance:
    """n spheres: centers (n, d), nonnegative radii (n,)."""

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        r = np.asarray(self.radii, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 2 or c.shape[1] < 1:
            raise ValueError("centers must be (n, d) with n >= 2, d >= 1")
        if r.shape != (c.shape[0],):
            raise ValueError("radii must have one entry per center")
        if not (np.isfinite(c).all() and np.isfinite(r).all()):
            raise ValueError("instance coordinates must be finite")
        if (r < 0).any():
            raise ValueError("radii must be nonnegative")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class SesSolution:
    center: np.ndarray
    radius: float
    enclosure_slack: float


def ses_cone(n: int, d: int) -> Cone:
    return Cone(tuple(SecondOrder(d) for _ in range(n - 1)))


def ses_range(inst: SesInstance) -> tuple[float, float, float]:
    """D = max_i>=2 (|v1 - vi| + g1 + gi); the optimal radius lies in
    [D/2, D]: a sphere of radius D centered at v1 encloses everything, and
    the farthest input pair forces at least D/2."""
    v1 = inst.centers[0]
    dists = np.linalg.norm(inst.centers[1:] - v1, axis=1)
    D = float((dists + inst.radii[0] + inst.radii[1:]).max())
    return D, D / 2.0, D


def ses_width(inst: SesInstance, alpha: float) -> float:
    """Uniform residual width bound 3 D / sqrt2, valid while alpha <= D."""
    D, _, _ = ses_range(inst)
    assert alpha <= D * (1.0 + 1e-9), "width bound requires alpha <= D"
    return 3.0 * D / SQRT2


def ses_progress(inst: SesInstance, u_bar: np.ndarray) -> float:
    """Certified enclosing radius at center u_bar: always an upper bound on
    the optimum."""
    diff = inst.centers - u_bar
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float((dist + inst.radii).max())


def ses_oracle(inst: SesInstance, p: Element, alpha: float,
               parts: int = 1, out: np.ndarray | None = None
               ) -> Separated | Witness:
    """Closed-form linear maximization over {gamma <= alpha,
    |u - v1| <= gamma - gamma_1}: the level binds at gamma = alpha and the
    ball constraint is met by moving alpha - gamma_1 along the aggregated
    block direction.

    ``out`` optionally supplies a reusable residual buffer; callers passing
    it must consume the witness before the next query.
    """
    v1 = inst.centers[0]
    g1 = float(inst.radii[0])
    if alpha < g1:
        # no center keeps sphere 1 enclosed at radius alpha
        return Separated(oracle_value=-math.inf)

    d = inst.d
    k = inst.n - 1
    P = p.coords.reshape(k, d + 1)
    W = P[:, :d]
    sig = P[:, d]
    s = np.asarray(part_sum(W, parts=parts, axis=0))
    s_norm = float(np.linalg.norm(s))
    if s_norm > 0.0:
        u = v1 + (alpha - g1) * (s / s_norm)
    else:
        u = v1.copy()

    V2 = inst.centers[1:]
    g2 = inst.radii[1:]
    lin = float(part_sum(np.einsum("ij,ij->i", V2, W), parts=parts))
    rad_term = float(part_sum(g2 * sig, parts=parts))
    value = float(s @ u) + alpha / SQRT2 - lin - rad_term
    if value < 0.0:
        return Separated(oracle_value=value)

    flat = out if out is not None else np.empty(k * (d + 1))
    res = flat.reshape(k, d + 1)
    np.subtract(u, V2, out=res[:, :d])
    np.subtract(alpha, g2, out=res[:, d])
    y = np.concatenate([u, [alpha]])
    return Witness(y=y, residual=Element(p.cone, flat), oracle_value=value)


def solve_ses(inst: SesInstance, eps: float,
              config=None) -> tuple[SolveReport, SesSolution]:
    """(1+eps)-approximate smallest enclosing sphere with an enclosure
    certificate; the reported radius is the certified covering radius at the
    averaged center, never the looser theoretical bound."""
    from .config import RunConfig
    if config is None:
        config = RunConfig()
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")

    t0 = time.perf_counter()
    D, L0, U0 = ses_range(inst)
    d = inst.d

    if D == 0.0:
        # all spheres identical points with zero radius
        sol = SesSolution(center=inst.centers[0].copy(), radius=0.0,
                          enclosure_slack=0.0)
        report = SolveReport(primal_value=0.0, dual_value=0.0, payload=sol,
                             total_iterations=0, search_steps=0,
                             wall_time=time.perf_counter() - t0,
                             termination=meta.Termination.RANGE_CONVERGED)
        return report, sol

    cone_k = ses_cone(inst.n, d)
    rho = 3.0 * D / SQRT2
    parts = max(1, int(config.threads))
    res_buf = np.empty(cone_k.ambient_dim)

    def factory(alpha: float) -> OracleSpec:
        return OracleSpec(
            cone=cone_k, width_rho=rho, dual_dim=d + 1,
            query=lambda p, a: ses_oracle(inst, p, a, parts=parts, out=res_buf),
            trace_bound=SQRT2, orientation=Orientation.MAX)

    def progress(y_bar: np.ndarray) -> float:
        return ses_progress(inst, y_bar[:d])

    v1 = inst.centers[0]
    seed_f = ses_progress(inst, v1)
    seed_y = np.concatenate([v1, [seed_f]])

    stopping = EarlyStopConfig(delta=config.delta, patience=config.patience,
                               enabled=config.early_stop)
    search = meta.adaptive_search(factory, L0, U0, eps, stopping=stopping,
                                  progress=progress,
                                  cap=config.iteration_cap_override,
                                  initial_certificate=(seed_f, seed_y))

    center = search.best_y[:d].copy()
    radius = search.best_value
    slack = ses_progress(inst, center) - radius
    sol = SesSolution(center=center, radius=radius, enclosure_slack=slack)
    report = SolveReport(primal_value=search.lower, dual_value=radius,
                         payload=sol, total_iterations=search.total_iterations,
                         search_steps=search.search_steps,
                         wall_time=time.perf_counter() - t0,
                         termination=search.termination, steps=search.steps)
    return report, sol
