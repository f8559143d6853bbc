"""Closed-form Euclidean Jordan algebra arithmetic over products of
nonnegative-orthant and second-order-cone blocks.

An element is one contiguous float64 vector laid out block by block.
Second-order blocks store the vector part first and the scalar component
last, so a block of vector dimension d occupies d+1 coordinates.  For
vectorized evaluation, consecutive blocks of the same kind (and, for
second-order blocks, the same dimension) are fused into a single "run"
that is processed with one set of array operations.

All operations are pure functions of their inputs; elements are treated
as immutable values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Orthant:
    """Nonnegative-orthant block of dimension ``dim`` (rank == dim)."""

    dim: int


@dataclass(frozen=True)
class SecondOrder:
    """Second-order-cone block with a vector part of dimension ``dim``.

    Occupies ``dim + 1`` coordinates and has rank 2.
    """

    dim: int


Block = Orthant | SecondOrder


@dataclass(frozen=True)
class Cone:
    """Shape of a symmetric cone: an ordered product of primitive blocks."""

    blocks: tuple[Block, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("cone needs at least one block")
        for b in self.blocks:
            if not isinstance(b, (Orthant, SecondOrder)):
                raise TypeError(f"unsupported block type: {b!r}")
            if b.dim < 1:
                raise ValueError(f"block dimension must be >= 1, got {b.dim}")

    @cached_property
    def ambient_dim(self) -> int:
        return sum(b.dim if isinstance(b, Orthant) else b.dim + 1 for b in self.blocks)

    @cached_property
    def rank(self) -> int:
        return sum(b.dim if isinstance(b, Orthant) else 2 for b in self.blocks)

    @cached_property
    def _runs(self) -> tuple[tuple, ...]:
        # ("o", start, stop) for fused orthant coordinates,
        # ("q", start, count, d) for `count` second-order blocks of equal d.
        runs = []
        pos = 0
        for b in self.blocks:
            if isinstance(b, Orthant):
                if runs and runs[-1][0] == "o" and runs[-1][2] == pos:
                    runs[-1] = ("o", runs[-1][1], pos + b.dim)
                else:
                    runs.append(("o", pos, pos + b.dim))
                pos += b.dim
            else:
                if runs and runs[-1][0] == "q" and runs[-1][3] == b.dim:
                    runs[-1] = ("q", runs[-1][1], runs[-1][2] + 1, b.dim)
                else:
                    runs.append(("q", pos, 1, b.dim))
                pos += b.dim + 1
        return tuple(tuple(r) for r in runs)


def cone(*blocks: Block) -> Cone:
    """Convenience constructor: ``cone(Orthant(3), SecondOrder(2))``."""
    return Cone(tuple(blocks))


@dataclass(frozen=True, eq=False)
class Element:
    """A point of the algebra underlying a :class:`Cone`."""

    cone: Cone
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.shape != (self.cone.ambient_dim,):
            raise ValueError(
                f"coords length {c.shape} != ambient dim ({self.cone.ambient_dim},)"
            )
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues paired with an idempotent frame, block by block."""

    eigenvalues: np.ndarray
    frame: tuple[Element, ...]


def _check_same_cone(x: Element, y: Element):
    if x.cone != y.cone:
        raise ValueError("cone mismatch between operands")


def identity(c: Cone) -> Element:
    out = np.zeros(c.ambient_dim)
    for run in c._runs:
        if run[0] == "o":
            out[run[1]:run[2]] = 1.0
        else:
            _, start, k, d = run
            out[start + d:start + k * (d + 1):d + 1] = SQRT2
    return Element(c, out)


def zeros(c: Cone) -> Element:
    return Element(c, np.zeros(c.ambient_dim))


def add(x: Element, y: Element) -> Element:
    _check_same_cone(x, y)
    return Element(x.cone, x.coords + y.coords)


def scale(x: Element, a: float) -> Element:
    return Element(x.cone, a * x.coords)


def axpy(a: float, x: Element, y: Element) -> Element:
    """a*x + y."""
    _check_same_cone(x, y)
    return Element(x.cone, a * x.coords + y.coords)


def jordan_mul(x: Element, y: Element) -> Element:
    """Jordan product: componentwise on orthant blocks, and
    (u; u0) o (v; v0) = ((v0 u + u0 v)/sqrt2; (u.v + u0 v0)/sqrt2) on
    second-order blocks."""
    _check_same_cone(x, y)
    xc, yc = x.coords, y.coords
    out = np.empty_like(xc)
    for run in x.cone._runs:
        if run[0] == "o":
            s = slice(run[1], run[2])
            np.multiply(xc[s], yc[s], out=out[s])
        else:
            _, start, k, d = run
            stop = start + k * (d + 1)
            X = xc[start:stop].reshape(k, d + 1)
            Y = yc[start:stop].reshape(k, d + 1)
            u, u0 = X[:, :d], X[:, d]
            v, v0 = Y[:, :d], Y[:, d]
            O = out[start:stop].reshape(k, d + 1)
            O[:, :d] = (v0[:, None] * u + u0[:, None] * v) / SQRT2
            O[:, d] = ((u * v).sum(axis=1) + u0 * v0) / SQRT2
    return Element(x.cone, out)


def trace(x: Element) -> float:
    """Coordinate sum on orthant blocks, sqrt2 * u0 on second-order blocks."""
    t = 0.0
    xc = x.coords
    for run in x.cone._runs:
        if run[0] == "o":
            t += float(xc[run[1]:run[2]].sum())
        else:
            _, start, k, d = run
            t += SQRT2 * float(xc[start + d:start + k * (d + 1):d + 1].sum())
    return t


def inner(x: Element, y: Element) -> float:
    """Trace inner product Tr(x o y).

    With this product normalization it coincides with the Euclidean dot
    product of the coordinate vectors, which is how it is evaluated.
    """
    _check_same_cone(x, y)
    return float(x.coords @ y.coords)


def _soc_parts(xc: np.ndarray, start: int, k: int, d: int):
    X = xc[start:start + k * (d + 1)].reshape(k, d + 1)
    u, u0 = X[:, :d], X[:, d]
    nrm = np.sqrt(np.einsum("ij,ij->i", u, u))
    return u, u0, nrm


@njit(cache=True)
def _soc_lambda_bounds(X):
    """(min, max) eigenvalue over a run of second-order blocks."""
    k, w = X.shape
    d = w - 1
    lo = math.inf
    hi = -math.inf
    for i in range(k):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        nrm = math.sqrt(s)
        a = (X[i, d] + nrm) / SQRT2
        b = (X[i, d] - nrm) / SQRT2
        if a > hi:
            hi = a
        if b < lo:
            lo = b
    return lo, hi


@njit(cache=True)
def _soc_inf_norm(X):
    k, w = X.shape
    d = w - 1
    hi = 0.0
    for i in range(k):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        v = (abs(X[i, d]) + math.sqrt(s)) / SQRT2
        if v > hi:
            hi = v
    return hi


@njit(cache=True)
def _soc_exp_run(X, out, shift):
    """Shifted exponential of a run of second-order blocks; returns the
    trace contribution."""
    k, w = X.shape
    d = w - 1
    tr = 0.0
    for i in range(k):
        s = 0.0
        for j in range(d):
            s += X[i, j] * X[i, j]
        nrm = math.sqrt(s)
        a = math.exp((X[i, d] + nrm) / SQRT2 - shift)
        b = math.exp((X[i, d] - nrm) / SQRT2 - shift)
        if nrm > 0.0:
            c = (a - b) / (SQRT2 * nrm)
        else:
            c = 0.0
        for j in range(d):
            out[i, j] = c * X[i, j]
        out[i, d] = (a + b) / SQRT2
        tr += a + b
    return tr


def eigenvalues(x: Element) -> np.ndarray:
    """All eigenvalues in deterministic order: orthant blocks contribute
    their coordinates, second-order blocks contribute (u0 + |u|)/sqrt2
    then (u0 - |u|)/sqrt2, products concatenate blockwise."""
    xc = x.coords
    parts = []
    for run in x.cone._runs:
        if run[0] == "o":
            parts.append(xc[run[1]:run[2]])
        else:
            _, start, k, d = run
            _, u0, nrm = _soc_parts(xc, start, k, d)
            lam = np.empty(2 * k)
            lam[0::2] = (u0 + nrm) / SQRT2
            lam[1::2] = (u0 - nrm) / SQRT2
            parts.append(lam)
    return np.concatenate(parts) if len(parts) > 1 else parts[0].copy()


def spectral(x: Element) -> SpectralDecomposition:
    """Eigenvalues with their idempotent frame.

    For a second-order block with u = 0 the frame direction is the first
    standard basis vector, making the decomposition deterministic.
    """
    c = x.cone
    xc = x.coords
    lams = []
    frame = []
    for run in c._runs:
        if run[0] == "o":
            start, stop = run[1], run[2]
            for j in range(start, stop):
                lams.append(xc[j])
                q = np.zeros(c.ambient_dim)
                q[j] = 1.0
                frame.append(Element(c, q))
        else:
            _, start, k, d = run
            u, u0, nrm = _soc_parts(xc, start, k, d)
            for i in range(k):
                if nrm[i] > 0.0:
                    v = u[i] / nrm[i]
                else:
                    v = np.zeros(d)
                    v[0] = 1.0
                base = start + i * (d + 1)
                for sign in (1.0, -1.0):
                    lams.append((u0[i] + sign * nrm[i]) / SQRT2)
                    q = np.zeros(c.ambient_dim)
                    q[base:base + d] = sign * v / SQRT2
                    q[base + d] = 1.0 / SQRT2
                    frame.append(Element(c, q))
    return SpectralDecomposition(np.array(lams), tuple(frame))


def _soc_view(xc: np.ndarray, start: int, k: int, d: int) -> np.ndarray:
    return xc[start:start + k * (d + 1)].reshape(k, d + 1)


def lambda_min(x: Element) -> float:
    xc = x.coords
    lo = math.inf
    for run in x.cone._runs:
        if run[0] == "o":
            lo = min(lo, float(xc[run[1]:run[2]].min()))
        else:
            _, start, k, d = run
            lo = min(lo, _soc_lambda_bounds(_soc_view(xc, start, k, d))[0])
    return lo


def inf_norm(x: Element) -> float:
    """Maximum eigenvalue magnitude.  On a second-order block this is
    (|u0| + |u|)/sqrt2."""
    xc = x.coords
    hi = 0.0
    for run in x.cone._runs:
        if run[0] == "o":
            seg = xc[run[1]:run[2]]
            hi = max(hi, float(np.abs(seg).max()))
        else:
            _, start, k, d = run
            hi = max(hi, _soc_inf_norm(_soc_view(xc, start, k, d)))
    return hi


def exp_map(x: Element) -> Element:
    """Exponential lifted through the spectral decomposition,
    sum_i exp(lambda_i) q_i, evaluated in closed form per block."""
    return Element(x.cone, _exp_coords(x.cone, x.coords, shift=0.0))


def _exp_coords(c: Cone, xc: np.ndarray, shift: float) -> np.ndarray:
    out = np.empty_like(xc)
    for run in c._runs:
        if run[0] == "o":
            s = slice(run[1], run[2])
            np.exp(xc[s] - shift, out=out[s])
        else:
            _, start, k, d = run
            u, u0, nrm = _soc_parts(xc, start, k, d)
            a = np.exp((u0 + nrm) / SQRT2 - shift)
            b = np.exp((u0 - nrm) / SQRT2 - shift)
            safe = np.where(nrm > 0.0, nrm, 1.0)
            O = out[start:start + k * (d + 1)].reshape(k, d + 1)
            O[:, :d] = ((a - b) / (SQRT2 * safe))[:, None] * u
            O[:, d] = (a + b) / SQRT2
    return out


def _lambda_max(c: Cone, xc: np.ndarray) -> float:
    hi = -math.inf
    for run in c._runs:
        if run[0] == "o":
            hi = max(hi, float(xc[run[1]:run[2]].max()))
        else:
            _, start, k, d = run
            hi = max(hi, _soc_lambda_bounds(_soc_view(xc, start, k, d))[1])
    return hi


def normalized_exp(x: Element) -> Element:
    """trace_normalize(exp_map(x)) with the maximum eigenvalue subtracted
    before exponentiating.  The normalized quotient is invariant under the
    shift, which keeps the computation finite for large inputs."""
    c = x.cone
    xc = x.coords
    shift = _lambda_max(c, xc)
    out = np.empty_like(xc)
    tr = 0.0
    for run in c._runs:
        if run[0] == "o":
            s = slice(run[1], run[2])
            np.exp(xc[s] - shift, out=out[s])
            tr += float(out[s].sum())
        else:
            _, start, k, d = run
            tr += _soc_exp_run(_soc_view(xc, start, k, d),
                               _soc_view(out, start, k, d), shift)
    if not tr > 0.0:
        raise ValueError(f"trace must be positive to normalize, got {tr}")
    out /= tr
    return Element(c, out)


def trace_normalize(x: Element) -> Element:
    t = trace(x)
    if not t > 0.0:
        raise ValueError(f"trace must be positive to normalize, got {t}")
    return Element(x.cone, x.coords / t)
