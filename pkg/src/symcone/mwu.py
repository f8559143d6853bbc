"""Multiplicative-weights learner over the trace-one slice of a symmetric cone.

The iterate is the normalized exponential of the negated, scaled cumulative
loss; only the running loss sum is stored, so memory per step is O(1).
"""
from __future__ import annotations

import numpy as np

from .cones import Cone, Element, inf_norm, normalized_exp

try:
    from numba import njit

    @njit(cache=True)
    def _accumulate(cum, coords, factor):
        for i in range(cum.shape[0]):
            cum[i] += factor * coords[i]
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _accumulate(cum, coords, factor):
        cum += factor * coords

LOSS_NORM_SLACK = 1e-9


class LossNormError(ValueError):
    """A loss exceeded the unit infinity-norm contract.

    Losses are residuals divided by a width bound, so this signals an
    incorrect width bound upstream.
    """

    def __init__(self, norm: float):
        self.norm = norm
        super().__init__(f"loss infinity norm {norm} exceeds 1 + {LOSS_NORM_SLACK}")


class Scmwu:
    """Exponential-weights learner producing trace-one cone iterates.

    State is confined to one solver run: safe to hand between threads,
    not safe for concurrent mutation.
    """

    def __init__(self, cone: Cone, eta: float):
        if not 0.0 < eta <= 1.0:
            raise ValueError(f"eta must be in (0, 1], got {eta}")
        self.cone = cone
        self.eta = float(eta)
        self._cum = np.zeros(cone.ambient_dim)
        self.step_count = 0

    @property
    def cumulative_loss(self) -> Element:
        return Element(self.cone, self._cum.copy())

    def observe(self, loss: Element, prescale: float = 1.0) -> None:
        """Accumulate ``prescale * loss``; the scaled loss must satisfy the
        unit infinity-norm contract."""
        if loss.cone != self.cone:
            raise ValueError("loss cone does not match learner cone")
        nrm = inf_norm(loss) * abs(prescale)
        if nrm > 1.0 + LOSS_NORM_SLACK:
            raise LossNormError(nrm)
        _accumulate(self._cum, loss.coords, prescale)
        self.step_count += 1

    def current(self) -> Element:
        """The trace-one iterate for the losses observed so far."""
        return normalized_exp(Element(self.cone, -self.eta * self._cum))
