"""Primal-dual feasibility testing driven by a pluggable oracle, plus the
adaptive search that turns feasibility tests into an optimizer.

A feasibility test at level alpha asks whether the dual objective can reach
alpha.  Each iteration queries the oracle at the current trace-one iterate;
a negative oracle value certifies separation (the level is unreachable at
this hyperplane), otherwise the returned witness feeds its scaled constraint
residual to the multiplicative-weights learner as a loss.  If the test runs
to its iteration bound, the averaged witness is an approximately feasible
dual point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from .cones import Cone, Element
from .mwu import LossNormError, Scmwu


class Orientation(Enum):
    """MAX: primal max / dual min, residual = sum_j a_j y_j - c.
    MIN: primal min / dual max, residual = c - sum_j a_j y_j."""

    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class Separated:
    """The level set is disjoint from the current halfspace: the oracle's
    optimum was negative."""

    oracle_value: float


@dataclass(frozen=True)
class Witness:
    """A dual point inside the halfspace / easy-set / level-set intersection,
    together with its cone residual.

    ``candidate_value`` optionally carries an application-certified objective
    value for this witness itself (e.g. the exact margin of the returned
    direction, read off the residual); the test tracks it alongside the
    averaged iterates.  ``oracle_value`` is the oracle's optimal objective
    (residual against the query point); its downward trend signals an
    incoming separation.
    """

    y: np.ndarray
    residual: Element
    candidate_value: Optional[float] = None
    oracle_value: Optional[float] = None


OracleOutcome = Union[Separated, Witness]


@dataclass(frozen=True)
class OracleSpec:
    """Everything a feasibility test needs to know about one application.

    ``query(p, alpha)`` receives a trace-one cone element and the level, and
    returns an :class:`OracleOutcome`.  ``width_rho`` bounds the infinity
    norm of every witness residual; ``trace_bound`` is the bound R on the
    trace of primal solutions entering the iteration count.

    ``counter_progress`` optionally certifies a bound on the optimum from
    the primal side by evaluating the current iterate (for the margin
    problem: the polytope distance of the normalized weight split).  It is
    sampled periodically and bounds the range from the side separations
    would otherwise own.  It returns (value, y_candidate): the optional
    candidate is handed back to the progress measure, since the primal
    object often encodes an excellent dual point (the distance vector's
    direction is asymptotically the optimal normal).
    """

    cone: Cone
    width_rho: float
    dual_dim: int
    query: Callable[[Element, float], OracleOutcome]
    trace_bound: float
    orientation: Orientation
    counter_progress: Optional[
        Callable[[Element], tuple[float, Optional[np.ndarray]]]] = None


@dataclass(frozen=True)
class EarlyStopConfig:
    """Relative-stabilization stopping rule for the progress measure."""

    delta: float = 1e-4
    patience: int = 10
    enabled: bool = True


@dataclass
class DualFeasible:
    """Feasibility test concluded the level is reachable.

    ``y_tilde`` is a witness average with the last coordinate shifted by
    eps_eff*alpha/R (sign by orientation), which restores exact dual
    feasibility; ``eps_eff`` is the tolerance actually certified by the
    regret bound at the exit point (eps_eff <= eps when the test ran to a
    full conclusion).  ``value`` is the certified bound on the dual
    objective: (1 + eps_eff)*alpha for MAX, (1 - eps_eff)*alpha for MIN,
    or the certified progress value on an affirmative exit.  ``reason`` is
    one of "exhausted", "early_stop", "affirmative".
    """

    y_tilde: np.ndarray
    value: float
    iterations: int
    reason: str = "exhausted"
    eps_eff: float = 0.0
    best_progress: Optional[float] = None
    best_y: Optional[np.ndarray] = None
    best_counter: Optional[float] = None
    p_last: Optional[Element] = None


@dataclass
class PrimalCertificate:
    """The oracle separated at this level: the optimum lies strictly beyond
    alpha (above for MAX, below for MIN).  ``p`` parameterized the separating
    hyperplane."""

    p: Element
    alpha: float
    iterations: int
    oracle_value: float = 0.0
    best_progress: Optional[float] = None
    best_y: Optional[np.ndarray] = None
    best_counter: Optional[float] = None


FtpResult = Union[DualFeasible, PrimalCertificate]


class Termination(Enum):
    RANGE_CONVERGED = "RangeConverged"
    EARLY_STOPPED = "EarlyStopped"
    ITERATION_CAP = "IterationCap"


@dataclass
class SearchStep:
    """Per-level record kept by the adaptive search, for diagnostics and
    iteration-bound audits."""

    alpha: float
    eps: float
    iteration_bound: int
    iterations: int
    separated: bool
    reason: str


@dataclass
class SearchResult:
    lower: float
    upper: float
    best_value: float
    best_y: np.ndarray
    last_primal: Optional[PrimalCertificate]
    last_dual: Optional[DualFeasible]
    total_iterations: int
    search_steps: int
    termination: Termination
    steps: list[SearchStep] = field(default_factory=list)


@dataclass
class SolveReport:
    """Final outcome of one solver run; primal_value and dual_value bracket
    the optimum from below and above.  ``steps`` keeps the per-level search
    record for iteration-bound audits."""

    primal_value: float
    dual_value: float
    payload: object
    total_iterations: int
    search_steps: int
    wall_time: float
    termination: Termination
    steps: list[SearchStep] = field(default_factory=list)


class WidthViolationError(RuntimeError):
    """A witness residual exceeded the declared oracle width: the
    application's width bound is wrong."""

    def __init__(self, alpha: float, rho: float, iteration: int, norm: float):
        self.alpha = alpha
        self.rho = rho
        self.iteration = iteration
        self.norm = norm
        super().__init__(
            f"residual infinity norm {norm} exceeds width {rho} "
            f"at iteration {iteration}, level {alpha}"
        )


def iteration_bound(trace_bound: float, width_rho: float, rank: int,
                    eps: float, alpha: float) -> int:
    """ceil(4 R^2 rho^2 ln(r) / (eps^2 alpha^2)) iterations suffice for a
    conclusive feasibility test."""
    return math.ceil(4.0 * trace_bound ** 2 * width_rho ** 2 * math.log(rank)
                     / (eps ** 2 * alpha ** 2))


def early_stop_check(history, delta: float, patience: int) -> bool:
    """True iff the relative change of consecutive values stayed below
    ``delta`` for ``patience`` consecutive steps.  Ratios with a zero
    denominator are skipped without resetting the streak."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if patience < 1:
        raise ValueError("patience must be >= 1")
    streak = 0
    prev = None
    for f in history:
        if prev is not None and prev != 0.0:
            if abs(f - prev) / abs(prev) < delta:
                streak += 1
                if streak >= patience:
                    return True
            else:
                streak = 0
        prev = f
    return False


LADDER_BASE = 64
LADDER_FACTOR = 8
WINDOW_CHECK_EVERY = 16
PROGRESS_STRIDE = 4


def solve_ftp(oracle: OracleSpec, alpha: float, eps: float,
              stopping: EarlyStopConfig | None = None,
              progress: Callable[[np.ndarray], float] | None = None,
              cap: int | None = None) -> FtpResult:
    """Run one feasibility test at level ``alpha`` with tolerance ``eps``.

    The total budget is the theoretical bound T(eps, alpha), spent as a
    ladder of geometrically growing horizons with the step size matched to
    each horizon.  The regret bound holds at every prefix, so each exit
    certifies feasibility at the effective tolerance
    eps_eff = R*rho*(eta + ln(r)/(eta*t))/alpha; a rung that runs its full
    horizon certifies eps_eff = 2*R*rho*sqrt(ln(r)/T_rung)/alpha, and the
    final rung equals the theoretical (T, eta), certifying eps itself.
    The ladder escalates until separation, an affirmative conclusion, the
    requested tolerance, or until the certified progress measure stops
    improving across rungs.

    ``progress`` maps a witness average to the application's certified
    objective value; it drives the affirmative shortcut and early stopping
    on the running-average sequence.  A suffix-window average (the most
    recent half of the rung) is evaluated as a second certified candidate:
    it sheds the early transient and is usually markedly closer to the
    optimum at no extra theory cost.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if stopping is None:
        stopping = EarlyStopConfig()

    rank = oracle.cone.rank
    ln_r = math.log(rank)
    R = oracle.trace_bound
    rho = oracle.width_rho
    is_max = oracle.orientation is Orientation.MAX
    inv_rho = 1.0 / rho

    budget = iteration_bound(R, rho, rank, eps, alpha)
    if cap is not None:
        budget = min(budget, cap)

    spent = 0
    rung_T = min(budget, max(LADDER_BASE, math.ceil(ln_r)))
    state = _ProgressState(is_max)
    best_claim_eps = math.inf
    best_claim_y: np.ndarray | None = None
    p = None
    rung_index = 0

    while spent < budget:
        remaining = budget - spent
        if remaining < ln_r:
            break  # a shorter rung cannot keep the step size in (0, 1]
        rung_T = min(rung_T, remaining)
        eta = math.sqrt(ln_r / rung_T)
        assert eta <= 1.0

        learner = Scmwu(oracle.cone, eta)
        y_sum = np.zeros(oracle.dual_dim)
        window: list[np.ndarray] = []
        window_sum = np.zeros(oracle.dual_dim)
        window_head = 0
        f_prev: float | None = None
        streak = 0
        stopped_early = False
        f_at_rung_start = state.best_f
        t = 0

        for t in range(1, rung_T + 1):
            p = learner.current()
            outcome = oracle.query(p, alpha)
            if isinstance(outcome, Separated):
                return PrimalCertificate(p=p, alpha=alpha, iterations=spent + t,
                                         oracle_value=outcome.oracle_value,
                                         best_progress=state.best_f,
                                         best_y=state.best_y,
                                         best_counter=state.best_counter)
            y_sum += outcome.y
            try:
                learner.observe(outcome.residual, prescale=inv_rho)
            except LossNormError as exc:
                raise WidthViolationError(alpha, rho, spent + t,
                                          exc.norm * rho) from exc

            if progress is not None:
                window.append(outcome.y)
                window_sum += outcome.y
                while len(window) - window_head > max(LADDER_BASE, t // 2):
                    window_sum -= window[window_head]
                    window[window_head] = None
                    window_head += 1

                if outcome.candidate_value is not None:
                    state.offer(outcome.candidate_value, outcome.y)
                y_bar = y_sum / t
                f = progress(y_bar)
                state.offer(f, y_bar)
                if t % WINDOW_CHECK_EVERY == 0 or t == rung_T or t == 1:
                    y_win = window_sum / (len(window) - window_head)
                    state.offer(progress(y_win), y_win)
                    if oracle.counter_progress is not None:
                        cv, y_cand = oracle.counter_progress(p)
                        state.offer_counter(cv)
                        if y_cand is not None:
                            state.offer(progress(y_cand), y_cand)
                if state.beats(alpha):
                    return _dual_feasible(state.best_y, state.best_f, spent + t,
                                          "affirmative", 0.0, alpha, oracle,
                                          state.best_f, state.best_y, p,
                                          state.best_counter)
                if stopping.enabled:
                    if f_prev is not None and f_prev != 0.0:
                        if abs(f - f_prev) / abs(f_prev) < stopping.delta:
                            streak += 1
                            if streak >= stopping.patience:
                                stopped_early = True
                                break
                        else:
                            streak = 0
                    f_prev = f

        spent += t
        eps_here = R * rho * (eta + ln_r / (eta * t)) / alpha
        if eps_here < best_claim_eps:
            best_claim_eps = eps_here
            best_claim_y = y_sum / t
        if best_claim_eps <= eps:
            return _dual_feasible(best_claim_y,
                                  _claim_value(best_claim_eps, alpha, is_max),
                                  spent, "exhausted", best_claim_eps, alpha,
                                  oracle, state.best_f, state.best_y, p,
                                  state.best_counter)
        if stopped_early and rung_index >= 1 and progress is not None:
            stalled = (
                f_at_rung_start is not None and state.best_f is not None
                and abs(f_at_rung_start - state.best_f)
                <= stopping.delta * abs(f_at_rung_start))
            if stalled:
                return _dual_feasible(best_claim_y,
                                      _claim_value(best_claim_eps, alpha, is_max),
                                      spent, "early_stop", best_claim_eps,
                                      alpha, oracle, state.best_f,
                                      state.best_y, p, state.best_counter)
        rung_index += 1
        rung_T = min(remaining, rung_T * LADDER_FACTOR)

    return _dual_feasible(best_claim_y,
                          _claim_value(best_claim_eps, alpha, is_max),
                          max(spent, 1), "exhausted", best_claim_eps, alpha,
                          oracle, state.best_f, state.best_y, p,
                          state.best_counter)


class _ProgressState:
    """Best certified progress value (dual side) and best counter bound
    (primal side), with the point achieving the former."""

    def __init__(self, is_max: bool):
        self.is_max = is_max
        self.best_f: float | None = None
        self.best_y: np.ndarray | None = None
        self.best_counter: float | None = None

    def offer(self, f: float, y: np.ndarray) -> bool:
        """Keep (f, y) if it improves the best; True if it did."""
        if self.best_f is None or (f < self.best_f if self.is_max
                                   else f > self.best_f):
            self.best_f = f
            self.best_y = y.copy()
            return True
        return False

    def offer_counter(self, v: float) -> bool:
        """Counter bounds run against the orientation: an upper bound for
        MIN problems, a lower bound for MAX."""
        if self.best_counter is None or (v > self.best_counter if self.is_max
                                         else v < self.best_counter):
            self.best_counter = v
            return True
        return False

    def beats(self, alpha: float) -> bool:
        if self.best_f is None:
            return False
        return self.best_f < alpha if self.is_max else self.best_f > alpha


def _claim_value(eps_eff: float, alpha: float, is_max: bool) -> float:
    return (1.0 + eps_eff) * alpha if is_max else (1.0 - eps_eff) * alpha


def _dual_feasible(y_bar, value, iterations, reason, eps_eff, alpha, oracle,
                   best_f, best_y, p, best_counter=None) -> DualFeasible:
    if y_bar is None:
        y_bar = np.zeros(oracle.dual_dim)
        eps_eff = math.inf
    y_tilde = np.asarray(y_bar, dtype=np.float64).copy()
    shift = min(eps_eff, 1.0) * alpha / oracle.trace_bound
    y_tilde[-1] += shift if oracle.orientation is Orientation.MAX else -shift
    return DualFeasible(y_tilde=y_tilde, value=value, iterations=iterations,
                        reason=reason, eps_eff=eps_eff, best_progress=best_f,
                        best_y=best_y, best_counter=best_counter, p_last=p)


MAX_SEARCH_STEPS = 400
BRACKET_TEST_CAP = 2048
REFINE_START = 2048
REFINE_HORIZON = 131072
MAX_REFINE_ROUNDS = 12
VALUE_TREND_DROP = 0.05


def refine_run(oracle: OracleSpec, alpha: float, horizon: int,
               stopping: EarlyStopConfig,
               progress: Callable[[np.ndarray], float],
               gain_rel: float | None = None,
               bounds: tuple[float, float] | None = None,
               target: float | None = None) -> FtpResult:
    """Polish run at a fixed level: one learner at the step size matched to
    ``horizon``, harvesting certified candidates (averages, suffix windows
    and per-witness candidates) without the affirmative shortcut.

    Stops on separation, on exhausting the horizon, once the latest
    significant certified improvement is older than a trailing fraction of
    the run, or as soon as the run-local certified bracket (seeded from
    ``bounds`` and tightened by progress and counter values) is within
    ``target`` relative width.  The exit claim is certified by the anytime
    regret bound, like any other test.
    """
    rank = oracle.cone.rank
    ln_r = math.log(rank)
    R = oracle.trace_bound
    rho = oracle.width_rho
    is_max = oracle.orientation is Orientation.MAX
    horizon = max(horizon, math.ceil(ln_r))
    eta = math.sqrt(ln_r / horizon)
    # the floor must cover the learner's warmup, which scales like 1/eta
    stall_floor = max(64 * stopping.patience, math.ceil(16.0 / eta))
    if gain_rel is None:
        gain_rel = stopping.delta

    learner = Scmwu(oracle.cone, eta)
    y_sum = np.zeros(oracle.dual_dim)
    window: list[np.ndarray] = []
    window_sum = np.zeros(oracle.dual_dim)
    window_head = 0
    state = _ProgressState(is_max)
    anchor: float | None = None
    val_anchor: float | None = None
    last_gain = 0
    lo, hi = bounds if bounds is not None else (-math.inf, math.inf)
    p = None
    t = 0

    for t in range(1, horizon + 1):
        p = learner.current()
        outcome = oracle.query(p, alpha)
        if isinstance(outcome, Separated):
            return PrimalCertificate(p=p, alpha=alpha, iterations=t,
                                     oracle_value=outcome.oracle_value,
                                     best_progress=state.best_f,
                                     best_y=state.best_y,
                                     best_counter=state.best_counter)
        y_sum += outcome.y
        try:
            learner.observe(outcome.residual, prescale=1.0 / rho)
        except LossNormError as exc:
            raise WidthViolationError(alpha, rho, t, exc.norm * rho) from exc

        window.append(outcome.y)
        window_sum += outcome.y
        while len(window) - window_head > max(LADDER_BASE, t // 2):
            window_sum -= window[window_head]
            window[window_head] = None
            window_head += 1

        if outcome.candidate_value is not None:
            state.offer(outcome.candidate_value, outcome.y)
        if t % PROGRESS_STRIDE == 0 or t == 1 or t == horizon:
            y_bar = y_sum / t
            state.offer(progress(y_bar), y_bar)
        if t % WINDOW_CHECK_EVERY == 0 or t == horizon or t == 1:
            y_win = window_sum / (len(window) - window_head)
            state.offer(progress(y_win), y_win)
            if oracle.counter_progress is not None:
                cv, y_cand = oracle.counter_progress(p)
                state.offer_counter(cv)
                if y_cand is not None:
                    state.offer(progress(y_cand), y_cand)
        # stall when neither the best certified value has drifted by delta
        # (relative) nor the oracle value has trended down in the trailing
        # half of the run; a downtrend means a separation is still brewing
        gained = False
        if anchor is None or (state.best_f is not None and
                              abs(state.best_f - anchor)
                              > gain_rel * abs(anchor)):
            anchor = state.best_f
            gained = True
        if outcome.oracle_value is not None:
            v = outcome.oracle_value
            if val_anchor is None:
                val_anchor = v
            elif v < val_anchor - VALUE_TREND_DROP * abs(val_anchor):
                # relative drops keep halving on the way to a separation,
                # while a plateau above zero stops refreshing
                val_anchor = v
                gained = True
        if gained:
            last_gain = t
        elif stopping.enabled and t - last_gain > max(stall_floor, t // 3):
            break
        if target is not None and t % PROGRESS_STRIDE == 0:
            if state.best_f is not None:
                if is_max:
                    hi = min(hi, state.best_f)
                else:
                    lo = max(lo, state.best_f)
            if state.best_counter is not None:
                if is_max:
                    lo = max(lo, state.best_counter)
                else:
                    hi = min(hi, state.best_counter)
            if hi - lo <= target * max(lo, 0.0):
                break

    eps_eff = R * rho * (eta + ln_r / (eta * t)) / alpha
    return _dual_feasible(y_sum / t, _claim_value(eps_eff, alpha, is_max),
                          t, "refined", eps_eff, alpha, oracle,
                          state.best_f, state.best_y, p, state.best_counter)


class _Bracket:
    """Sound bracket [L, U] around the optimum plus the best certified
    payload; every tightening step is justified by a separation, a regret
    claim, or a certified progress value."""

    def __init__(self, L: float, U: float, is_max: bool,
                 on_primal, gain_floor: float):
        self.L = L
        self.U = U
        self.is_max = is_max
        self.on_primal = on_primal
        self.gain_floor = gain_floor
        self.best_f: float | None = None
        self.best_y: np.ndarray | None = None
        self.last_primal: Optional[PrimalCertificate] = None
        self.last_dual: Optional[DualFeasible] = None

    def seed(self, f: float, y: np.ndarray) -> None:
        self.best_f, self.best_y = f, np.asarray(y)
        self._certify(f)

    def _certify(self, f: float) -> None:
        if self.is_max:
            self.U = min(self.U, f)
        else:
            self.L = max(self.L, f)

    def absorb(self, result: FtpResult, alpha: float) -> bool:
        """Apply one test outcome; True if the bracket or the certified
        best moved meaningfully."""
        span_before = self.U - self.L
        improved = False
        if isinstance(result, PrimalCertificate):
            self.last_primal = result
            # separation is exact: the optimum lies strictly beyond alpha
            if self.is_max:
                self.L = max(self.L, alpha)
            else:
                self.U = min(self.U, alpha)
            if self.on_primal is not None:
                certified = self.on_primal(result)
                if certified is not None:
                    if self.is_max:
                        self.L = max(self.L, certified)
                    else:
                        self.U = min(self.U, certified)
        else:
            self.last_dual = result
            # result.value is certified by the regret bound at its exit
            if self.is_max:
                self.U = min(self.U, result.value)
            else:
                self.L = max(self.L, result.value)
        if result.best_progress is not None:
            f, y = result.best_progress, result.best_y
            if self.best_f is None or (f < self.best_f if self.is_max
                                       else f > self.best_f):
                if self.best_f is not None and \
                        abs(self.best_f - f) > self.gain_floor * abs(self.best_f):
                    improved = True
                self.best_f, self.best_y = f, y
            self._certify(self.best_f)
        if result.best_counter is not None:
            # counter bounds close the range from the separation side
            if self.is_max:
                self.L = max(self.L, result.best_counter)
            else:
                self.U = min(self.U, result.best_counter)
        return improved or (self.U - self.L) < span_before * (1.0 - 2e-2)

    def span(self) -> float:
        return self.U - self.L

    def converged(self, eps: float) -> bool:
        span = self.span()
        ref = self.L if self.L > 0.0 else (
            span / 3.0 if self.is_max else 2.0 * span / 3.0)
        return span < eps * ref


def adaptive_search(oracle_factory: Callable[[float], OracleSpec],
                    L0: float, U0: float, eps: float,
                    stopping: EarlyStopConfig | None = None,
                    progress: Callable[[np.ndarray], float] | None = None,
                    cap: int | None = None,
                    initial_certificate: tuple[float, np.ndarray] | None = None,
                    on_primal: Callable[[PrimalCertificate], float | None] | None = None,
                    zero_lower_floor: float | None = None,
                    refine_horizon: int = REFINE_HORIZON,
                    ) -> SearchResult:
    """Shrink [L0, U0] around the optimum, then polish the certified payload.

    Bracketing phase: feasibility tests at the spec level placement (one
    third of the range from the favored endpoint) with a modest per-test
    iteration cap; separations, regret claims and certified progress values
    all tighten the range soundly, and the phase ends when the range
    converges or a step stops helping.

    Refinement phase: budgeted polish runs on the feasible side of the
    bracket (at the certified upper value for MAX, mid-range for MIN),
    which keep harvesting certified candidates and may still separate;
    rounds continue while the bracket or the certified best improves.

    ``on_primal`` is called with every separation certificate and may
    return an application-certified bound on the optimum from the
    certificate's side (an upper bound for MIN, a lower bound for MAX).
    Stops when the range drops below eps * lower (eps * alpha while the
    lower end is still zero) and returns the best certified payload found.
    """
    if not 0.0 <= L0 < U0:
        raise ValueError(f"need 0 <= L0 < U0, got [{L0}, {U0}]")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1)")
    if stopping is None:
        stopping = EarlyStopConfig()

    probe = oracle_factory((L0 + U0) / 2.0)
    is_max = probe.orientation is Orientation.MAX

    bracket = _Bracket(float(L0), float(U0), is_max, on_primal,
                       max(stopping.delta, eps / 10.0))
    if initial_certificate is not None:
        bracket.seed(*initial_certificate)
    total_iters = 0
    steps: list[SearchStep] = []
    capped = False
    floored = False
    test_cap = min(BRACKET_TEST_CAP, cap) if cap is not None else BRACKET_TEST_CAP

    while len(steps) < MAX_SEARCH_STEPS:
        if bracket.converged(eps):
            break
        span = bracket.span()
        if zero_lower_floor is not None and bracket.L == 0.0 \
                and span < zero_lower_floor:
            floored = True
            break
        L = bracket.L
        alpha = L + span / 3.0 if is_max else L + 2.0 * span / 3.0
        eps_i = span / (3.0 * alpha)
        oracle = oracle_factory(alpha)
        T_i = iteration_bound(oracle.trace_bound, oracle.width_rho,
                              oracle.cone.rank, eps_i, alpha)
        result = solve_ftp(oracle, alpha, eps_i, stopping, progress, test_cap)
        total_iters += result.iterations
        if cap is not None and cap < T_i and isinstance(result, DualFeasible) \
                and result.reason == "exhausted" and result.iterations >= cap:
            capped = True
        productive = bracket.absorb(result, alpha)
        steps.append(SearchStep(alpha=alpha, eps=eps_i, iteration_bound=T_i,
                                iterations=result.iterations,
                                separated=isinstance(result, PrimalCertificate),
                                reason=getattr(result, "reason", "separated")))
        if not productive:
            break

    if progress is not None and not floored:
        # polish rounds with escalating horizons: coarse step sizes mix
        # fast, fine ones resolve the payload; give up after an
        # unproductive round at full depth
        h = REFINE_START
        for _ in range(MAX_REFINE_ROUNDS):
            if bracket.converged(eps) or len(steps) >= MAX_SEARCH_STEPS:
                break
            # mid-range keeps the level near the optimum, where witnesses
            # average into the best payloads
            alpha = (bracket.L + bracket.U) / 2.0
            if alpha <= 0.0:
                break
            oracle = oracle_factory(alpha)
            T_i = iteration_bound(oracle.trace_bound, oracle.width_rho,
                                  oracle.cone.rank, eps, alpha)
            full = min(T_i, refine_horizon, cap) if cap is not None \
                else min(T_i, refine_horizon)
            horizon = min(h, full)
            result = refine_run(oracle, alpha, horizon, stopping, progress,
                                gain_rel=max(stopping.delta, eps / 20.0),
                                bounds=(bracket.L, bracket.U), target=eps)
            total_iters += result.iterations
            productive = bracket.absorb(result, alpha)
            steps.append(SearchStep(alpha=alpha, eps=eps,
                                    iteration_bound=T_i,
                                    iterations=result.iterations,
                                    separated=isinstance(result, PrimalCertificate),
                                    reason=getattr(result, "reason", "separated")))
            if not productive and horizon >= full:
                break
            h = min(h * 4, refine_horizon)

    if bracket.best_f is None or bracket.best_y is None:
        raise RuntimeError("search finished without any certified solution; "
                           "pass an initial_certificate")

    if capped:
        termination = Termination.ITERATION_CAP
    elif bracket.converged(eps):
        termination = Termination.RANGE_CONVERGED
    else:
        termination = Termination.EARLY_STOPPED

    return SearchResult(lower=bracket.L, upper=bracket.U,
                        best_value=bracket.best_f, best_y=bracket.best_y,
                        last_primal=bracket.last_primal,
                        last_dual=bracket.last_dual,
                        total_iterations=total_iters, search_steps=len(steps),
                        termination=termination, steps=steps)
