"""The stairway target ``pi(i, j) ~ j^-2`` on ``{(i, j): i = j or i = j + 1}``
with the state-dependent selection rule that makes the adaptive Gibbs sampler
transient, plus the exact machinery used to analyse it: the ``a_n`` schedule,
one-step rows, the truncated exact oracle, the auxiliary walk, the dominating
measures and the summability series.

Coordinates are 0-based: coordinate 0 is ``i``, coordinate 1 is ``j``.
"""
from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    EXACT_TOL,
    INTEGER,
    AdaptationRule,
    Axis,
    FiniteTargetModel,
    History,
    SelectionProbs,
    finite_range,
)
from .errors import BadCoord, NotAMeasure, StateOutOfSpace, StateOutsideTruncation
from .samplers import ChainTrace, map_replicas
from .theory import tv_finite

DEFAULT_B1 = 1000.0


@dataclass(frozen=True)
class StairState:
    i: int
    j: int

    def __post_init__(self) -> None:
        if self.j < 1 or self.i not in (self.j, self.j + 1):
            raise StateOutOfSpace(f"({self.i}, {self.j}) is not a stairway state")

    @property
    def on_diagonal(self) -> bool:
        return self.i == self.j

    @property
    def walk_position(self) -> int:
        """``i + j - 2``, the one-dimensional projection that moves by -1, 0 or +1."""
        return self.i + self.j - 2

    def as_tuple(self) -> tuple[int, int]:
        return (self.i, self.j)


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------

class StairSchedule:
    """``b_0 = 0``, ``b_1 = b1``, ``b_n = b_{n-1} (1 + 1/(10 + log n))``,
    ``c_n = b_0 + ... + b_n`` and ``a(n) = 10 + log k`` for
    ``c_{k-1} < n <= c_k``.

    The ``c_n`` are kept as reals; regimes are found by real comparison.
    Sequences extend lazily under a lock, so one schedule can be shared by
    concurrent readers.
    """

    def __init__(self, b1: float = DEFAULT_B1):
        if not b1 > 0:
            raise ValueError("b1 must be positive")
        self.b1 = float(b1)
        self._b = [0.0, self.b1]
        self._c = [0.0, self.b1]
        self._lock = threading.Lock()

    def _extend_index(self, k: int) -> None:
        with self._lock:
            while len(self._b) <= k:
                n = len(self._b)
                b = self._b[-1] * (1.0 + 1.0 / (10.0 + math.log(n)))
                self._b.append(b)
                self._c.append(self._c[-1] + b)

    def _extend_cover(self, n: float) -> None:
        while self._c[-1] < n:
            self._extend_index(len(self._b))

    def b(self, k: int) -> float:
        self._extend_index(k)
        return self._b[k]

    def c(self, k: int) -> float:
        self._extend_index(k)
        return self._c[k]

    def regime(self, n: int) -> int:
        """The ``k`` with ``c_{k-1} < n <= c_k``."""
        if n < 1:
            raise ValueError("n must be at least 1")
        self._extend_cover(n)
        return bisect.bisect_left(self._c, n)

    @staticmethod
    def a_of_regime(k: int) -> float:
        return 10.0 + math.log(k)

    def a(self, n: int) -> float:
        return self.a_of_regime(self.regime(n))

    def a_values(self, n_max: int) -> list[float]:
        """``[a(1), ..., a(n_max)]`` built regime by regime."""
        self._extend_cover(n_max)
        out: list[float] = []
        k = 1
        while len(out) < n_max:
            hi = min(n_max, math.floor(self._c[k]))
            out.extend([self.a_of_regime(k)] * (hi - len(out)))
            k += 1
        return out

    def regime_segments(self, n_from: int, n_to: int) -> list[tuple[int, int, float]]:
        """Split steps ``n_from..n_to`` (inclusive) into ``(first, last, a)`` runs."""
        out = []
        n = n_from
        while n <= n_to:
            k = self.regime(n)
            last = min(n_to, math.floor(self.c(k)))
            out.append((n, last, self.a_of_regime(k)))
            n = last + 1
        return out


# ---------------------------------------------------------------------------
# target, rule and exact rows
# ---------------------------------------------------------------------------

def stair_pi_weight(state: StairState) -> float:
    return float(state.j) ** -2


def _alpha_pair(on_diagonal: bool, a: float) -> tuple[float, float]:
    if on_diagonal:
        return (0.5 + 4.0 / a, 0.5 - 4.0 / a)
    return (0.5 - 4.0 / a, 0.5 + 4.0 / a)


def stair_alpha_for_a(state: StairState, a: float) -> SelectionProbs:
    probs = _alpha_pair(state.on_diagonal, a)
    return SelectionProbs(probs, min(0.1, 0.5 - 4.0 / a))


def stair_alpha(state: StairState, n: int, schedule: StairSchedule) -> SelectionProbs:
    """Coordinate 0 favoured on the diagonal, coordinate 1 off it, by ``4/a_n``."""
    return stair_alpha_for_a(state, schedule.a(n))


def _second_coord_lower_prob(i: int) -> float:
    # P(j = i-1 | i) for i >= 2
    return i * i / (i * i + (i - 1) * (i - 1))


def stair_conditional(state: StairState, coord: int, M: int | None = None) -> dict[StairState, float]:
    """Full conditional of coordinate ``coord`` (0 updates ``i``, 1 updates ``j``).

    With a truncation level ``M`` the conditional is restricted to ``i <= M``
    and renormalized.
    """
    i, j = state.i, state.j
    if coord == 0:
        cands = [StairState(j, j), StairState(j + 1, j)]
        if M is not None:
            cands = [s for s in cands if s.i <= M]
        return {s: 1.0 / len(cands) for s in cands}
    if coord == 1:
        if i == 1:
            return {StairState(1, 1): 1.0}
        low = _second_coord_lower_prob(i)
        return {StairState(i, i - 1): low, StairState(i, i): 1.0 - low}
    raise BadCoord(f"coordinate must be 0 or 1, got {coord!r}")


def stair_kernel_row_for_a(state: StairState, a: float, M: int | None = None) -> dict[StairState, float]:
    """One-step law as the ``alpha``-mixture of the two conditionals."""
    alpha = _alpha_pair(state.on_diagonal, a)
    row: dict[StairState, float] = {}
    for coord in (0, 1):
        for s, p in stair_conditional(state, coord, M).items():
            row[s] = row.get(s, 0.0) + alpha[coord] * p
    return row


def stair_kernel_row(state: StairState, n: int, schedule: StairSchedule,
                     M: int | None = None) -> dict[StairState, float]:
    return stair_kernel_row_for_a(state, schedule.a(n), M)


def stair_kernel_row_closed_form(state: StairState, a: float) -> dict[StairState, float]:
    """Down/stay/up probabilities written out directly, for interior states
    (``i >= 2``) of the untruncated chain."""
    i = state.i
    if i < 2:
        raise StateOutOfSpace("closed form holds for i >= 2 only")
    share_low = i * i / (i * i + (i - 1) * (i - 1))
    share_high = (i - 1) * (i - 1) / (i * i + (i - 1) * (i - 1))
    if state.on_diagonal:
        down = (0.5 - 4.0 / a) * share_low
        up = 0.25 + 2.0 / a
        return {StairState(i, i - 1): down, StairState(i, i): 1.0 - down - up,
                StairState(i + 1, i): up}
    down = 0.25 - 2.0 / a
    up = (0.5 + 4.0 / a) * share_high
    return {StairState(i - 1, i - 1): down, StairState(i, i - 1): 1.0 - down - up,
            StairState(i, i): up}


def stair_increment_law(state: StairState, a: float) -> tuple[float, float, float]:
    """Law of the change in ``i + j - 2`` over one step, on ``(-1, 0, +1)``."""
    row = stair_kernel_row_for_a(state, a)
    law = [0.0, 0.0, 0.0]
    base = state.walk_position
    for s, p in row.items():
        law[s.walk_position - base + 1] += p
    return tuple(law)


class StairwayModel(FiniteTargetModel):
    """The stairway target as a two-coordinate model, optionally truncated to
    ``i <= M``. Exact conditionals use one uniform per draw."""

    dimension = 2

    def __init__(self, M: int | None = None):
        if M is not None and M < 2:
            raise ValueError("truncation level must be at least 2")
        self.M = M

    def space(self) -> tuple[Axis, ...]:
        if self.M is None:
            return (INTEGER, INTEGER)
        return (finite_range(1, self.M), finite_range(1, self.M))

    def _valid(self, i, j) -> bool:
        if j < 1 or (i != j and i != j + 1):
            return False
        return self.M is None or i <= self.M

    def log_density(self, x) -> float:
        i, j = int(x[0]), int(x[1])
        if not self._valid(i, j):
            return -math.inf
        return -2.0 * math.log(j)

    def conditional_support(self, i: int, x) -> list:
        if i == 0:
            j = int(x[1])
            return [v for v in (j, j + 1) if self._valid(v, j)]
        if i == 1:
            a = int(x[0])
            return [v for v in (a - 1, a) if self._valid(a, v)]
        raise BadCoord(f"coordinate must be 0 or 1, got {i!r}")

    def enumerate_support(self) -> list[tuple]:
        if self.M is None:
            raise StateOutsideTruncation("the untruncated stairway has infinite support")
        return [s.as_tuple() for s in truncated_states(self.M)]

    def exact_conditional_sampler(self, i: int, x, rng: np.random.Generator):
        u = rng.random()
        if i == 0:
            j = int(x[1])
            if self.M is not None and j + 1 > self.M:
                return j
            return j if u <= 0.5 else j + 1
        if i == 1:
            a = int(x[0])
            if a == 1:
                return 1
            return a - 1 if u <= _second_coord_lower_prob(a) else a
        raise BadCoord(f"coordinate must be 0 or 1, got {i!r}")


class StairAlphaRule(AdaptationRule):
    """``alpha_n`` from the previous state and ``a_n``."""

    def __init__(self, schedule: StairSchedule):
        self.schedule = schedule
        self._cache: dict[tuple[bool, float], SelectionProbs] = {}

    def update_alpha(self, history: History) -> SelectionProbs:
        x = history.last_state
        key = (bool(x[0] == x[1]), self.schedule.a(history.n))
        alpha = self._cache.get(key)
        if alpha is None:
            probs = _alpha_pair(key[0], key[1])
            alpha = SelectionProbs(probs, min(0.1, 0.5 - 4.0 / key[1]))
            self._cache[key] = alpha
        return alpha


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate_stair(x0: StairState, steps: int, schedule: StairSchedule,
                   rng: np.random.Generator, alpha0: Sequence[float] = (0.5, 0.5),
                   replica_index: int = 0) -> ChainTrace:
    """The adaptive Gibbs chain on the stairway.

    Consumes exactly the variates ``run_adaptive_chain`` would with
    ``StairwayModel()`` and ``StairAlphaRule``: per step one uniform for the
    coordinate and one for the conditional draw. Given the same generator
    state the two traces are identical.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    a_vals = schedule.a_values(steps)
    u = rng.random(2 * steps).tolist()
    i, j = x0.i, x0.j
    xi = [i]
    xj = [j]
    cs = [-1]
    for n in range(steps):
        a = a_vals[n]
        p0 = 0.5 + 4.0 / a if i == j else 0.5 - 4.0 / a
        if u[2 * n] <= p0:
            cs.append(0)
            i = j if u[2 * n + 1] <= 0.5 else j + 1
        else:
            cs.append(1)
            if i > 1:
                j = i - 1 if u[2 * n + 1] <= i * i / (i * i + (i - 1) * (i - 1)) else i
        xi.append(i)
        xj.append(j)
    states = np.column_stack([np.array(xi, dtype=np.int64), np.array(xj, dtype=np.int64)])
    a_arr = np.array(a_vals)
    diag = states[:-1, 0] == states[:-1, 1]
    first = np.where(diag, 0.5 + 4.0 / a_arr, 0.5 - 4.0 / a_arr)
    second = np.where(diag, 0.5 - 4.0 / a_arr, 0.5 + 4.0 / a_arr)
    alphas = np.empty((steps + 1, 2))
    alphas[0] = alpha0
    alphas[1:, 0] = first
    alphas[1:, 1] = second
    coords = np.array(cs, dtype=np.int64)
    accepted = np.ones(steps + 1, dtype=bool)
    accepted[0] = False
    return ChainTrace(states, coords, accepted, alphas, None, replica_index=replica_index)


@dataclass
class TransienceSummary:
    replicas: int
    steps: int
    threshold: float
    seed: int
    final_x1: list[int]
    growth_rates: list[float]
    batch_growth: list[float]

    @property
    def frac_exceeding_threshold(self) -> float:
        return sum(x > self.threshold for x in self.final_x1) / self.replicas

    @property
    def pooled_growth(self) -> float:
        return float(np.mean(self.growth_rates))

    def as_dict(self) -> dict:
        return {
            "replicas": self.replicas,
            "steps": self.steps,
            "threshold": self.threshold,
            "seed": self.seed,
            "frac_exceeding_threshold": self.frac_exceeding_threshold,
            "pooled_growth_rate": self.pooled_growth,
            "batch_growth_rates": self.batch_growth,
            "final_x1": self.final_x1,
        }


def growth_rate(trace: ChainTrace) -> float:
    """Mean of ``X_{n,1} / n`` over the last decade ``steps/10 < n <= steps``."""
    steps = len(trace)
    n = np.arange(steps // 10 + 1, steps + 1)
    return float(np.mean(trace.states[n, 0] / n))


def _stair_replica(rng, r, *, steps, b1):
    trace = simulate_stair(StairState(1, 1), steps, StairSchedule(b1), rng, replica_index=r)
    return trace


def run_transience(replicas: int, steps: int, seed: int, threshold: float = 500.0,
                   b1: float = DEFAULT_B1, batches: int = 4,
                   on_trace: Callable[[ChainTrace], None] | None = None) -> TransienceSummary:
    """Replicas of the stairway chain from ``(1, 1)``.

    ``on_trace`` sees each trace before it is dropped, which keeps memory flat
    for long runs. Replicas are split into ``batches`` groups by index for the
    stability check of the growth rate.
    """
    finals: list[int] = []
    rates: list[float] = []

    def one(rng, r):
        trace = _stair_replica(rng, r, steps=steps, b1=b1)
        trace.base_seed = seed
        if on_trace is not None:
            on_trace(trace)
        return int(trace.final_state[0]), growth_rate(trace)

    for fin, rate in map_replicas(one, seed, replicas):
        finals.append(fin)
        rates.append(rate)
    groups = np.array_split(np.array(rates), max(1, min(batches, replicas)))
    return TransienceSummary(replicas, steps, threshold, seed, finals, rates,
                             [float(g.mean()) for g in groups])


# ---------------------------------------------------------------------------
# truncated exact oracle
# ---------------------------------------------------------------------------

def truncated_states(M: int) -> list[StairState]:
    out = [StairState(1, 1)]
    for i in range(2, M + 1):
        out += [StairState(i, i - 1), StairState(i, i)]
    return out


def truncated_target(M: int) -> np.ndarray:
    w = np.array([stair_pi_weight(s) for s in truncated_states(M)])
    return w / w.sum()


def truncated_kernel(M: int, a: float, boundary: str = "renormalize") -> np.ndarray:
    """Row-stochastic matrix of one adaptive step with ``a_n = a`` on ``i <= M``.

    ``boundary="renormalize"`` restricts each conditional to ``i <= M``;
    ``"hold"`` runs the untruncated step and turns moves past ``M`` into holds.
    The two agree for Gibbs updates.
    """
    if boundary not in ("renormalize", "hold"):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    states = truncated_states(M)
    index = {s: k for k, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for s in states:
        if boundary == "renormalize":
            row = stair_kernel_row_for_a(s, a, M)
        else:
            row = stair_kernel_row_for_a(s, a)
        for t, p in row.items():
            P[index[s], index[t if t.i <= M else s]] += p
    return P


def _check_truncated(M: int, x0: StairState) -> None:
    if not 2 <= M <= 1000:
        raise StateOutsideTruncation(f"M must lie in [2, 1000], got {M}")
    if x0.i > M:
        raise StateOutsideTruncation(f"{x0} lies outside i <= {M}")


def truncated_exact_distribution(M: int, n: int, x0: StairState,
                                 schedule: StairSchedule) -> np.ndarray:
    """Exact law of ``X_n`` for the truncated adaptive chain, ordered as
    ``truncated_states(M)``. Constant-``a`` runs are applied as matrix powers."""
    return truncated_tv_curve(M, [n], x0, schedule, return_laws=True)[0][1]


def truncated_tv_curve(M: int, grid: Sequence[int], x0: StairState, schedule: StairSchedule,
                       return_laws: bool = False) -> list[tuple[int, float]] | list:
    """``(n, TV(pi_n, pi_M))`` at each ``n`` of the increasing ``grid``."""
    _check_truncated(M, x0)
    grid = sorted(set(int(g) for g in grid))
    if grid and grid[0] < 0:
        raise ValueError("grid points must be non-negative")
    states = truncated_states(M)
    law = np.zeros(len(states))
    law[states.index(x0)] = 1.0
    target = truncated_target(M)
    kernels: dict[float, np.ndarray] = {}
    out = []
    done = 0
    for g in grid:
        if g > done:
            for first, last, a in schedule.regime_segments(done + 1, g):
                P = kernels.get(a)
                if P is None:
                    P = kernels[a] = truncated_kernel(M, a)
                law = law @ np.linalg.matrix_power(P, last - first + 1)
            law = law / law.sum()
            done = g
        if return_laws:
            out.append((g, law.copy()))
        else:
            out.append((g, tv_finite(law, target)))
    return out


def log_grid(n_max: int, points: int) -> list[int]:
    """About ``points`` log-spaced integers in ``[1, n_max]``, always including both ends."""
    raw = np.unique(np.round(np.logspace(0, math.log10(n_max), points)).astype(np.int64))
    vals = sorted(set(int(v) for v in raw) | {1, n_max})
    return vals


# ---------------------------------------------------------------------------
# auxiliary walk, dominating measure, Hoeffding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AuxWalkLaw:
    n: int | None
    a: float
    pmf: tuple[float, float, float]

    @property
    def mean(self) -> float:
        return self.pmf[2] - self.pmf[0]


def aux_walk_pmf_for_a(a: float, n: int | None = None) -> AuxWalkLaw:
    if not a > 4:
        raise NotAMeasure(f"the walk law needs a > 4, got {a!r}")
    return AuxWalkLaw(n, a, (0.25 - 1.0 / a, 0.5, 0.25 + 1.0 / a))


def aux_walk_pmf(n: int, schedule: StairSchedule) -> AuxWalkLaw:
    """Law of the walk increment at step ``n`` on ``(-1, 0, +1)``; mean ``2/a_n``."""
    return aux_walk_pmf_for_a(schedule.a(n), n)


def dominated_measure_for_a(a: float, i: int) -> tuple[float, float, float]:
    if i < 1:
        raise NotAMeasure("i must be at least 1")
    low = (0.25 - 2.0 / a) * (1.0 + 2.0 / i)
    high = (0.25 + 2.0 / a) * (1.0 - 2.0 / max(4, i))
    mid = 1.0 - low - high
    if min(low, mid, high) < -EXACT_TOL or max(low, mid, high) > 1 + EXACT_TOL:
        raise NotAMeasure(f"({low}, {mid}, {high}) is not a probability vector")
    return (low, mid, high)


def dominated_measure(n: int, i: int, schedule: StairSchedule) -> tuple[float, float, float]:
    """Common stochastic lower bound of the increment laws at level ``i``."""
    return dominated_measure_for_a(schedule.a(n), i)


def stoch_dominates(p: Sequence[float], q: Sequence[float], tol: float = EXACT_TOL) -> bool:
    """``p >=_st q`` on ``(-1, 0, +1)``: the CDF of ``p`` is at most that of
    ``q`` at -1 and 0 (up to ``tol`` of round-off)."""
    cdf_p = (p[0], p[0] + p[1])
    cdf_q = (q[0], q[0] + q[1])
    return all(a <= b + tol for a, b in zip(cdf_p, cdf_q))


def stair_row_dominates_walk_for_a(state: StairState, a: float) -> bool:
    return stoch_dominates(stair_increment_law(state, a), aux_walk_pmf_for_a(a).pmf)


def stair_row_dominates_walk(state: StairState, n: int, schedule: StairSchedule) -> bool:
    return stair_row_dominates_walk_for_a(state, schedule.a(n))


def level_of(state: StairState) -> int:
    """The ``i`` with walk position ``2i - 2`` (diagonal) or ``2i - 3`` (off)."""
    return state.i


@dataclass
class DominanceScan:
    checked: int
    counterexamples: list[tuple[StairState, int, float]]
    # smallest level from which every state dominates, per regime
    exact_threshold: dict[int, int]


def dominance_scan(i_max: int = 200, regimes: int = 3,
                   schedule: StairSchedule | None = None) -> DominanceScan:
    """Check every state with level ``i <= i_max`` at the first, middle and
    last step of each of the first ``regimes`` regimes. A counterexample is a
    state with ``2i - 8 >= a_n`` whose row fails to dominate the walk."""
    schedule = schedule or StairSchedule()
    checked = 0
    bad: list[tuple[StairState, int, float]] = []
    thresholds: dict[int, int] = {}
    for k in range(1, regimes + 1):
        lo = math.floor(schedule.c(k - 1)) + 1
        hi = math.floor(schedule.c(k))
        ns = sorted({lo, (lo + hi) // 2, hi})
        fails_at = 0
        for n in ns:
            a = schedule.a(n)
            for i in range(1, i_max + 1):
                states = [StairState(i, i)] + ([StairState(i, i - 1)] if i >= 2 else [])
                for s in states:
                    checked += 1
                    ok = stair_row_dominates_walk_for_a(s, a)
                    if not ok:
                        fails_at = max(fails_at, i)
                        if 2 * i - 8 >= a:
                            bad.append((s, n, a))
        thresholds[k] = fails_at + 1
    return DominanceScan(checked, bad, thresholds)


def hoeffding_tail(n: int, t: float) -> float:
    if n < 1 or not t > 0:
        raise ValueError("need n >= 1 and t > 0")
    return math.exp(-0.5 * n * t * t)


@dataclass(frozen=True)
class TailEstimate:
    n: int
    t: float
    a: float
    replicas: int
    frequency: float
    bound: float

    @property
    def sigma(self) -> float:
        p = min(1.0, self.bound)
        return math.sqrt(p * (1.0 - p) / self.replicas)

    @property
    def within_bound(self) -> bool:
        return self.frequency <= self.bound + 3.0 * self.sigma


def aux_walk_tail(a: float, n: int, t: float, replicas: int,
                  rng: np.random.Generator) -> TailEstimate:
    """Empirical ``P(S_n - E S_n <= -n t)`` for ``n`` i.i.d. increments with
    constant parameter ``a``, via multinomial counts of (-1, 0, +1)."""
    law = aux_walk_pmf_for_a(a)
    counts = rng.multinomial(n, law.pmf, size=replicas)
    s = counts[:, 2] - counts[:, 0]
    hits = np.count_nonzero(s - n * law.mean <= -n * t)
    return TailEstimate(n, t, a, replicas, hits / replicas, hoeffding_tail(n, t))


# ---------------------------------------------------------------------------
# summability of p_n
# ---------------------------------------------------------------------------

@dataclass
class PnSeries:
    n: np.ndarray
    log_p: np.ndarray
    # log(-log p_n), finite where log_p overflows
    log_neg_log_p: np.ndarray
    p: np.ndarray
    partial_sums: np.ndarray
    n0: int | None
    strictly_decreasing: bool


def pn_series(n_max: int, schedule: StairSchedule | None = None) -> PnSeries:
    """``p_n = exp(-b_n / (2 (10 + log n)^2))`` for ``n = 2..n_max``.

    Everything runs in log space since ``b_n`` overflows a double long before
    ``n = 10^5``. ``n0`` is the smallest ``n`` from which
    ``log(p_{n-1}/p_n) > log(n^2/(n-1)^2)`` holds all the way to ``n_max``.
    Partial sums are compensated.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    b1 = (schedule or StairSchedule()).b1
    ns = np.arange(1, n_max + 1)
    log_b = np.empty(n_max)
    log_b[0] = math.log(b1)
    inc = np.log1p(1.0 / (10.0 + np.log(ns[1:].astype(float))))
    log_b[1:] = log_b[0] + np.cumsum(inc)
    # L_n = log(-log p_n)
    L = math.log(0.5) + log_b - 2.0 * np.log(10.0 + np.log(ns.astype(float)))
    with np.errstate(over="ignore"):
        log_p = -np.exp(L)
    p = np.exp(log_p)

    diff = L[1:] - L[:-1]
    increasing = diff > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = np.where(increasing, L[1:] + np.log(-np.expm1(-diff)), -np.inf)
    m = ns[1:].astype(float)
    rhs = math.log(2.0) + np.log(np.log1p(1.0 / (m - 1.0)))
    holds = lhs > rhs  # criterion at n = 2..n_max
    n0 = None
    if holds[-1]:
        failing = np.nonzero(~holds)[0]
        n0 = int(ns[1:][failing[-1] + 1]) if failing.size else 2

    sums = np.empty(n_max - 1)
    total = 0.0
    comp = 0.0
    for k, v in enumerate(p[1:].tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        sums[k] = total + comp
    return PnSeries(ns[1:], log_p[1:], L[1:], p[1:], sums, n0, bool(np.all(increasing[1:])))


HOEFFDING_GRID = ((100, 0.1), (100, 0.2), (1000, 0.05), (1000, 0.1), (10_000, 0.02), (10_000, 0.05))


def hoeffding_grid_check(rng: np.random.Generator, a: float = 10.0, replicas: int = 100_000,
                         grid: Sequence[tuple[int, float]] = HOEFFDING_GRID) -> list[TailEstimate]:
    return [aux_walk_tail(a, n, t, replicas, rng) for n, t in grid]
