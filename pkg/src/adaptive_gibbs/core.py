"""Shared types: selection probabilities, product states, targets, proposals,
adaptation rules and the seeded random streams every sampler draws from."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BadEpsilon,
    DimensionMismatch,
    EntryBelowEpsilon,
    StateOutOfSpace,
    SumNotOne,
)

# Tolerance for identities that hold exactly in real arithmetic.
EXACT_TOL = 1e-12
# Tolerance for sums accumulated over many terms.
SUM_TOL = 1e-9


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

def substream(base_seed: int, replica_index: int = 0) -> np.random.Generator:
    """Philox-4x64 generator keyed by ``SeedSequence([base_seed, replica_index])``.

    Philox is counter based, so the stream of replica ``r`` depends only on
    ``(base_seed, r)`` and never on the order in which replicas are run.
    """
    if base_seed < 0 or replica_index < 0:
        raise ValueError("seed and replica index must be non-negative")
    seq = np.random.SeedSequence([int(base_seed), int(replica_index)])
    return np.random.Generator(np.random.Philox(seq))


def inverse_cdf_index(probs: Sequence[float], u: float) -> int:
    """Smallest index ``k`` with ``u <= probs[0] + ... + probs[k]``.

    A draw exactly on a cumulative boundary goes to the lower index. The last
    index absorbs round-off so the result is always valid.
    """
    acc = 0.0
    last = len(probs) - 1
    for k in range(last):
        acc += probs[k]
        if u <= acc:
            return k
    return last


# ---------------------------------------------------------------------------
# selection probabilities
# ---------------------------------------------------------------------------

def _check_epsilon(epsilon: float, d: int) -> None:
    if d < 2:
        raise DimensionMismatch(f"need at least 2 coordinates, got {d}")
    if not (epsilon > 0.0) or epsilon > 1.0 / d + EXACT_TOL:
        raise BadEpsilon(f"epsilon must lie in (0, 1/{d}], got {epsilon!r}")


@dataclass(frozen=True)
class SelectionProbs:
    """A point of ``Y = [eps, 1]^d`` intersected with the probability simplex.

    Construction validates and never renormalizes. Entries may undershoot
    ``epsilon`` by at most ``EXACT_TOL`` (so ``1/2 - 4/10`` counts as 0.1).
    """

    probs: tuple[float, ...]
    epsilon: float

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        d = len(probs)
        _check_epsilon(self.epsilon, d)
        total = math.fsum(probs)
        if not math.isfinite(total) or abs(total - 1.0) > EXACT_TOL:
            raise SumNotOne(f"selection probabilities sum to {total!r}")
        upper = 1.0 - (d - 1) * self.epsilon
        for k, p in enumerate(probs):
            if p < self.epsilon - EXACT_TOL:
                raise EntryBelowEpsilon(
                    f"entry {k} = {p!r} is below epsilon = {self.epsilon!r}")
            if p > upper + EXACT_TOL:
                raise EntryBelowEpsilon(
                    f"entry {k} = {p!r} exceeds 1 - (d-1)*epsilon = {upper!r}")

    @property
    def d(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def sup_distance(self, other: "SelectionProbs") -> float:
        """Max-norm distance, the norm used for every Lipschitz bound here."""
        if other.d != self.d:
            raise DimensionMismatch("selection probabilities differ in dimension")
        return max(abs(a - b) for a, b in zip(self.probs, other.probs))

    @classmethod
    def uniform(cls, d: int, epsilon: float | None = None) -> "SelectionProbs":
        return cls(tuple([1.0 / d] * d), 1.0 / d if epsilon is None else epsilon)


def validate_selection_probs(probs: Iterable[float], epsilon: float) -> SelectionProbs:
    return SelectionProbs(tuple(probs), epsilon)


def project_to_simplex(probs: Iterable[float], epsilon: float) -> SelectionProbs:
    """Euclidean projection of ``probs`` onto ``Y``.

    Shifting by ``epsilon`` turns ``Y`` into the simplex of mass
    ``1 - d*epsilon``; the sort-and-threshold projection is then exact.
    """
    v = np.asarray(list(probs), dtype=float)
    d = v.size
    _check_epsilon(epsilon, d)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite weights")
    mass = 1.0 - d * epsilon
    if mass <= EXACT_TOL:
        return SelectionProbs(tuple([1.0 / d] * d), epsilon)
    y = v - epsilon
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - mass
    ks = np.arange(1, d + 1)
    rho = np.nonzero(u - css / ks > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    x = np.maximum(y - tau, 0.0) + epsilon
    # pull the sum back onto 1 exactly where round-off allows
    x[np.argmax(x)] += 1.0 - math.fsum(x)
    return SelectionProbs(tuple(x.tolist()), epsilon)


# ---------------------------------------------------------------------------
# product states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    """One coordinate space: ``integer`` lattice, finite ``range`` or ``real`` line."""

    kind: str
    low: int | None = None
    high: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("integer", "range", "real"):
            raise ValueError(f"unknown axis kind {self.kind!r}")
        if self.kind == "range" and (self.low is None or self.high is None
                                     or self.low > self.high):
            raise ValueError("range axis needs low <= high")

    @property
    def is_discrete(self) -> bool:
        return self.kind != "real"

    def contains(self, value) -> bool:
        if self.kind == "real":
            return isinstance(value, (int, float, np.floating, np.integer))
        if int(value) != value:
            return False
        if self.kind == "range":
            return self.low <= value <= self.high
        return True


INTEGER = Axis("integer")
REAL = Axis("real")


def finite_range(low: int, high: int) -> Axis:
    return Axis("range", low, high)


@dataclass(frozen=True)
class ProductState:
    coords: tuple
    space: tuple[Axis, ...]

    def __post_init__(self) -> None:
        coords = tuple(self.coords)
        space = tuple(self.space)
        if len(coords) != len(space):
            raise DimensionMismatch(
                f"{len(coords)} coordinates for a {len(space)}-axis space")
        fixed = []
        for k, (value, axis) in enumerate(zip(coords, space)):
            if not axis.contains(value):
                raise StateOutOfSpace(f"coordinate {k} = {value!r} not in {axis}")
            fixed.append(int(value) if axis.is_discrete else float(value))
        object.__setattr__(self, "coords", tuple(fixed))
        object.__setattr__(self, "space", space)

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def with_coord(self, i: int, value) -> "ProductState":
        coords = list(self.coords)
        coords[i] = value
        return ProductState(tuple(coords), self.space)

    @classmethod
    def integers(cls, values: Sequence[int]) -> "ProductState":
        return cls(tuple(values), tuple([INTEGER] * len(values)))

    @classmethod
    def reals(cls, values: Sequence[float]) -> "ProductState":
        return cls(tuple(values), tuple([REAL] * len(values)))


# ---------------------------------------------------------------------------
# targets
# ---------------------------------------------------------------------------

class TargetModel:
    """Unnormalized target on a product space.

    ``x`` arguments are any sequence of coordinate values (a ``ProductState``,
    list or tuple). Coordinates are indexed from 0. Subclasses that can draw
    from full conditionals define a method named ``exact_conditional_sampler``;
    the class attribute below marks its absence.
    """

    dimension: int = 0
    exact_conditional_sampler: Callable | None = None

    def space(self) -> tuple[Axis, ...]:
        return tuple([REAL] * self.dimension)

    def log_density(self, x: Sequence) -> float:
        raise NotImplementedError

    def conditional_log_density(self, i: int, x: Sequence, value) -> float:
        y = list(x)
        y[i] = value
        return self.log_density(y)

    def state(self, coords: Sequence) -> ProductState:
        return ProductState(tuple(coords), self.space())


class FiniteTargetModel(TargetModel):
    """Target whose full conditionals have finite, enumerable support."""

    def conditional_support(self, i: int, x: Sequence) -> list:
        """Values ``v`` (ascending) with positive mass under ``pi(. | x_{-i})``."""
        raise NotImplementedError

    def enumerate_support(self) -> list[tuple]:
        raise NotImplementedError

    def conditional_pmf(self, i: int, x: Sequence) -> tuple[list, list[float]]:
        values = self.conditional_support(i, x)
        logs = [self.conditional_log_density(i, x, v) for v in values]
        top = max(logs)
        w = [math.exp(lv - top) for lv in logs]
        z = math.fsum(w)
        return values, [wk / z for wk in w]

    def exact_conditional_sampler(self, i: int, x: Sequence, rng: np.random.Generator):
        """Inverse-CDF draw from the full conditional; consumes one uniform."""
        values, probs = self.conditional_pmf(i, x)
        return values[inverse_cdf_index(probs, rng.random())]


class FiniteProductModel(FiniteTargetModel):
    """Target given by a table of nonnegative weights on ``{0..K_1-1} x ...``."""

    def __init__(self, weights: np.ndarray):
        w = np.asarray(weights, dtype=float)
        if w.ndim < 1 or np.any(w < 0) or not np.any(w > 0):
            raise ValueError("weights must be a nonnegative table with some mass")
        self.weights = w
        self.dimension = w.ndim
        with np.errstate(divide="ignore"):
            self._logw = np.log(w)

    def space(self) -> tuple[Axis, ...]:
        return tuple(finite_range(0, k - 1) for k in self.weights.shape)

    def log_density(self, x: Sequence) -> float:
        idx = tuple(int(v) for v in x)
        for v, k in zip(idx, self.weights.shape):
            if not 0 <= v < k:
                return -math.inf
        return float(self._logw[idx])

    def conditional_support(self, i: int, x: Sequence) -> list:
        idx = [int(v) for v in x]
        out = []
        for v in range(self.weights.shape[i]):
            idx[i] = v
            if self.weights[tuple(idx)] > 0:
                out.append(v)
        return out

    def enumerate_support(self) -> list[tuple]:
        return [tuple(int(v) for v in ix) for ix in np.argwhere(self.weights > 0)]


# ---------------------------------------------------------------------------
# proposals
# ---------------------------------------------------------------------------

class ProposalFamily:
    """Per-coordinate proposal kernels ``Q_{x_{-i}, gamma_i}(from, .)``.

    ``param_spaces[i]`` is either a ``(low, high)`` interval or a frozenset of
    admissible parameters for coordinate ``i``.
    """

    symmetric: bool = False
    param_spaces: tuple = ()

    def log_proposal_density(self, i: int, gamma_i, x: Sequence, frm, to) -> float:
        raise NotImplementedError

    def sample_proposal(self, i: int, gamma_i, x: Sequence, frm, rng: np.random.Generator):
        raise NotImplementedError

    def check_param(self, i: int, gamma_i) -> bool:
        if not self.param_spaces:
            return True
        space = self.param_spaces[i]
        if isinstance(space, (set, frozenset)):
            return gamma_i in space
        low, high = space
        return low <= gamma_i <= high


class FiniteProposal(ProposalFamily):
    """Proposal with a finite candidate set; sampling consumes one uniform."""

    def proposal_support(self, i: int, gamma_i, x: Sequence, frm) -> tuple[list, list[float]]:
        raise NotImplementedError

    def log_proposal_density(self, i, gamma_i, x, frm, to) -> float:
        values, probs = self.proposal_support(i, gamma_i, x, frm)
        for v, p in zip(values, probs):
            if v == to:
                return math.log(p) if p > 0 else -math.inf
        return -math.inf

    def sample_proposal(self, i, gamma_i, x, frm, rng):
        values, probs = self.proposal_support(i, gamma_i, x, frm)
        return values[inverse_cdf_index(probs, rng.random())]


class LatticeRandomWalk(FiniteProposal):
    """``from + offset`` with offsets drawn from a fixed pmf.

    The parameter ``gamma_i`` is ignored. Symmetric when the offset pmf is.
    """

    def __init__(self, offsets: Sequence[int], probs: Sequence[float]):
        if len(offsets) != len(probs) or abs(math.fsum(probs) - 1.0) > EXACT_TOL:
            raise ValueError("offset pmf must be normalized and aligned")
        self.offsets = tuple(int(o) for o in offsets)
        self.probs = tuple(float(p) for p in probs)
        table = dict(zip(self.offsets, self.probs))
        self.symmetric = all(abs(table.get(-o, 0.0) - p) <= EXACT_TOL
                             for o, p in table.items())

    def proposal_support(self, i, gamma_i, x, frm):
        return [frm + o for o in self.offsets], list(self.probs)


# ---------------------------------------------------------------------------
# adaptation
# ---------------------------------------------------------------------------

class History:
    """Append-only record visible to adaptation rules.

    At step ``n`` the rule sees rows ``0..n-1``: row 0 holds ``x_0``,
    ``alpha_0`` and ``gamma_0``; rows ``k >= 1`` hold what step ``k`` produced.
    Array views are read-only.
    """

    def __init__(self, states: np.ndarray, alphas: np.ndarray,
                 gammas: np.ndarray | None, coords: np.ndarray, accepted: np.ndarray):
        self._states = _readonly(states)
        self._alphas = _readonly(alphas)
        self._gammas = None if gammas is None else _readonly(gammas)
        self._coords = _readonly(coords)
        self._accepted = _readonly(accepted)
        self.n = 1

    @property
    def states(self) -> np.ndarray:
        return self._states[: self.n]

    @property
    def alphas(self) -> np.ndarray:
        return self._alphas[: self.n]

    @property
    def gammas(self) -> np.ndarray | None:
        return None if self._gammas is None else self._gammas[: self.n]

    @property
    def coords(self) -> np.ndarray:
        return self._coords[: self.n]

    @property
    def accepted(self) -> np.ndarray:
        return self._accepted[: self.n]

    @property
    def last_state(self) -> np.ndarray:
        return self._states[self.n - 1]

    @property
    def last_coord(self) -> int:
        """Coordinate updated at step ``n-1`` (-1 before the first step)."""
        return int(self._coords[self.n - 1])

    @property
    def last_accepted(self) -> bool:
        return bool(self._accepted[self.n - 1])

    @property
    def last_gamma(self) -> np.ndarray | None:
        return None if self._gammas is None else self._gammas[self.n - 1]


def _readonly(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.setflags(write=False)
    return v


class AdaptationRule:
    """Maps the history to the next selection probabilities (and proposal
    parameters when ``update_gamma`` is defined).

    Rules are called exactly once per step in increasing ``n``; rules that keep
    running statistics rebuild them in ``reset``, which the runner calls before
    the first step, so replays are deterministic.
    """

    update_gamma: Callable | None = None

    def reset(self) -> None:
        pass

    def update_alpha(self, history: History) -> SelectionProbs:
        raise NotImplementedError


class ConstantRule(AdaptationRule):
    def __init__(self, alpha: SelectionProbs):
        self.alpha = alpha

    def update_alpha(self, history: History) -> SelectionProbs:
        return self.alpha


class FunctionRule(AdaptationRule):
    """Wraps plain callables ``f(history) -> SelectionProbs`` (and optionally
    ``g(history) -> gamma vector``)."""

    def __init__(self, alpha_fn: Callable[[History], SelectionProbs],
                 gamma_fn: Callable[[History], Sequence[float]] | None = None):
        self._alpha_fn = alpha_fn
        if gamma_fn is not None:
            self.update_gamma = gamma_fn

    def update_alpha(self, history: History) -> SelectionProbs:
        return self._alpha_fn(history)
