"""Two worked models.

* A geometric target on ``{0, 1, ...}`` with independence proposals ``q_n``
  whose sup-distance in ``n`` vanishes while the Metropolis kernels they
  induce stay a fixed distance apart.
* A Poisson random-effects model sampled by adaptive Metropolis-within-Gibbs
  with either an acceptance-rate controller on ``log gamma`` (target 0.44) or
  ``gamma = 2.4^2`` times an estimated conditional variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    AdaptationRule,
    ConstantRule,
    FiniteProposal,
    FiniteTargetModel,
    History,
    ProposalFamily,
    SelectionProbs,
    TargetModel,
    finite_range,
    project_to_simplex,
)
from .errors import ConfigError, DimensionMismatch, ScaleOutOfRange, TruncationTooSmall
from .finite import mwg_step_law
from .samplers import map_replicas, run_adaptive_chain

GEOMETRIC_TAIL = 1e-12


# ---------------------------------------------------------------------------
# geometric target
# ---------------------------------------------------------------------------

def _check_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ConfigError(f"p must lie in (0, 1), got {p!r}")


def _check_tail(p: float, K: int) -> None:
    if (K + 1) * math.log(p) >= math.log(GEOMETRIC_TAIL):
        raise TruncationTooSmall(f"tail mass p^(K+1) with K={K} is not below {GEOMETRIC_TAIL}")


def geometric_truncation(p: float, n_max: int) -> int:
    """Smallest ``K >= n_max + 3`` with ``p^(K+1) < 1e-12``."""
    _check_p(p)
    K = math.floor(math.log(GEOMETRIC_TAIL) / math.log(p))
    while (K + 1) * math.log(p) >= math.log(GEOMETRIC_TAIL):
        K += 1
    return max(K, n_max + 3)


class GeometricModel(FiniteTargetModel):
    """``pi(k) = p^k (1 - p)`` restricted to ``{0..K}``."""

    dimension = 1

    def __init__(self, p: float, K: int):
        _check_p(p)
        _check_tail(p, K)
        self.p = p
        self.K = K
        self._logp = math.log(p)

    def space(self):
        return (finite_range(0, self.K),)

    def log_density(self, x) -> float:
        k = int(x[0])
        if not 0 <= k <= self.K:
            return -math.inf
        return k * self._logp

    def conditional_support(self, i: int, x) -> list:
        return list(range(self.K + 1))

    def enumerate_support(self) -> list[tuple]:
        return [(k,) for k in range(self.K + 1)]


def geometric_qn_pmf(n: int, p: float, K: int) -> np.ndarray:
    """``q_n(k)`` proportional to ``p^k`` except ``q_n(n)`` proportional to
    ``p^(2n)``, on ``{0..K}``."""
    _check_p(p)
    if n < 1:
        raise ValueError("n must be at least 1")
    if K < n + 2:
        raise TruncationTooSmall(f"K={K} must be at least n+2={n + 2}")
    _check_tail(p, K)
    w = p ** np.arange(K + 1, dtype=float)
    w[n] = p ** (2 * n)
    return w / math.fsum(w)


def geometric_qn_normalizer(n: int, p: float) -> float:
    """``Z = 1/(1-p) - p^n + p^(2n)`` over the untruncated support."""
    return 1.0 / (1.0 - p) - p ** n + p ** (2 * n)


class GeometricQnProposal(FiniteProposal):
    """Independence proposal ``q_gamma``; the parameter is the index ``n``."""

    def __init__(self, p: float, K: int):
        _check_p(p)
        self.p = p
        self.K = K
        self._cache: dict[int, tuple[list, list[float]]] = {}

    def check_param(self, i: int, gamma_i) -> bool:
        return int(gamma_i) == gamma_i and 1 <= gamma_i <= self.K - 2

    def proposal_support(self, i, gamma_i, x, frm):
        n = int(gamma_i)
        out = self._cache.get(n)
        if out is None:
            q = geometric_qn_pmf(n, self.p, self.K)
            out = self._cache[n] = (list(range(self.K + 1)), q.tolist())
        return out


def geometric_metropolis_row(n: int, p: float, K: int, j: int) -> np.ndarray:
    """Row ``P_n(j, .)`` of the Metropolis kernel with proposal ``q_n``."""
    if not 0 <= j <= K:
        raise ValueError(f"state {j} outside 0..{K}")
    model = GeometricModel(p, K)
    law = mwg_step_law(model, GeometricQnProposal(p, K), 0, n, [j])
    row = np.zeros(K + 1)
    for k, mass in law.items():
        row[k] += mass
    return row


def geometric_to_zero(n: int, p: float, K: int, j: int) -> float:
    """``P_n(j, 0) = min{q_n(0), (pi(0)/pi(j)) q_n(j)}`` for ``j >= 1``."""
    q = geometric_qn_pmf(n, p, K)
    return min(q[0], p ** (-j) * q[j])


def geometric_q_gap(n: int, p: float, K: int) -> float:
    """``TV(q_{n+1}, q_n)`` without subtracting nearly equal vectors.

    Off ``{n, n+1}`` the two laws differ by ``p^k D / (Z_n Z_{n+1})`` with
    ``D = Z_n - Z_{n+1} = -p^n (1-p) (1 - p^n (1+p))``, which is summed in
    closed form; the two special entries are handled separately.
    """
    geometric_qn_pmf(n + 1, p, K)
    total = math.fsum(p ** k for k in range(K + 1))
    pn = p ** n
    z0 = total - pn + pn * pn
    z1 = total - pn * p + (pn * p) ** 2
    D = -pn * (1.0 - p) * (1.0 - pn * (1.0 + p))
    zz = z0 * z1
    rest = abs(D) / zz * (total - pn - pn * p)
    at_n = abs(pn * (z0 - pn * z1)) / zz
    at_n1 = abs(pn * p * (pn * p * z0 - z1)) / zz
    return 0.5 * (rest + at_n + at_n1)


@dataclass(frozen=True)
class GapRow:
    n: int
    q_gap: float
    p_gap_lower: float


def example2_gaps(p: float, n_max: int = 40, K: int | None = None) -> list[GapRow]:
    """For ``n = 1..n_max``: ``sup_j TV(Q_{n+1}(j,.), Q_n(j,.))`` and the lower
    bound ``P_{n+1}(n, 0) - P_n(n, 0)`` on ``sup_j TV(P_{n+1}(j,.), P_n(j,.))``."""
    K = geometric_truncation(p, n_max) if K is None else K
    out = []
    for n in range(1, n_max + 1):
        q_gap = geometric_q_gap(n, p, K)
        lower = geometric_metropolis_row(n + 1, p, K, n)[0] - geometric_metropolis_row(n, p, K, n)[0]
        out.append(GapRow(n, q_gap, float(lower)))
    return out


# ---------------------------------------------------------------------------
# Poisson random-effects model
# ---------------------------------------------------------------------------

GLMM_DATA_SEED = 20111
GLMM_THETA_TRUE = 0.5


class GlmmModel(TargetModel):
    """``y_i ~ Poisson(exp(theta + x_i))``, ``x_i ~ N(0,1)``, ``theta ~ N(0,1)``.

    State order is ``(x_1, ..., x_n, theta)``.
    """

    def __init__(self, y: Sequence[int]):
        y = [int(v) for v in y]
        if not y or any(v < 0 for v in y):
            raise ConfigError("observations must be a nonempty list of nonnegative integers")
        self.y = tuple(y)
        self._y = np.array(y, dtype=float)
        self.n_obs = len(y)
        self.dimension = len(y) + 1

    @classmethod
    def synthetic(cls, n: int = 5, seed: int = GLMM_DATA_SEED,
                  theta: float = GLMM_THETA_TRUE) -> "GlmmModel":
        """Data drawn from the model with ``theta`` fixed and ``x`` from its prior."""
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n)
        return cls(rng.poisson(np.exp(theta + x)).tolist())

    def _split(self, x) -> tuple[np.ndarray, float]:
        v = np.asarray(x, dtype=float)
        if v.shape != (self.dimension,):
            raise DimensionMismatch(f"state has {v.size} coordinates, need {self.dimension}")
        return v[:-1], float(v[-1])

    def log_density(self, x) -> float:
        xs, theta = self._split(x)
        eta = theta + xs
        return float(np.sum(self._y * eta - np.exp(eta)) - 0.5 * np.dot(xs, xs) - 0.5 * theta * theta)

    def conditional_log_density(self, i: int, x, value) -> float:
        # only the terms that involve coordinate i
        value = float(value)
        n = self.n_obs
        if i < n:
            eta = float(x[n]) + value
            return self.y[i] * eta - math.exp(eta) - 0.5 * value * value
        total = -0.5 * value * value
        for k in range(n):
            eta = value + float(x[k])
            total += self.y[k] * eta - math.exp(eta)
        return total


def glmm_log_posterior(model: GlmmModel, state) -> float:
    return model.log_density(state)


def glmm_grad(model: GlmmModel, state) -> np.ndarray:
    xs, theta = model._split(state)
    e = np.exp(theta + xs)
    out = np.empty(model.dimension)
    out[:-1] = -e + model._y - xs
    out[-1] = float(np.sum(model._y - e)) - theta
    return out


@dataclass(frozen=True)
class ScaleRange:
    low: float = 0.01
    high: float = 100.0

    def __post_init__(self) -> None:
        if not 0.0 < self.low <= self.high < math.inf:
            raise ConfigError(f"need 0 < low <= high < inf, got [{self.low}, {self.high}]")

    def clamp(self, g: float) -> float:
        return min(self.high, max(self.low, g))

    def check(self, g: float) -> None:
        if not self.low <= g <= self.high:
            raise ScaleOutOfRange(f"variance {g!r} outside [{self.low}, {self.high}]")


@dataclass(frozen=True)
class GaussianKernel:
    """Normal random-walk step with variance ``gamma``."""

    gamma: float

    def log_density(self, frm: float, to: float) -> float:
        z = to - frm
        return -0.5 * z * z / self.gamma - 0.5 * math.log(2.0 * math.pi * self.gamma)

    def density(self, frm: float, to: float) -> float:
        return math.exp(self.log_density(frm, to))

    def sample(self, frm: float, rng: np.random.Generator) -> float:
        return frm + math.sqrt(self.gamma) * rng.standard_normal()


def gaussian_rw_proposal(gamma_i: float, scale_range: ScaleRange = ScaleRange()) -> GaussianKernel:
    scale_range.check(gamma_i)
    return GaussianKernel(float(gamma_i))


class GaussianRandomWalk(ProposalFamily):
    """Per-coordinate normal random walk; ``gamma_i`` is the variance.
    Sampling draws one standard normal."""

    symmetric = True

    def __init__(self, d: int, scale_range: ScaleRange = ScaleRange()):
        self.d = d
        self.scale_range = scale_range
        self.param_spaces = tuple([(scale_range.low, scale_range.high)] * d)

    def log_proposal_density(self, i, gamma_i, x, frm, to) -> float:
        return GaussianKernel(gamma_i).log_density(frm, to)

    def sample_proposal(self, i, gamma_i, x, frm, rng):
        return frm + math.sqrt(gamma_i) * rng.standard_normal()


def scale_adapt_update(gamma_i: float, accepted: bool, n: int,
                       scale_range: ScaleRange = ScaleRange(), target: float = 0.44,
                       exponent: float = 0.6) -> float:
    """``log gamma += n^-exponent (1{accepted} - target)``, then clamp."""
    scale_range.check(gamma_i)
    step = n ** -exponent * ((1.0 if accepted else 0.0) - target)
    return scale_range.clamp(math.exp(math.log(gamma_i) + step))


def variance_adapt_update(empirical_var: float, scale_range: ScaleRange = ScaleRange()) -> float:
    """``clamp(2.4^2 * var)``: the 2.4 multiplies the standard deviation."""
    if empirical_var < 0:
        raise ValueError("variance must be nonnegative")
    return scale_range.clamp(2.4 ** 2 * empirical_var)


STRATEGIES = ("accept44", "var24", "fixed")


class RunningMoments:
    """Running mean and covariance of the chain."""

    def __init__(self, d: int):
        self.count = 0
        self.s1 = np.zeros(d)
        self.s2 = np.zeros((d, d))

    def push(self, x: np.ndarray) -> None:
        self.count += 1
        self.s1 += x
        self.s2 += np.outer(x, x)

    def covariance(self) -> np.ndarray:
        m = self.s1 / self.count
        return self.s2 / self.count - np.outer(m, m)


class GlmmAdaptation(AdaptationRule):
    """Selection probabilities drift toward weights proportional to the
    empirical standard deviations; proposal variances follow ``strategy``.

    Every ``refresh`` steps ``alpha`` moves a fraction ``min(1, n^-0.6)`` of
    the way to that target (so consecutive ``alpha`` differ by at most
    ``n^-0.6`` in max norm) and, for ``var24``, each ``gamma_i`` is reset to
    ``2.4^2`` times the conditional variance ``1/(Sigma^-1)_ii`` of the
    running covariance. ``accept44`` updates the variance of the coordinate
    moved at the previous step from its accept flag.
    """

    def __init__(self, strategy: str, d: int, epsilon: float = 0.05,
                 scale_range: ScaleRange = ScaleRange(), adapt_alpha: bool = True,
                 refresh: int = 100, warmup: int = 1000, exponent: float = 0.6):
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.d = d
        self.epsilon = epsilon
        self.scale_range = scale_range
        self.adapt_alpha = adapt_alpha
        self.refresh = refresh
        self.warmup = warmup
        self.exponent = exponent
        if strategy == "fixed":
            self.update_gamma = None
        self.reset()

    def reset(self) -> None:
        self._moments = RunningMoments(self.d)
        self._alpha: SelectionProbs | None = None
        self._gamma: list[float] | None = None

    def update_alpha(self, history: History) -> SelectionProbs:
        n = history.n
        if self._alpha is None:
            self._alpha = SelectionProbs(tuple(history.alphas[0]), self.epsilon)
            self._gamma = None if history.gammas is None else [float(g) for g in history.gammas[0]]
        self._moments.push(history.last_state)
        if self.adapt_alpha and n > self.warmup and n % self.refresh == 0:
            sd = np.sqrt(np.clip(np.diag(self._moments.covariance()), 0.0, None))
            if sd.sum() > 0:
                target = project_to_simplex(sd / sd.sum(), self.epsilon).as_array()
                cur = self._alpha.as_array()
                w = min(1.0, n ** -self.exponent)
                self._alpha = project_to_simplex(cur + w * (target - cur), self.epsilon)
        return self._alpha

    def update_gamma(self, history: History) -> list[float]:
        n = history.n
        g = self._gamma
        if self.strategy == "accept44":
            if n > 1:
                i = history.last_coord
                g[i] = scale_adapt_update(g[i], history.last_accepted, n, self.scale_range,
                                          exponent=self.exponent)
        elif n > self.warmup and n % self.refresh == 0:
            cov = self._moments.covariance()
            try:
                prec = np.linalg.inv(cov)
                cond = 1.0 / np.diag(prec)
            except np.linalg.LinAlgError:
                cond = np.diag(cov)
            for k in range(self.d):
                v = float(cond[k]) if np.isfinite(cond[k]) and cond[k] > 0 else 0.0
                g[k] = variance_adapt_update(v, self.scale_range)
        return g


def batch_means(x: np.ndarray, batches: int = 32) -> tuple[float, float]:
    """Mean and batch-means standard error."""
    usable = (x.size // batches) * batches
    if usable == 0:
        raise ValueError("not enough samples for batch means")
    means = x[x.size - usable:].reshape(batches, -1).mean(axis=1)
    return float(x.mean()), float(means.std(ddof=1) / math.sqrt(batches))


@dataclass
class GlmmSummary:
    strategy: str
    seed: int
    steps: int
    replicas: int
    theta_mean: float
    theta_se: float
    x_mean: list[float]
    x_se: list[float]
    accept_rates: list[float]
    gamma_final: list[float]
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "seed": self.seed,
            "steps": self.steps,
            "replicas": self.replicas,
            "theta_mean": self.theta_mean,
            "theta_se": self.theta_se,
            "x_mean": self.x_mean,
            "x_se": self.x_se,
            "accept_rates": self.accept_rates,
            "gamma_final": self.gamma_final,
        }
        out.update(self.extra)
        return out


def default_glmm_rule(strategy: str, d: int, scale_range: ScaleRange = ScaleRange()) -> AdaptationRule:
    """Uniform fixed selection for ``fixed``; adaptive selection otherwise."""
    if strategy == "fixed":
        return ConstantRule(SelectionProbs.uniform(d))
    return GlmmAdaptation(strategy, d, scale_range=scale_range)


def glmm_run(model: GlmmModel, strategy: str, alpha_rule: AdaptationRule | None = None,
             steps: int = 10 ** 6, replicas: int = 1, seed: int = 0,
             gamma0: Sequence[float] | None = None, scale_range: ScaleRange = ScaleRange(),
             burn_in: float = 0.1, batches: int = 32, processes: int = 1) -> GlmmSummary:
    """Adaptive Metropolis-within-Gibbs on the GLMM posterior.

    ``fixed`` keeps ``gamma`` at ``gamma0`` (default ``5.76`` times the unit
    prior variance). Means and standard errors use the post-burn-in part of
    each replica; replicas are averaged and their errors combined. Acceptance
    rates are post-burn-in proportions per coordinate.
    """
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}")
    if steps < 1000:
        raise ConfigError("steps must be at least 1000")
    d = model.dimension
    rule = alpha_rule if alpha_rule is not None else default_glmm_rule(strategy, d, scale_range)
    if gamma0 is None:
        gamma0 = [variance_adapt_update(1.0, scale_range)] * d
    proposals = GaussianRandomWalk(d, scale_range)
    x0 = model.state([0.0] * d)
    alpha0 = SelectionProbs.uniform(d, 0.05)

    def one(rng, r):
        trace = run_adaptive_chain(model, proposals, rule, x0, alpha0, gamma0, steps, rng,
                                   replica_index=r)
        start = 1 + int(burn_in * steps)
        kept = trace.states[start:]
        stats = [batch_means(kept[:, k], batches) for k in range(d)]
        coords = trace.coords[start:]
        acc = trace.accepted[start:]
        rates = []
        for k in range(d):
            sel = coords == k
            rates.append(float(acc[sel].mean()) if sel.any() else float("nan"))
        return stats, rates, [float(g) for g in trace.gammas[-1]]

    results = map_replicas(one, seed, replicas, processes)
    means = np.array([[s[0] for s in res[0]] for res in results])
    ses = np.array([[s[1] for s in res[0]] for res in results])
    rates = np.array([res[1] for res in results])
    gammas = np.array([res[2] for res in results])
    mean = means.mean(axis=0)
    se = np.sqrt((ses ** 2).sum(axis=0)) / replicas
    return GlmmSummary(
        strategy=strategy, seed=seed, steps=steps, replicas=replicas,
        theta_mean=float(mean[-1]), theta_se=float(se[-1]),
        x_mean=[float(v) for v in mean[:-1]], x_se=[float(v) for v in se[:-1]],
        accept_rates=[float(v) for v in rates.mean(axis=0)],
        gamma_final=[float(v) for v in gammas.mean(axis=0)],
    )
