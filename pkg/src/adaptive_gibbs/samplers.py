"""Random-scan Gibbs and Metropolis-within-Gibbs kernels and the adaptive
chain runner covering the plain, adaptive-selection, and doubly adaptive
variants.

Variate accounting (fixed so that traces replay bit for bit):

* coordinate choice: one uniform, inverse CDF over ``alpha`` in index order;
* exact conditional draw: whatever the model's sampler documents (the
  finite-model sampler uses one uniform);
* Metropolis update: the proposal's own draw (one normal for the Gaussian
  random walk, one uniform for finite proposals), then one uniform for the
  accept test, consumed even when the acceptance probability is 1.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

import numpy as np

from .core import (
    EXACT_TOL,
    AdaptationRule,
    History,
    ProductState,
    ProposalFamily,
    SelectionProbs,
    TargetModel,
    inverse_cdf_index,
    substream,
)
from .errors import (
    AdaptationLeftY,
    AdaptiveGibbsError,
    DimensionMismatch,
    MissingConditionalSampler,
    NonFiniteLogDensity,
)


@dataclass
class ChainTrace:
    """Output of one chain.

    Arrays have ``steps + 1`` rows; row 0 holds the initial state, ``alpha_0``
    and ``gamma_0`` (coordinate -1). Row ``n >= 1`` holds the coordinate chosen
    at step ``n``, the accept flag, the new state and the parameters used.
    Coordinates are 0-based here and written 1-based in CSV.
    """

    states: np.ndarray
    coords: np.ndarray
    accepted: np.ndarray
    alphas: np.ndarray
    gammas: np.ndarray | None
    base_seed: int | None = None
    replica_index: int = 0

    def __len__(self) -> int:
        return self.states.shape[0] - 1

    @property
    def d(self) -> int:
        return self.states.shape[1]

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def write_csv(self, out: TextIO, thin: int = 1) -> None:
        """Header ``n,coord,accepted,x1..xd,alpha1..alphad[,gamma1..gammad]``.

        With ``thin > 1`` only rows with ``n % thin == 0`` and the last row are
        written.
        """
        d = self.d
        header = ["n", "coord", "accepted"]
        header += [f"x{k}" for k in range(1, d + 1)]
        header += [f"alpha{k}" for k in range(1, d + 1)]
        if self.gammas is not None:
            header += [f"gamma{k}" for k in range(1, d + 1)]
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        steps = len(self)
        discrete = np.issubdtype(self.states.dtype, np.integer)
        fmt_state = (lambda v: str(int(v))) if discrete else format_real
        for n in range(1, steps + 1):
            if thin > 1 and n % thin and n != steps:
                continue
            row = [str(n), str(int(self.coords[n]) + 1), "1" if self.accepted[n] else "0"]
            row += [fmt_state(v) for v in self.states[n]]
            row += [format_real(v) for v in self.alphas[n]]
            if self.gammas is not None:
                row += [format_real(v) for v in self.gammas[n]]
            writer.writerow(row)

    def to_csv(self, thin: int = 1) -> str:
        buf = io.StringIO()
        self.write_csv(buf, thin=thin)
        return buf.getvalue()


def format_real(v) -> str:
    """Shortest decimal that round-trips a float64."""
    return repr(float(v))


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def select_coordinate(alpha: SelectionProbs, rng: np.random.Generator) -> int:
    return inverse_cdf_index(alpha.probs, rng.random())


def rsg_step(model: TargetModel, alpha: SelectionProbs, state: ProductState,
             rng: np.random.Generator) -> tuple[ProductState, int]:
    """One random-scan Gibbs update; returns the new state and the 0-based
    coordinate that was resampled."""
    sampler = model.exact_conditional_sampler
    if sampler is None:
        raise MissingConditionalSampler(f"{type(model).__name__} has no exact conditionals")
    if alpha.d != len(state):
        raise DimensionMismatch("alpha and state differ in dimension")
    i = select_coordinate(alpha, rng)
    value = sampler(i, state.coords, rng)
    return state.with_coord(i, value), i


def acceptance_prob(model: TargetModel, proposals: ProposalFamily, i: int, gamma_i,
                    state: Sequence, candidate) -> float:
    """Metropolis-Hastings acceptance probability for replacing coordinate ``i``
    by ``candidate`` under the full conditional of ``model``.

    Symmetric families skip the proposal ratio entirely.
    """
    current = state[i]
    log_cur = model.conditional_log_density(i, state, current)
    if not math.isfinite(log_cur):
        raise NonFiniteLogDensity(f"log density at current state is {log_cur!r}")
    log_new = model.conditional_log_density(i, state, candidate)
    if log_new == -math.inf:
        return 0.0
    delta = log_new - log_cur
    if not proposals.symmetric:
        back = proposals.log_proposal_density(i, gamma_i, state, candidate, current)
        fwd = proposals.log_proposal_density(i, gamma_i, state, current, candidate)
        delta += back - fwd
    if math.isnan(delta):
        raise NonFiniteLogDensity("acceptance ratio is undefined")
    if delta >= 0.0:
        return 1.0
    return math.exp(delta)


def _mwg_update(model, proposals, i, gamma_i, x: list, rng) -> bool:
    current = x[i]
    candidate = proposals.sample_proposal(i, gamma_i, x, current, rng)
    a = acceptance_prob(model, proposals, i, gamma_i, x, candidate)
    if rng.random() < a:
        x[i] = candidate
        return True
    return False


def mwg_step(model: TargetModel, proposals: ProposalFamily, i: int, gamma_i,
             state: ProductState, rng: np.random.Generator) -> tuple[ProductState, bool]:
    """One Metropolis update of coordinate ``i``; other coordinates untouched."""
    x = list(state.coords)
    accepted = _mwg_update(model, proposals, i, gamma_i, x, rng)
    return (state.with_coord(i, x[i]) if accepted else state), accepted


# ---------------------------------------------------------------------------
# chain runner
# ---------------------------------------------------------------------------

def _check_alpha(alpha, d: int, eps0: float) -> SelectionProbs:
    if isinstance(alpha, SelectionProbs):
        if alpha.d != d:
            raise AdaptationLeftY(f"rule returned {alpha.d} probabilities, need {d}")
        if alpha.epsilon >= eps0 or min(alpha.probs) >= eps0 - EXACT_TOL:
            return alpha
        raise AdaptationLeftY(f"rule returned {alpha.probs}, outside Y(eps={eps0})")
    try:
        return SelectionProbs(tuple(alpha), eps0)
    except AdaptiveGibbsError as exc:
        raise AdaptationLeftY(f"rule returned {alpha!r}: {exc}") from exc


def run_adaptive_chain(model: TargetModel, proposals: ProposalFamily | None,
                       rule: AdaptationRule, x0: ProductState, alpha0: SelectionProbs,
                       gamma0: Sequence[float] | None, steps: int,
                       rng: np.random.Generator | int, *, replica_index: int = 0) -> ChainTrace:
    """Run ``steps`` iterations of the adaptive random-scan sampler.

    Without ``proposals`` every coordinate is resampled from its full
    conditional. With ``proposals`` each update is one Metropolis step; if the
    rule defines ``update_gamma`` the proposal parameters adapt too, otherwise
    they stay at ``gamma0``. At step ``n`` the rule sees the history through
    step ``n - 1`` and the freshly set ``alpha_n``/``gamma_n`` drive step ``n``.

    ``rng`` may be a generator or an integer base seed, in which case the
    replica substream ``substream(rng, replica_index)`` is used.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    base_seed = None
    if not isinstance(rng, np.random.Generator):
        base_seed = int(rng)
        rng = substream(base_seed, replica_index)
    d = model.dimension
    if len(x0) != d or alpha0.d != d:
        raise DimensionMismatch("x0, alpha0 and model disagree on dimension")
    if proposals is None and model.exact_conditional_sampler is None:
        raise MissingConditionalSampler(
            f"{type(model).__name__} has no exact conditionals and no proposals were given")
    if math.isinf(model.log_density(list(x0.coords))):
        raise NonFiniteLogDensity("initial state has zero target mass")

    discrete = all(ax.is_discrete for ax in x0.space)
    states = np.empty((steps + 1, d), dtype=np.int64 if discrete else float)
    alphas = np.empty((steps + 1, d))
    coords = np.full(steps + 1, -1, dtype=np.int64)
    accepted = np.zeros(steps + 1, dtype=bool)
    adapt_gamma = proposals is not None and rule.update_gamma is not None
    gammas = None
    if gamma0 is not None:
        gammas = np.empty((steps + 1, d))
        gammas[0] = gamma0
    states[0] = x0.coords
    alphas[0] = alpha0.probs

    history = History(states, alphas, gammas, coords, accepted)
    rule.reset()
    eps0 = alpha0.epsilon
    x = list(x0.coords)
    gamma = None if gamma0 is None else [float(g) for g in gamma0]
    sampler = model.exact_conditional_sampler
    uniform = rng.random

    for n in range(1, steps + 1):
        history.n = n
        alpha = _check_alpha(rule.update_alpha(history), d, eps0)
        if adapt_gamma:
            gamma = [float(g) for g in rule.update_gamma(history)]
            if len(gamma) != d or not all(proposals.check_param(k, g) for k, g in enumerate(gamma)):
                raise AdaptationLeftY(f"proposal parameters {gamma} left their spaces")
        i = inverse_cdf_index(alpha.probs, uniform())
        if proposals is None:
            x[i] = sampler(i, x, rng)
            ok = True
        else:
            ok = _mwg_update(model, proposals, i, None if gamma is None else gamma[i], x, rng)
        states[n] = x
        alphas[n] = alpha.probs
        coords[n] = i
        accepted[n] = ok
        if gammas is not None:
            gammas[n] = gamma

    return ChainTrace(states, coords, accepted, alphas, gammas,
                      base_seed=base_seed, replica_index=replica_index)


def map_replicas(func: Callable[[np.random.Generator, int], object], base_seed: int,
                 replicas: int, processes: int = 1) -> list:
    """Run ``func(substream(base_seed, r), r)`` for each replica ``r``.

    Results come back ordered by replica index whatever the schedule; with
    ``processes > 1`` ``func`` must be picklable.
    """
    if processes <= 1:
        return [func(substream(base_seed, r), r) for r in range(replicas)]
    with ProcessPoolExecutor(max_workers=processes) as pool:
        futures = [pool.submit(_call_replica, func, base_seed, r) for r in range(replicas)]
        return [f.result() for f in futures]


def _call_replica(func, base_seed, r):
    return func(substream(base_seed, r), r)
