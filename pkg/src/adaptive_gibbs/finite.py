"""Exact transition matrices for finite targets.

These are the oracles the sampler and the closed-form bounds are checked
against: dense matrices are fine up to a few thousand states.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import FiniteProposal, FiniteTargetModel, SelectionProbs
from .samplers import acceptance_prob


def index_states(states: Sequence[tuple]) -> dict[tuple, int]:
    return {tuple(s): k for k, s in enumerate(states)}


def stationary_vector(model: FiniteTargetModel, states: Sequence[tuple]) -> np.ndarray:
    logs = np.array([model.log_density(list(s)) for s in states])
    w = np.exp(logs - logs.max())
    return w / w.sum()


def gibbs_coordinate_kernels(model: FiniteTargetModel,
                             states: Sequence[tuple] | None = None
                             ) -> tuple[list[tuple], list[np.ndarray]]:
    """``P_i`` for each coordinate: resample coordinate ``i`` from its full
    conditional. Returns the state ordering and the list of matrices."""
    states = [tuple(s) for s in (model.enumerate_support() if states is None else states)]
    index = index_states(states)
    size = len(states)
    kernels = []
    for i in range(model.dimension):
        P = np.zeros((size, size))
        for row, s in enumerate(states):
            values, probs = model.conditional_pmf(i, s)
            for v, p in zip(values, probs):
                t = list(s)
                t[i] = v
                P[row, index[tuple(t)]] += p
        kernels.append(P)
    return states, kernels


def mixture_kernel(kernels: Sequence[np.ndarray], alpha: SelectionProbs | Sequence[float]) -> np.ndarray:
    """``sum_i alpha_i P_i``."""
    probs = alpha.probs if isinstance(alpha, SelectionProbs) else tuple(alpha)
    out = np.zeros_like(kernels[0])
    for a, P in zip(probs, kernels):
        out += a * P
    return out


def mwg_step_law(model: FiniteTargetModel, proposals: FiniteProposal, i: int, gamma_i,
                 state: Sequence) -> dict:
    """Exact law of the new value of coordinate ``i`` after one Metropolis
    update, by enumerating candidate and accept/reject outcomes."""
    x = list(state)
    current = x[i]
    law: dict = {}
    values, probs = proposals.proposal_support(i, gamma_i, x, current)
    for v, q in zip(values, probs):
        if q == 0.0:
            continue
        a = acceptance_prob(model, proposals, i, gamma_i, x, v)
        if a > 0.0:
            law[v] = law.get(v, 0.0) + q * a
        if a < 1.0:
            law[current] = law.get(current, 0.0) + q * (1.0 - a)
    return law


def mwg_coordinate_kernels(model: FiniteTargetModel, proposals: FiniteProposal,
                           gamma: Sequence | None = None,
                           states: Sequence[tuple] | None = None
                           ) -> tuple[list[tuple], list[np.ndarray]]:
    states = [tuple(s) for s in (model.enumerate_support() if states is None else states)]
    index = index_states(states)
    size = len(states)
    kernels = []
    for i in range(model.dimension):
        g = None if gamma is None else gamma[i]
        P = np.zeros((size, size))
        for row, s in enumerate(states):
            for v, p in mwg_step_law(model, proposals, i, g, s).items():
                if p == 0.0:
                    continue
                t = list(s)
                t[i] = v
                P[row, index[tuple(t)]] += p
        kernels.append(P)
    return states, kernels


def sup_row_tv(A: np.ndarray, B: np.ndarray) -> float:
    """``max_x ||A(x, .) - B(x, .)||_TV``."""
    return float(0.5 * np.abs(A - B).sum(axis=1).max())


def minorization_mass(Pm: np.ndarray, mu: np.ndarray) -> float:
    """Largest ``s`` with ``Pm(x, .) >= s mu(.)`` for every row ``x``."""
    support = mu > 0
    return float((Pm[:, support] / mu[support]).min())


def random_reversible_chain(size: int, rng: np.random.Generator,
                            sparsity: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Random reversible kernel from a symmetric weight matrix.

    ``P = W / rowsum(W)`` is reversible for ``pi`` proportional to the row
    sums. ``sparsity`` zeroes that fraction of off-diagonal weights, sparing
    a random path through all states so the chain stays irreducible; the
    diagonal is kept so it stays aperiodic.
    """
    W = rng.random((size, size))
    W = W + W.T
    if sparsity > 0:
        mask = rng.random((size, size)) < sparsity
        mask = np.triu(mask, 1)
        mask = mask | mask.T
        path = rng.permutation(size)
        mask[path[:-1], path[1:]] = False
        mask[path[1:], path[:-1]] = False
        W[mask] = 0.0
    np.fill_diagonal(W, np.diag(W) + 1e-3)
    rows = W.sum(axis=1)
    return W / rows[:, None], rows / rows.sum()


def is_stochastic(P: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.all(P >= -tol) and np.all(np.abs(P.sum(axis=1) - 1.0) <= tol))


def smallest_positive_power(P: np.ndarray, limit: int = 10_000) -> int:
    """Smallest ``m`` with every entry of ``P^m`` positive (primitive chains)."""
    Q = P.copy()
    for m in range(1, limit + 1):
        if np.all(Q > 0):
            return m
        Q = Q @ P
    raise ValueError(f"no positive power up to {limit}")

