"""Closed-form bounds checked against exact finite kernels.

Each suite returns ``CheckRow`` records; a row passes when it has zero
violations. ``worst_ratio`` is the largest observed value of
(exact quantity)/(bound), or the largest error for identities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FiniteProductModel, LatticeRandomWalk, SelectionProbs
from .counterexample import StairwayModel
from .finite import (
    gibbs_coordinate_kernels,
    minorization_mass,
    mixture_kernel,
    mwg_coordinate_kernels,
    random_reversible_chain,
    smallest_positive_power,
    sup_row_tv,
)
from .theory import kernel_lipschitz_bound, mixture_residual, strong_unif_upgrade

MIXTURE_TOL = 1e-12


@dataclass
class CheckRow:
    check: str
    model: str
    epsilon: float | None
    cases: int
    violations: int
    worst_ratio: float

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {"check": self.check, "model": self.model, "epsilon": self.epsilon,
                "cases": self.cases, "violations": self.violations,
                "worst_ratio": self.worst_ratio, "passed": self.passed}


def random_in_y(d: int, epsilon: float, rng: np.random.Generator) -> SelectionProbs:
    """A point of ``[eps, 1]^d`` on the simplex: ``eps + (1 - d eps) * Dirichlet(1)``."""
    w = rng.dirichlet(np.ones(d))
    probs = epsilon + (1.0 - d * epsilon) * w
    probs[-1] = 1.0 - probs[:-1].sum()
    return SelectionProbs(tuple(float(v) for v in probs), epsilon)


def finite_test_kernels(rng: np.random.Generator) -> dict[str, list[np.ndarray]]:
    """Coordinate kernels of the finite test models, keyed by name."""
    models = {}
    _, models["stairway_M10_gibbs"] = gibbs_coordinate_kernels(StairwayModel(10))
    w2 = rng.random((4, 5)) + 0.05
    _, models["product2_gibbs"] = gibbs_coordinate_kernels(FiniteProductModel(w2))
    w3 = rng.random((3, 4, 3)) + 0.05
    w3[0, 0, 0] = 0.0
    prod3 = FiniteProductModel(w3)
    _, models["product3_gibbs"] = gibbs_coordinate_kernels(prod3)
    walk = LatticeRandomWalk((-1, 1), (0.5, 0.5))
    _, models["product3_mwg"] = mwg_coordinate_kernels(prod3, walk)
    return models


EPSILONS = (0.05, 0.1, 0.25)


def lipschitz_suite(rng: np.random.Generator, pairs: int = 100,
                    models: dict | None = None) -> list[CheckRow]:
    """``sup_x ||P_a(x,.) - P_a'(x,.)|| <= delta/(eps+delta)`` for random pairs in ``Y``."""
    models = finite_test_kernels(rng) if models is None else models
    rows = []
    for name, kernels in models.items():
        d = len(kernels)
        for eps in EPSILONS:
            if eps * d > 1.0:
                continue
            bad = 0
            worst = 0.0
            for _ in range(pairs):
                a = random_in_y(d, eps, rng)
                b = random_in_y(d, eps, rng)
                exact = sup_row_tv(mixture_kernel(kernels, a), mixture_kernel(kernels, b))
                bound = kernel_lipschitz_bound(a, b)
                if exact > bound:
                    bad += 1
                if bound > 0:
                    worst = max(worst, exact / bound)
            rows.append(CheckRow("lipschitz", name, eps, pairs, bad, worst))
    return rows


def mixture_suite(rng: np.random.Generator, pairs: int = 100,
                  models: dict | None = None) -> list[CheckRow]:
    """``P_alpha == r P_beta + (1 - r) P_q`` entrywise to ``1e-12``."""
    models = finite_test_kernels(rng) if models is None else models
    rows = []
    for name, kernels in models.items():
        d = len(kernels)
        eps = 0.05
        bad = 0
        worst = 0.0
        for _ in range(pairs):
            a = random_in_y(d, eps, rng)
            b = random_in_y(d, eps, rng)
            r, q = mixture_residual(a, b)
            lhs = mixture_kernel(kernels, a)
            rhs = r * mixture_kernel(kernels, b) + (1.0 - r) * mixture_kernel(kernels, q)
            err = float(np.abs(lhs - rhs).max())
            worst = max(worst, err)
            if not err < MIXTURE_TOL:
                bad += 1
        rows.append(CheckRow("mixture", name, eps, pairs, bad, worst))
    return rows


def upgrade_suite(rng: np.random.Generator, chains: int = 20) -> list[CheckRow]:
    """Random reversible chains: certify ``P^m >= s mu`` for a random ``mu``,
    upgrade, and test ``P^{m*} >= s* pi`` entrywise."""
    bad = 0
    worst = 0.0
    for _ in range(chains):
        size = int(rng.integers(4, 13))
        P, pi = random_reversible_chain(size, rng, sparsity=float(rng.uniform(0.0, 0.6)))
        mu = rng.dirichlet(np.ones(size))
        m = smallest_positive_power(P)
        s = minorization_mass(np.linalg.matrix_power(P, m), mu)
        s = min(s, 0.999)
        cert = strong_unif_upgrade(m, s)
        Pm = np.linalg.matrix_power(P, cert.m)
        floor = cert.s * pi
        if np.any(Pm < floor):
            bad += 1
        worst = max(worst, float((floor / Pm).max()))
    return [CheckRow("strong_uniform", "random_reversible", None, chains, bad, worst)]


def run_all(rng: np.random.Generator, pairs: int = 100, chains: int = 20) -> list[CheckRow]:
    models = finite_test_kernels(rng)
    return (lipschitz_suite(rng, pairs, models) + mixture_suite(rng, pairs, models)
            + upgrade_suite(rng, chains))
