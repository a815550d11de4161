"""Closed-form ergodicity constants for random-scan samplers.

All distances between selection probabilities use the max norm: the mixture
argument only needs ``min_i alpha'_i / alpha_i >= eps / (eps + max_i |alpha_i - alpha'_i|)``,
so under that norm the Lipschitz bound is as tight as it gets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EXACT_TOL, SUM_TOL, SelectionProbs
from .errors import (
    BadEpsilon,
    BadExponent,
    BadMass,
    DimensionMismatch,
    LengthMismatch,
    NoFeasibleExponent,
    NotNormalized,
)

STATIONARY = "stationary"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class MinorizationCertificate:
    """``P^m(x, .) >= s * mu(.)`` for every ``x``.

    ``measure_kind`` is ``"stationary"`` when ``mu`` is the target itself and
    ``"explicit"`` when ``measure`` carries a finite probability vector.
    """

    m: int
    s: float
    measure_kind: str = EXPLICIT
    measure: tuple | None = None

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise BadMass(f"step count must be a positive integer, got {self.m!r}")
        if not (0.0 < self.s <= 1.0):
            raise BadMass(f"mass must lie in (0, 1], got {self.s!r}")
        if self.measure_kind not in (STATIONARY, EXPLICIT):
            raise ValueError(f"unknown measure kind {self.measure_kind!r}")


def tv_finite(p: Sequence[float], q: Sequence[float]) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise LengthMismatch(f"lengths {p.size} and {q.size} differ")
    for name, v in (("p", p), ("q", q)):
        if abs(math.fsum(v) - 1.0) > SUM_TOL:
            raise NotNormalized(f"{name} sums to {math.fsum(v)!r}")
    return min(1.0, max(0.0, 0.5 * math.fsum(np.abs(p - q))))


def mixture_coefficient(alpha: SelectionProbs, beta: SelectionProbs) -> float:
    """``r = min_i alpha_i / beta_i``, the weight of ``P_beta`` inside ``P_alpha``."""
    if alpha.d != beta.d:
        raise DimensionMismatch("selection probabilities differ in dimension")
    return min(a / b for a, b in zip(alpha.probs, beta.probs))


def mixture_residual(alpha: SelectionProbs, beta: SelectionProbs) -> tuple[float, np.ndarray]:
    """``(r, q)`` with ``alpha = r*beta + (1-r)*q`` and ``q`` a probability vector.

    When ``r == 1`` the residual weight is zero and ``q`` is returned as
    ``alpha`` itself.
    """
    r = mixture_coefficient(alpha, beta)
    a = alpha.as_array()
    if r >= 1.0 - EXACT_TOL:
        return r, a
    q = (a - r * beta.as_array()) / (1.0 - r)
    q = np.clip(q, 0.0, None)
    return r, q / q.sum()


def kernel_lipschitz_bound(alpha: SelectionProbs, alpha_prime: SelectionProbs) -> float:
    """``delta / (eps + delta)`` with ``delta`` the max-norm distance.

    Bounds ``sup_x ||P_alpha(x, .) - P_alpha'(x, .)||_TV`` for any target; when
    the two points were validated with different ``eps`` the smaller is used.
    """
    delta = alpha.sup_distance(alpha_prime)
    eps = min(alpha.epsilon, alpha_prime.epsilon)
    return delta / (eps + delta)


def uniform_bound(cert: MinorizationCertificate, epsilon: float, d: int, n: int) -> float:
    """TV bound ``(1 - (eps/(1-(d-1)eps))^m s)^floor(n/m)`` valid for every
    ``alpha`` in ``Y`` given a certificate for some ``beta`` in ``Y``."""
    if d < 2 or not (0.0 < epsilon <= 1.0 / d + EXACT_TOL):
        raise BadEpsilon(f"epsilon must lie in (0, 1/{d}], got {epsilon!r}")
    if n < 0:
        raise ValueError("n must be non-negative")
    ratio = min(1.0, epsilon / (1.0 - (d - 1) * epsilon))
    return (1.0 - ratio ** cert.m * cert.s) ** (n // cert.m)


def guarded_floor(x: float, band: float = EXACT_TOL) -> int:
    """``floor(x)``, except values within ``band`` of an integer snap to it."""
    nearest = round(x)
    if abs(x - nearest) <= band * max(1.0, abs(x)):
        return int(nearest)
    return math.floor(x)


def strong_unif_upgrade(m: int, s: float) -> MinorizationCertificate:
    """From ``P^m >= s*mu`` for a reversible ``P`` to ``P^{m*} >= s* pi`` with
    ``m* = (floor(log(s/4)/log(1-s)) + 2) m`` and ``s* = s^2/8``."""
    if not (0.0 < s < 1.0):
        raise BadMass(f"mass must lie in (0, 1), got {s!r}")
    if int(m) != m or m < 1:
        raise BadMass(f"step count must be a positive integer, got {m!r}")
    k = guarded_floor(math.log(s / 4.0) / math.log1p(-s))
    return MinorizationCertificate((k + 2) * int(m), s * s / 8.0, STATIONARY)


def systematic_minorization(cert_systematic: MinorizationCertificate, d: int) -> MinorizationCertificate:
    """Certificate for the uniform random scan from one for the systematic
    scan ``P_1 P_2 ... P_d``: the random scan repeats the systematic order over
    ``m*d`` steps with probability ``(1/d)^(m*d)``."""
    if d < 2:
        raise DimensionMismatch("need at least 2 coordinates")
    steps = cert_systematic.m * d
    return MinorizationCertificate(steps, (1.0 / d) ** steps * cert_systematic.s,
                                   cert_systematic.measure_kind, cert_systematic.measure)


def drift_rate_r(s: float) -> float:
    """``1 + s (1-s)^(1/s - 1)``: worst one-step growth of ``pi^-s`` under any
    symmetric Metropolis update."""
    if not (0.0 < s < 1.0):
        raise BadExponent(f"exponent must lie in (0, 1), got {s!r}")
    return 1.0 + s * math.exp((1.0 / s - 1.0) * math.log1p(-s))


def drift_exponent_select(epsilon: float, xi: float, max_halvings: int = 40) -> float:
    """Largest ``s`` in ``{2^-1, ..., 2^-40}`` with
    ``r(s) < 1 + eps*xi / (1 - 2*eps*xi)``."""
    if not (xi > 0.0) or xi > 1.0:
        raise NoFeasibleExponent(f"xi must lie in (0, 1], got {xi!r}")
    if not (0.0 < epsilon <= 0.5):
        raise BadEpsilon(f"epsilon must lie in (0, 1/2], got {epsilon!r}")
    ex = epsilon * xi
    if ex >= 0.5:
        raise NoFeasibleExponent("eps*xi must be below 1/2")
    threshold = 1.0 + ex / (1.0 - 2.0 * ex)
    for k in range(1, max_halvings + 1):
        s = 2.0 ** -k
        if drift_rate_r(s) < threshold:
            return s
    raise NoFeasibleExponent(f"no grid exponent satisfies r(s) < {threshold!r}")


def metropolis_drift_ratios(log_pi: np.ndarray, offsets: Sequence[int],
                            probs: Sequence[float], s: float) -> np.ndarray:
    """Exact ``P V_s(x) / V_s(x)`` with ``V_s = pi^-s`` for a random-walk
    Metropolis kernel on a 1-D grid, at every point whose neighbours all lie
    on the grid."""
    log_pi = np.asarray(log_pi, dtype=float)
    lo = -min(0, min(offsets))
    hi = log_pi.size - max(0, max(offsets))
    xs = np.arange(lo, hi)
    out = np.zeros(xs.size)
    for off, q in zip(offsets, probs):
        diff = log_pi[xs + off] - log_pi[xs]
        acc = np.minimum(1.0, np.exp(diff))
        out += q * (acc * np.exp(-s * diff) + (1.0 - acc))
    return out
