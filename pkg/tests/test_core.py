from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_gibbs.core import (
    Axis,
    FiniteProductModel,
    LatticeRandomWalk,
    ProductState,
    SelectionProbs,
    finite_range,
    inverse_cdf_index,
    project_to_simplex,
    substream,
    validate_selection_probs,
)
from adaptive_gibbs.counterexample import StairwayModel
from adaptive_gibbs.errors import (
    BadEpsilon,
    DimensionMismatch,
    EntryBelowEpsilon,
    StateOutOfSpace,
    SumNotOne,
)
from adaptive_gibbs.examples import GeometricModel, GlmmModel


def test_selection_probs_examples():
    assert validate_selection_probs((0.5, 0.5), 0.5).probs == (0.5, 0.5)
    assert validate_selection_probs((0.9, 0.1), 0.1).d == 2
    with pytest.raises(EntryBelowEpsilon):
        validate_selection_probs((0.95, 0.05), 0.1)
    with pytest.raises(SumNotOne):
        validate_selection_probs((0.5, 0.6), 0.1)
    with pytest.raises(BadEpsilon):
        validate_selection_probs((0.5, 0.5), 0.6)
    with pytest.raises(DimensionMismatch):
        validate_selection_probs((1.0,), 0.5)


def test_uniform_and_distance():
    u = SelectionProbs.uniform(4)
    assert u.probs == (0.25,) * 4
    a = SelectionProbs((0.7, 0.2, 0.1), 0.1)
    b = SelectionProbs((0.5, 0.3, 0.2), 0.1)
    assert a.sup_distance(b) == pytest.approx(0.2)


def test_projection_examples():
    assert project_to_simplex((0.5, 0.5), 0.2).probs == pytest.approx((0.5, 0.5))
    assert project_to_simplex((1.0, 0.0), 0.2).probs == pytest.approx((0.8, 0.2))


def test_projection_matches_grid_search():
    target = np.array([0.7, 0.2, 0.1])
    eps = 0.1
    got = project_to_simplex(target, eps).as_array()
    # brute force over Y at resolution 1e-4
    best, best_d = None, np.inf
    h = 1e-4
    for a in np.arange(eps, 1 - 2 * eps + h / 2, h):
        b = np.arange(eps, 1 - eps - a + h / 2, h)
        c = 1.0 - a - b
        ok = c >= eps - 1e-12
        d2 = (a - target[0]) ** 2 + (b[ok] - target[1]) ** 2 + (c[ok] - target[2]) ** 2
        if d2.size and d2.min() < best_d:
            k = int(d2.argmin())
            best_d, best = d2[k], np.array([a, b[ok][k], c[ok][k]])
    assert np.allclose(got, best, atol=1e-4)
    # the grid optimum cannot beat the exact projection
    assert np.sum((got - target) ** 2) <= best_d + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=6), st.floats(0.0, 1.0))
def test_projection_round_trip(v, frac):
    d = len(v)
    eps = frac / d * 0.999 + 1e-6
    out = project_to_simplex(v, eps)
    validate_selection_probs(out.probs, eps)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=5))
def test_projection_is_idempotent_inside_y(w):
    d = len(w)
    eps = 0.05
    raw = np.array(w) + 1e-3
    p = eps + (1 - d * eps) * raw / raw.sum()
    p[-1] = 1 - p[:-1].sum()
    assert np.allclose(project_to_simplex(p, eps).as_array(), p, atol=1e-12)


def test_inverse_cdf_ties_go_low():
    probs = (0.25, 0.25, 0.5)
    assert inverse_cdf_index(probs, 0.0) == 0
    assert inverse_cdf_index(probs, 0.25) == 0
    assert inverse_cdf_index(probs, 0.2500001) == 1
    assert inverse_cdf_index(probs, 0.5) == 1
    assert inverse_cdf_index(probs, 0.99) == 2


def test_substreams_are_reproducible_and_distinct():
    a = substream(7, 3).random(5)
    b = substream(7, 3).random(5)
    c = substream(7, 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_product_state_space_checks():
    space = (finite_range(0, 3), Axis("integer"))
    s = ProductState((2, -7), space)
    assert s.with_coord(0, 3).coords == (3, -7)
    with pytest.raises(StateOutOfSpace):
        ProductState((4, 0), space)
    with pytest.raises(StateOutOfSpace):
        s.with_coord(1, 0.5)


def _shipped_models(rng):
    return [
        FiniteProductModel(rng.random((3, 4)) + 0.1),
        StairwayModel(8),
        GeometricModel(0.5, 60),
    ]


def test_conditionals_consistent_with_joint():
    rng = np.random.default_rng(0)
    for model in _shipped_models(rng):
        support = model.enumerate_support()
        for _ in range(1000):
            x = list(support[rng.integers(len(support))])
            i = int(rng.integers(model.dimension))
            vals = model.conditional_support(i, x)
            v, w = rng.choice(len(vals), 2)
            v, w = vals[v], vals[w]
            lhs = model.conditional_log_density(i, x, v) - model.conditional_log_density(i, x, w)
            xv, xw = list(x), list(x)
            xv[i], xw[i] = v, w
            assert lhs == pytest.approx(model.log_density(xv) - model.log_density(xw), abs=1e-12)


def test_glmm_conditionals_consistent_with_joint():
    rng = np.random.default_rng(1)
    model = GlmmModel.synthetic()
    for _ in range(1000):
        x = rng.normal(size=model.dimension)
        i = int(rng.integers(model.dimension))
        v, w = rng.normal(size=2) * 2
        xv, xw = x.copy(), x.copy()
        xv[i], xw[i] = v, w
        lhs = model.conditional_log_density(i, x, v) - model.conditional_log_density(i, x, w)
        assert lhs == pytest.approx(model.log_density(xv) - model.log_density(xw), abs=1e-9)


def test_finite_conditionals_normalize():
    rng = np.random.default_rng(2)
    for model in _shipped_models(rng):
        for x in model.enumerate_support():
            for i in range(model.dimension):
                _, probs = model.conditional_pmf(i, x)
                assert abs(sum(probs) - 1.0) < 1e-12


def test_lattice_walk_symmetric_and_normalized():
    walk = LatticeRandomWalk((-2, -1, 1, 2), (0.1, 0.4, 0.4, 0.1))
    assert walk.symmetric
    for a, b in itertools.product(range(-3, 4), repeat=2):
        assert walk.log_proposal_density(0, None, [a], a, b) == walk.log_proposal_density(0, None, [b], b, a)
    vals, probs = walk.proposal_support(0, None, [0], 0)
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)
