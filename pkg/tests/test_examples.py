from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_gibbs.core import SelectionProbs
from adaptive_gibbs.errors import DimensionMismatch, ScaleOutOfRange, TruncationTooSmall
from adaptive_gibbs.examples import (
    GaussianRandomWalk,
    GlmmAdaptation,
    GlmmModel,
    ScaleRange,
    batch_means,
    example2_gaps,
    geometric_metropolis_row,
    geometric_q_gap,
    geometric_qn_normalizer,
    geometric_qn_pmf,
    geometric_to_zero,
    geometric_truncation,
    gaussian_rw_proposal,
    glmm_grad,
    glmm_log_posterior,
    glmm_run,
    scale_adapt_update,
    variance_adapt_update,
)
from adaptive_gibbs.samplers import run_adaptive_chain
from adaptive_gibbs.theory import tv_finite


def test_qn_examples():
    q = geometric_qn_pmf(1, 0.5, 60)
    assert geometric_qn_normalizer(1, 0.5) == 1.75
    assert q[0] == pytest.approx(1 / 1.75, rel=1e-11)
    assert q[1] == pytest.approx(0.25 / 1.75, rel=1e-11)
    assert abs(q.sum() - 1) < 1e-12
    with pytest.raises(TruncationTooSmall):
        geometric_qn_pmf(5, 0.5, 6)
    with pytest.raises(TruncationTooSmall):
        geometric_qn_pmf(5, 0.5, 30)


def test_truncation_choice():
    for p in (0.3, 0.5, 0.7, 0.9):
        K = geometric_truncation(p, 40)
        assert p ** (K + 1) < 1e-12 and K >= 43
        assert K == 43 or p ** K >= 1e-12


def test_metropolis_rows():
    p, K = 0.5, 60
    for n in (1, 5, 20):
        for j in (0, 1, n, n + 1, 30):
            row = geometric_metropolis_row(n, p, K, j)
            assert abs(row.sum() - 1) < 1e-12 and np.all(row >= 0)
            if j >= 1:
                assert row[0] == pytest.approx(geometric_to_zero(n, p, K, j), rel=1e-12)


def test_p_gap_and_q_gap():
    for p in (0.3, 0.5, 0.7):
        gaps = example2_gaps(p, 40)
        q = [g.q_gap for g in gaps]
        assert q[-1] < 1e-3
        assert abs(gaps[-1].p_gap_lower - (1 - p)) < 1e-3
        # eventually monotone: decreasing over the last half
        assert all(b < a for a, b in zip(q[2:], q[3:]))
    # closed form against direct TV where cancellation is harmless,
    # and against q_{n+1}(n) - q_n(n) up to the change of normalizer
    for p in (0.3, 0.5, 0.9):
        K = geometric_truncation(p, 40)
        for n in (1, 2, 3, 6, 10):
            gap = geometric_q_gap(n, p, K)
            direct_tv = tv_finite(geometric_qn_pmf(n + 1, p, K), geometric_qn_pmf(n, p, K))
            assert gap == pytest.approx(direct_tv, rel=1e-9)
            lead = geometric_qn_pmf(n + 1, p, K)[n] - geometric_qn_pmf(n, p, K)[n]
            assert lead <= gap + 1e-15


def test_glmm_log_posterior_examples():
    assert glmm_log_posterior(GlmmModel((0,)), [0.0, 0.0]) == -1.0
    assert glmm_log_posterior(GlmmModel((2, 3)), [0.0, 0.0, 0.0]) == -2.0
    with pytest.raises(DimensionMismatch):
        glmm_log_posterior(GlmmModel((2, 3)), [0.0, 0.0])


def test_glmm_grad_examples():
    assert glmm_grad(GlmmModel((0,)), [0.0, 0.0]) == pytest.approx([-1.0, -1.0])
    model = GlmmModel((3,))
    for x in np.linspace(0, 50, 101):
        g = glmm_grad(model, [x, 0.2])
        assert g[0] <= 3 - x
    assert glmm_grad(model, [50.0, 0.0])[0] < -1e20


def test_glmm_grad_finite_differences():
    rng = np.random.default_rng(8)
    model = GlmmModel.synthetic()
    h = 1e-5
    for _ in range(100):
        x = rng.normal(size=model.dimension)
        g = glmm_grad(model, x)
        for k in range(model.dimension):
            e = np.zeros(model.dimension)
            e[k] = h
            fd = (glmm_log_posterior(model, x + e) - glmm_log_posterior(model, x - e)) / (2 * h)
            assert abs(fd - g[k]) <= 1e-6 * max(1.0, abs(g[k]))


def test_synthetic_data_is_fixed():
    a = GlmmModel.synthetic()
    assert a.y == GlmmModel.synthetic().y
    assert a.dimension == 6


def test_gaussian_proposal():
    k = gaussian_rw_proposal(1.0)
    assert k.density(0.3, 0.3) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
    assert k.density(0.0, 1.0) == pytest.approx(0.24197072451914337, rel=1e-14)
    assert gaussian_rw_proposal(2.5).density(0.1, 1.7) == gaussian_rw_proposal(2.5).density(1.7, 0.1)
    with pytest.raises(ScaleOutOfRange):
        gaussian_rw_proposal(1000.0)
    fam = GaussianRandomWalk(2)
    assert fam.symmetric and fam.check_param(0, 5.0) and not fam.check_param(0, 0.001)


def test_scale_updates():
    assert scale_adapt_update(1.0, True, 1) == pytest.approx(math.exp(0.56), rel=1e-15)
    assert scale_adapt_update(1.0, False, 1) == pytest.approx(math.exp(-0.44), rel=1e-15)
    assert scale_adapt_update(100.0, True, 1) == 100.0
    with pytest.raises(ScaleOutOfRange):
        scale_adapt_update(200.0, True, 1)
    assert variance_adapt_update(1.0) == pytest.approx(5.76)
    assert variance_adapt_update(0.0) == 0.01
    assert variance_adapt_update(100.0, ScaleRange(0.01, 10.0)) == 10.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 100.0), st.booleans(), st.integers(1, 10 ** 9))
def test_scale_update_envelope(g, acc, n):
    out = scale_adapt_update(g, acc, n)
    assert 0.01 <= out <= 100.0
    assert abs(math.log(out) - math.log(g)) <= n ** -0.6 + 1e-12


@pytest.mark.parametrize("strategy", ["accept44", "var24"])
def test_adaptive_runs_respect_clamp_and_envelope(strategy):
    model = GlmmModel.synthetic()
    d = model.dimension
    rng_range = ScaleRange(0.05, 20.0)
    rule = GlmmAdaptation(strategy, d, scale_range=rng_range, warmup=200, refresh=50)
    a0 = SelectionProbs.uniform(d, 0.05)
    trace = run_adaptive_chain(model, GaussianRandomWalk(d, rng_range), rule,
                               model.state([0.0] * d), a0, [1.0] * d, 20_000, 3)
    g = trace.gammas[1:]
    assert g.min() >= 0.05 and g.max() <= 20.0
    n = np.arange(2, trace.alphas.shape[0])
    da = np.abs(np.diff(trace.alphas[1:], axis=0)).max(axis=1)
    assert np.all(da <= n ** -0.6 + 1e-12)
    assert trace.alphas[1:].min() >= 0.05 - 1e-12
    if strategy == "accept44":
        dg = np.abs(np.diff(np.log(g), axis=0)).max(axis=1)
        assert np.all(dg <= n ** -0.6 + 1e-12)


def test_batch_means():
    x = np.arange(64, dtype=float)
    m, se = batch_means(x, 32)
    assert m == 31.5
    assert se == pytest.approx(np.std(np.arange(0.5, 64, 2), ddof=1) / math.sqrt(32))


def test_glmm_run_smoke():
    model = GlmmModel.synthetic()
    s = glmm_run(model, "fixed", steps=5000, seed=1)
    d = s.as_dict()
    for key in ("theta_mean", "theta_se", "accept_rates", "gamma_final", "seed", "steps", "strategy"):
        assert key in d
    assert math.isfinite(s.theta_mean) and s.theta_se > 0
    assert s.gamma_final == [5.76] * 6
    assert glmm_run(model, "fixed", steps=5000, seed=1).as_dict() == d
