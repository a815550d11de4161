"""Acceptance suite: one test per criterion at full scale.

Each test records a one-line verdict; the lines are printed at the end of the
pytest session (see conftest.py) and when this file is run as a script.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from adaptive_gibbs import counterexample as cx
from adaptive_gibbs import examples as ex
from adaptive_gibbs.cli import DEFAULT_SEED, main
from adaptive_gibbs.core import substream
from adaptive_gibbs.verify import finite_test_kernels, lipschitz_suite, mixture_suite, upgrade_suite

RESULTS: dict[int, str] = {}


def _record(k: int, name: str, passed: bool, detail: str) -> None:
    RESULTS[k] = f"criterion {k:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(RESULTS[k])
    assert passed, RESULTS[k]


def test_01_transience():
    t0 = time.perf_counter()
    s = cx.run_transience(replicas=100, steps=10 ** 5, seed=DEFAULT_SEED, threshold=500.0)
    elapsed = time.perf_counter() - t0
    pooled = s.pooled_growth
    spread = max(abs(g - pooled) for g in s.batch_growth) / pooled
    ok = s.frac_exceeding_threshold >= 0.95 and pooled > 0 and spread <= 0.2 and elapsed <= 120
    _record(1, "stairway transience", ok,
            f"frac X_n1>500 = {s.frac_exceeding_threshold:.2f}, pooled X_n1/n = {pooled:.4f}, "
            f"batch spread {spread:.3f}, {elapsed:.1f}s")


def test_02_truncated_ergodicity():
    t0 = time.perf_counter()
    grid = cx.log_grid(10 ** 6, 80)
    curve = cx.truncated_tv_curve(20, grid, cx.StairState(1, 1), cx.StairSchedule())
    elapsed = time.perf_counter() - t0
    tvs = [tv for _, tv in curve]
    below = [n for n, tv in curve if tv < 1e-3]
    tail = tvs[-10:]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    ok = bool(below) and decreasing and elapsed <= 60
    _record(2, "truncated M=20 exact TV < 1e-3 by n=1e6", ok,
            f"TV(n=1e6) = {tvs[-1]:.5f}, min TV = {min(tvs):.5f}, "
            f"eventually decreasing = {decreasing}, {elapsed:.1f}s")


@pytest.fixture(scope="module")
def kernels():
    return finite_test_kernels(substream(DEFAULT_SEED, 3))


def test_03_lipschitz(kernels):
    rows = lipschitz_suite(substream(DEFAULT_SEED, 4), 100, kernels)
    bad = sum(r.violations for r in rows)
    worst = max(r.worst_ratio for r in rows)
    _record(3, "Lipschitz bound", bad == 0,
            f"{sum(r.cases for r in rows)} pairs over {len(rows)} (model, eps) cells, "
            f"{bad} violations, worst TV/bound {worst:.3f}")


def test_04_mixture_identity(kernels):
    rows = mixture_suite(substream(DEFAULT_SEED, 5), 100, kernels)
    bad = sum(r.violations for r in rows)
    worst = max(r.worst_ratio for r in rows)
    _record(4, "mixture identity", bad == 0,
            f"{sum(r.cases for r in rows)} pairs, max entry error {worst:.2e}")


def test_05_strong_uniform_upgrade():
    rows = upgrade_suite(substream(DEFAULT_SEED, 6), 20)
    bad = sum(r.violations for r in rows)
    _record(5, "strong-uniform upgrade", bad == 0,
            f"20 chains, {bad} violations, worst s*pi/P^m* {rows[0].worst_ratio:.3f}")


def test_06_example2_gaps():
    parts = []
    ok = True
    for p in (0.3, 0.5, 0.7):
        last = ex.example2_gaps(p, 40)[-1]
        err = abs(last.p_gap_lower - (1 - p))
        ok &= last.q_gap < 1e-3 and err < 1e-3
        parts.append(f"p={p}: Q gap {last.q_gap:.1e}, |P gap - (1-p)| {err:.1e}")
    _record(6, "geometric gap example", ok, "; ".join(parts))


def test_07_dominance_soundness():
    scan = cx.dominance_scan(i_max=200, regimes=3)
    _record(7, "stochastic dominance soundness", not scan.counterexamples,
            f"{scan.checked} (state, n) checks, {len(scan.counterexamples)} counterexamples, "
            f"exact dominance from level {scan.exact_threshold}")


def test_08_glmm():
    t0 = time.perf_counter()
    model = ex.GlmmModel.synthetic()
    rng = substream(DEFAULT_SEED, 8)
    h = 1e-5
    worst_fd = 0.0
    for _ in range(100):
        x = rng.normal(size=model.dimension)
        g = ex.glmm_grad(model, x)
        for k in range(model.dimension):
            e = np.zeros(model.dimension)
            e[k] = h
            fd = (ex.glmm_log_posterior(model, x + e) - ex.glmm_log_posterior(model, x - e)) / (2 * h)
            worst_fd = max(worst_fd, abs(fd - g[k]) / max(1.0, abs(g[k])))
    adaptive = ex.glmm_run(model, "accept44", steps=10 ** 6, seed=DEFAULT_SEED)
    fixed = ex.glmm_run(model, "fixed", steps=10 ** 6, seed=DEFAULT_SEED + 1)
    elapsed = time.perf_counter() - t0
    rates_ok = all(0.39 <= r <= 0.49 for r in adaptive.accept_rates)
    gap = abs(adaptive.theta_mean - fixed.theta_mean)
    combined = math.hypot(adaptive.theta_se, fixed.theta_se)
    ok = worst_fd <= 1e-6 and rates_ok and gap <= 4 * combined and elapsed <= 300
    _record(8, "GLMM gradient, accept44 rates, agreement", ok,
            f"grad rel err {worst_fd:.1e}, rates [{min(adaptive.accept_rates):.3f}, "
            f"{max(adaptive.accept_rates):.3f}], theta {adaptive.theta_mean:.4f} vs "
            f"{fixed.theta_mean:.4f} (|diff|/se {gap / combined:.2f}), {elapsed:.0f}s")


def test_09_hoeffding():
    ests = cx.hoeffding_grid_check(substream(DEFAULT_SEED, 9))
    ok = all(e.within_bound for e in ests)
    worst = max(e.frequency - e.bound for e in ests)
    _record(9, "Hoeffding tail", ok,
            f"{len(ests)} (n, t) cells x 1e5 replicas, max(freq - bound) {worst:.3f}")


RERUNS = [
    ["counterexample", "--replicas", "10", "--steps", "10000"],
    ["truncated"],
    ["verify-bounds"],
    ["example2"],
    ["glmm", "--strategy", "accept44", "--steps", "20000"],
    ["glmm", "--strategy", "var24", "--steps", "20000"],
    ["glmm", "--strategy", "fixed", "--steps", "20000"],
]


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_10_determinism(tmp_path):
    same = 0
    for k, argv in enumerate(RERUNS):
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / f"{k}{rep}"
            main(argv + ["--out", str(out)])
            outs.append(_files(out))
        same += outs[0] == outs[1] and bool(outs[0])
    _record(10, "byte-identical reruns", same == len(RERUNS),
            f"{same}/{len(RERUNS)} subcommand configs reproduced byte for byte")


if __name__ == "__main__":
    import sys
    import tempfile
    from pathlib import Path

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    shared = finite_test_kernels(substream(DEFAULT_SEED, 3))
    for fn in tests:
        try:
            if fn.__code__.co_varnames[:1] == ("kernels",):
                fn(shared)
            elif fn.__code__.co_argcount == 1:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
