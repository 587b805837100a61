"""Exit criteria for the package, each at its pinned tolerance.

Run ``pytest tests/test_acceptance.py -v`` to see one PASS/FAIL line per
criterion in the terminal summary.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from shrinkrank.bench import DEFAULT_GRID, build_target
from shrinkrank.cli import main
from shrinkrank.diagnostics import efficiency_report, worst_coordinate_report
from shrinkrank.projection import OrthoBasis, extend, project
from shrinkrank.rng import RandomSource, TransformedSource
from shrinkrank.samplers import AdaptiveMetropolisSampler, ShrinkingRankSampler, run_chain
from shrinkrank.targets import finite_diff_grad, transformed_target

SUITE = ["n4", "eight-schools", "german-credit", "gp-logged", "gp-unlogged",
         "gamma-product:2", "gamma-product:20"]


# -- 1 ---------------------------------------------------------------------------------

def test_projection_algebra(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for p in (2, 5, 50):
        for _ in range(1000):
            J = OrthoBasis(p)
            for _ in range(rng.integers(0, p)):
                J = extend(J, project(J, rng.standard_normal(p)))
            M = J.matrix
            worst = max(worst, np.max(np.abs(M.T @ M - np.eye(M.shape[1])), initial=0.0))
            assert J.n_columns <= p - 1
            v = rng.standard_normal(p)
            pv = project(J, v)
            worst = max(worst, np.max(np.abs(project(J, pv) - pv)))
            worst = max(worst, np.max(np.abs(M.T @ pv), initial=0.0))
            assert np.linalg.norm(pv) <= np.linalg.norm(v) + 1e-12
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5.0
    criterion(1, "projection algebra", ok, f"max violation {worst:.1e}, {elapsed:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------------------

def interior_points(spec, target, rng, n=20):
    x0 = target.default_initial_point()
    for _ in range(n):
        if spec.startswith("gamma"):
            yield rng.uniform(0.5, 4.0, target.dim)
        elif spec == "eight-schools":
            yield np.r_[rng.normal(8, 8, 8), rng.normal(8, 3), rng.uniform(0, 3)]
        elif spec == "german-credit":
            yield rng.normal(0, 0.02, target.dim)
        elif spec == "gp-unlogged":
            yield np.exp(x0 + rng.normal(0, 0.5, 3))
        else:
            yield x0 + rng.normal(0, 0.5, target.dim)


def test_gradient_oracle(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    details = []
    ok = True
    for spec in SUITE:
        target = build_target(spec)
        tol = 1e-4 if spec.startswith("gp") else 1e-5
        worst = 0.0
        for x in interior_points(spec, target, rng):
            g = target.grad_log_density(x)
            fd = finite_diff_grad(target, x, 1e-5)
            worst = max(worst, np.max(np.abs(g - fd)) / np.max(np.abs(g)))
        ok &= worst < tol
        details.append(f"{spec}={worst:.0e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    criterion(2, "gradient oracle", ok, ", ".join(details) + f"; {elapsed:.1f}s")
    assert ok


# -- 3 ---------------------------------------------------------------------------------

def moment_checks(x, mean, var):
    """z-scores of the sample mean and variance, using autocorrelation-aware SEs."""
    n = len(x)
    tau_m = efficiency_report_series(x)
    sq = (x - x.mean()) ** 2
    tau_v = efficiency_report_series(sq)
    z_mean = (x.mean() - mean) / (x.std() * math.sqrt(tau_m / n))
    z_var = (x.var() - var) / (sq.std() * math.sqrt(tau_v / n))
    return z_mean, z_var, tau_m


def efficiency_report_series(series):
    from shrinkrank.diagnostics import autocorrelation_time
    return autocorrelation_time(series)[0]


def test_distributional_correctness(criterion):
    start = time.perf_counter()
    cases = [
        ("gaussian:1", 0, 1.0, stats.norm().cdf),
        ("gamma-product:2", 2.0, 2.0, stats.gamma(2.0).cdf),
    ]
    ok = True
    details = []
    for i, (spec, mean, var, cdf) in enumerate(cases):
        target = build_target(spec)
        chain = ShrinkingRankSampler(sigma_c=1.0).sample(target, None, 60_000,
                                                         RandomSource(30 + i))
        kept = chain.states[6000:]
        for j in range(target.dim):
            x = kept[:, j]
            z_mean, z_var, tau = moment_checks(x, mean, var)
            thinned = x[:: int(math.ceil(tau))]
            pval = stats.kstest(thinned, cdf).pvalue
            good = abs(z_mean) < 4 and abs(z_var) < 4 and pval > 1e-3
            ok &= good
            details.append(f"{spec}[{j}] z=({z_mean:+.1f},{z_var:+.1f}) ks_p={pval:.2f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    criterion(3, "distributional correctness", ok, "; ".join(details) + f"; {elapsed:.0f}s")
    assert ok


# -- 4 ---------------------------------------------------------------------------------

def test_equivariance(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for spec in ("n4", "gamma-product:2", "eight-schools"):
        base = build_target(spec)
        p = base.dim
        q, r = np.linalg.qr(rng.normal(size=(p, p)))
        R = q * np.sign(np.diag(r))
        b = rng.normal(scale=3.0, size=p)
        x0 = base.default_initial_point()
        sampler = ShrinkingRankSampler(sigma_c=1.0)
        ref = run_chain(sampler, base, x0, 100, RandomSource(40))
        for RR, bb in ((R, np.zeros(p)), (np.eye(p), b), (R, b)):
            moved = transformed_target(base, RR, bb)
            got = run_chain(sampler, moved, RR @ x0 + bb, 100,
                            TransformedSource(RandomSource(40), RR))
            worst = max(worst, np.max(np.abs(got.states - (ref.states @ RR.T + bb))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10
    criterion(4, "rotation/translation equivariance", ok,
              f"max deviation {worst:.1e}, {elapsed:.1f}s")
    assert ok


# -- 5 ---------------------------------------------------------------------------------

def test_schedule_and_termination(criterion):
    start = time.perf_counter()
    steps = 0
    worst_crumbs = 0
    per_run = 480  # 7 targets x 3 sigma_c x 480 = 10,080 steps
    for spec in SUITE:
        target = build_target(spec)
        for sigma_c in (1e-3, 1.0, 1e3):
            # raises MaxCrumbsError or AssertionError on failure
            chain = ShrinkingRankSampler(sigma_c=sigma_c, debug=True).sample(
                target, None, per_run, RandomSource(50))
            steps += len(chain)
            worst_crumbs = max(worst_crumbs, int(chain.n_crumbs.max()))
    elapsed = time.perf_counter() - start
    ok = steps >= 10_000 and elapsed < 120
    criterion(5, "sigma schedule and termination", ok,
              f"{steps} debug steps, max {worst_crumbs} crumbs/step, {elapsed:.0f}s")
    assert ok


# -- 6 ---------------------------------------------------------------------------------

def best_metric(spec, grid, n, seed):
    target = build_target(spec)
    best = (math.inf, None)
    for i, s in enumerate(grid):
        chain = ShrinkingRankSampler(sigma_c=s).sample(target, None, n,
                                                       RandomSource(seed).spawn(i))
        try:
            m = worst_coordinate_report(chain).evals_per_indep_obs
        except ValueError:
            continue
        best = min(best, (m, s))
    return best


def test_dimension_scaling(criterion):
    start = time.perf_counter()
    m2, s2 = best_metric("gamma-product:2", DEFAULT_GRID, 60_000, 60)
    m20, s20 = best_metric("gamma-product:20", DEFAULT_GRID, 60_000, 61)
    ratio = m20 / m2
    elapsed = time.perf_counter() - start
    ok = 3 <= ratio <= 30 and elapsed < 600
    criterion(6, "Gamma-product dimension scaling", ok,
              f"d=2 best {m2:.1f} (sigma_c={s2:.3g}), d=20 best {m20:.1f} "
              f"(sigma_c={s20:.3g}), ratio {ratio:.1f}, {elapsed:.0f}s")
    assert ok


# -- 7 & 8 ---------------------------------------------------------------------------------

N4_GRID = (0.1, 0.3, 1.0, 3.0, 10.0)


@pytest.fixture(scope="module")
def n4_grid_metrics():
    target = build_target("n4")
    out = {}
    for i, s in enumerate(N4_GRID):
        chain = ShrinkingRankSampler(sigma_c=s).sample(target, None, 50_000,
                                                       RandomSource(70).spawn(i))
        try:
            out[s] = worst_coordinate_report(chain).evals_per_indep_obs
        except ValueError:
            out[s] = None
    return out


def test_tuning_robustness(criterion, n4_grid_metrics):
    values = list(n4_grid_metrics.values())
    estimable = all(v is not None for v in values)
    ratio = max(values) / min(values) if estimable else math.inf
    ok = estimable and ratio < 10
    detail = ", ".join(f"{s:g}:{v:.0f}" if v else f"{s:g}:?" for s, v in n4_grid_metrics.items())
    criterion(7, "N4 tuning robustness", ok, f"{detail}; max/min {ratio:.0f}")
    assert ok


def test_adaptive_metropolis_sanity(criterion, n4_grid_metrics):
    target = build_target("n4")
    chain = AdaptiveMetropolisSampler(0.1).sample(target, None, 200_000, RandomSource(80))
    kept = chain.states[20_000:]
    var_err = np.max(np.abs(kept.var(axis=0) - 1.0))
    am_metric = worst_coordinate_report(chain).evals_per_indep_obs
    sr_best = min(v for v in n4_grid_metrics.values() if v is not None)
    factor = max(am_metric / sr_best, sr_best / am_metric)
    ok = var_err < 0.15 and factor < 5
    criterion(8, "Adaptive Metropolis sanity", ok,
              f"max |var-1| {var_err:.3f}, AM {am_metric:.1f} vs SR best {sr_best:.1f} "
              f"(factor {factor:.1f})")
    assert ok


# -- 9 ---------------------------------------------------------------------------------

def test_zero_density_shrink(criterion):
    target = build_target("gamma-product:2")
    crumbs = {}
    for factor in (0.1, 1.0):
        chain = ShrinkingRankSampler(sigma_c=100.0, zero_density_factor=factor).sample(
            target, None, 10_000, RandomSource(90))
        crumbs[factor] = chain.n_crumbs.mean()
    reduction = 1 - crumbs[0.1] / crumbs[1.0]
    ok = reduction >= 0.2
    criterion(9, "zero-density shrink", ok,
              f"crumbs/step {crumbs[0.1]:.2f} with factor vs {crumbs[1.0]:.2f} without "
              f"({reduction:.0%} fewer)")
    assert ok


# -- 10 ---------------------------------------------------------------------------------

def test_reproducibility(criterion, tmp_path):
    import pathlib
    plan = pathlib.Path(__file__).resolve().parents[1] / "plans" / "smoke.toml"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["benchmark", str(plan), "--out", str(a)]) == 0
    assert main(["benchmark", str(plan), "--out", str(b)]) == 0
    ok = a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0
    criterion(10, "benchmark reproducibility", ok, f"{a.stat().st_size} bytes, identical={ok}")
    assert ok
