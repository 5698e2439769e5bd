"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy import stats

from inmafield import (
    BetaMatrix,
    CrossDependence,
    Deterministic,
    InmaModel,
    NegBin,
    Poisson,
    Stream,
    acf,
    assemble_from_y,
    bivariate_pgf,
    block_bootstrap_means,
    build_assembly_matrix,
    draw_thinnings,
    enumerate_bivariate_pmf,
    long_run_variance,
    marginal_histogram,
    marginal_moments,
    pmf_pgf,
    poisson_jump_pmf,
    poisson_order_probs,
    sample_acf_se,
    simulate_grid,
    stack_thinnings,
    thin,
    total_variation,
    verify,
)
from inmafield.estimators import default_block

Z = 4.0
SEED = 2024
STANDARD = InmaModel([[0.5, 0.5], [0.5, 0.5]], Poisson(2.0), "independence")


@pytest.fixture(scope="module")
def standard_grid():
    return simulate_grid(STANDARD, 500, 500, SEED)


def _z(emp, target, se):
    return abs(emp - target) / se if se > 0 else (0.0 if emp == target else math.inf)


def test_c1_poisson_marginal(criterion):
    t0 = time.perf_counter()
    grid = simulate_grid(STANDARD, 500, 500, SEED, workers=1)
    x = grid.values
    tv = total_variation(marginal_histogram(x), stats.poisson.pmf(np.arange(60), 4.0))
    mean_se = math.sqrt(long_run_variance(STANDARD) / x.size)
    sq = (x - x.mean()) ** 2.0
    var_se = float(np.std(block_bootstrap_means([sq], default_block(STANDARD), 500, SEED)[:, 0], ddof=1))
    elapsed = time.perf_counter() - t0
    z_mean = _z(x.mean(), 4.0, mean_se)
    z_var = _z(sq.mean(), 4.0, var_se)
    ok = tv < 0.01 and z_mean <= Z and z_var <= Z and elapsed < 10.0
    criterion(1, ok, f"TV={tv:.4f} z_mean={z_mean:.2f} z_var={z_var:.2f} time={elapsed:.2f}s")
    assert ok


def test_c2_acf(criterion, standard_grid):
    block = default_block(STANDARD)
    expected = {(1, 0): 0.25, (0, 1): 0.25, (1, 1): 0.125, (2, 0): 0.0, (0, 2): 0.0}
    parts, ok = [], True
    for (k, l), rho in expected.items():
        assert acf(STANDARD, (k, l)) == pytest.approx(rho, abs=1e-15)
        # the field pairs X[s, t] with X[s - k, t - l]
        emp, se = sample_acf_se(standard_grid, -k, -l, block, 500, SEED + 10 * k + l)
        z = _z(emp, rho, se)
        ok &= z <= Z
        parts.append(f"({k},{l}) z={z:.2f}")
    assert acf(STANDARD, (0, 0)) == 1.0
    criterion(2, ok, " ".join(parts))
    assert ok


def test_c3_spread_degeneracy(criterion):
    model = InmaModel([[0.2, 0.3], [0.1, 0.25]], Poisson(1.0), "spread")
    lags = [(k, l) for k in range(0, 3) for l in range(-2, 3) if k > 0 or l > 0]
    block = default_block(model)
    passed = 0
    for rep in range(100):
        x = simulate_grid(model, 200, 200, 10_000 + rep).values
        worst = 0.0
        for k, l in lags:
            emp, se = sample_acf_se(x, k, l, block, 500, rep)
            worst = max(worst, _z(emp, 0.0, se))
        passed += worst <= Z
    ok = passed >= 95
    criterion(3, ok, f"{passed}/100 replications with every nonzero-lag ACF within {Z} SE of 0")
    assert ok


def _small_suite():
    rng = np.random.default_rng(7)
    for order in [(1, 0), (0, 1), (1, 1), (2, 1)]:
        shape = (order[0] + 1, order[1] + 1)
        for innovation in [Deterministic(1), Poisson(0.5)]:
            for crossdep in CrossDependence:
                b = rng.uniform(0.05, 0.95, size=shape)
                if crossdep is CrossDependence.SPREAD:
                    b = b / b.sum() * rng.uniform(0.5, 1.0)
                yield InmaModel(b, innovation, crossdep)


def test_c4_oracle_equivalence(criterion):
    grid_u = np.linspace(0.0, 1.0, 5)
    worst, n_models = 0.0, 0
    ok = True
    for model in _small_suite():
        n_models += 1
        q1, q2 = model.order
        for k in range(q1 + 1):
            for l in range(q2 + 1):
                joint, err = enumerate_bivariate_pmf(model, (k, l))
                for u1 in grid_u:
                    for u2 in grid_u:
                        diff = abs(pmf_pgf(joint, u1, u2) - bivariate_pgf(model, u1, u2, (k, l)))
                        worst = max(worst, diff)
                        ok &= diff <= err + 1e-12
    criterion(4, ok, f"{n_models} models, max |oracle - closed form| = {worst:.2e}")
    assert ok


PAPER_B = """
0001 0100 0000 0010 1000 0000 0000 0000 0000
0000 0001 0100 0000 0010 1000 0000 0000 0000
0000 0000 0000 0001 0100 0000 0010 1000 0000
0000 0000 0000 0000 0001 0100 0000 0010 1000
"""


def test_c5_assembly_identity(criterion):
    printed = np.array([[int(c) for c in row.replace(" ", "")]
                        for row in PAPER_B.strip().splitlines()])
    verbatim = np.array_equal(build_assembly_matrix(2, 2, 1, 1).toarray(), printed)
    rng = np.random.default_rng(11)
    exact = 0
    for case in range(20):
        q1, q2 = (int(v) for v in rng.integers(0, 3, size=2))
        if q1 + q2 == 0:
            q2 = 1
        n1, n2 = (int(v) for v in rng.integers(1, 7, size=2))
        crossdep = CrossDependence.SPREAD if case % 2 else CrossDependence.INDEPENDENCE
        b = rng.uniform(0, 1, size=(q1 + 1, q2 + 1))
        if crossdep is CrossDependence.SPREAD:
            b /= b.sum()
        model = InmaModel(b, Poisson(3.0), crossdep)
        seed = int(rng.integers(0, 2**63))
        y = draw_thinnings(model, n1, n2, seed).y
        x = assemble_from_y(build_assembly_matrix(n1, n2, q1, q2), stack_thinnings(y))
        exact += np.array_equal(x, simulate_grid(model, n1, n2, seed).values.ravel())
    ok = verbatim and exact == 20
    criterion(5, ok, f"printed B verbatim={verbatim}, {exact}/20 instances exact")
    assert ok


def test_c6_jump_distribution(criterion, standard_grid):
    x = standard_grid.values
    d = x[1:, :] - x[:-1, :]  # X[s, t] - X[s-1, t]
    block = default_block(STANDARD)
    parts, ok = [], True
    for j in range(4):
        f = (d == j).astype(float)
        se = float(np.std(block_bootstrap_means([f], block, 500, SEED + j)[:, 0], ddof=1))
        z = _z(f.mean(), poisson_jump_pmf(STANDARD, (1, 0), j), se)
        ok &= z <= Z
        parts.append(f"j={j} z={z:.2f}")
    diff = np.sign(d).astype(float)
    se = float(np.std(block_bootstrap_means([diff], block, 500, SEED + 9)[:, 0], ddof=1))
    z_sym = _z(diff.mean(), 0.0, se)
    triple = poisson_order_probs(STANDARD, (1, 0))
    tail = sum(poisson_jump_pmf(STANDARD, (1, 0), j) for j in range(1, 80))
    sums = abs(sum(triple) - 1.0) <= 1e-12 and abs(triple[0] - tail) <= 1e-12
    ok &= z_sym <= Z and sums
    criterion(6, ok, " ".join(parts) + f" less-vs-greater z={z_sym:.2f} sum_to_1={sums}")
    assert ok


def test_c7_conditional_moments(criterion, standard_grid):
    report = verify(STANDARD, 500, 500, SEED, checks=("conditional",), grid=standard_grid)
    rows = {r.check: r for r in report.checks}
    slope, icpt = rows["cond_slope(1,0)"], rows["cond_intercept(1,0)"]
    assert slope.analytic == pytest.approx(0.25)
    assert icpt.analytic == pytest.approx(marginal_moments(STANDARD).mean_x * 0.75)
    ok = report.passed and len(rows) == 2
    criterion(7, ok, f"slope={slope.empirical:.4f} (z={slope.z:.2f}) "
                     f"intercept={icpt.empirical:.4f} (z={icpt.z:.2f})")
    assert ok


def test_c8_parallel_determinism(criterion):
    models = [
        STANDARD,
        InmaModel([[0.2, 0.3], [0.1, 0.25]], Poisson(1.0), "spread"),
        InmaModel([[0.3, 0.7, 0.1], [0.9, 0.4, 0.6], [0.5, 0.2, 0.8]], NegBin(3, 0.4)),
    ]
    same = 0
    for model in models:
        blobs = {w: simulate_grid(model, 301, 203, 99, workers=w).values.tobytes() for w in (1, 4, 8)}
        same += blobs[1] == blobs[4] == blobs[8]
    ok = same == len(models)
    criterion(8, ok, f"{same}/{len(models)} models byte-identical across workers 1, 4, 8")
    assert ok


def test_c9_thinning_identities(criterion):
    n = 10**6
    beta = BetaMatrix([[0.3, 0.75]])
    ok, parts = True, []
    for spec in (Poisson(2.0), NegBin(3, 0.4)):
        stream = Stream(31337)
        streams = stream.take(n)
        eps = spec.draw(streams)
        y = thin(beta, CrossDependence.INDEPENDENCE, eps, streams)
        for comp, b in ((y[:, 0, 0], 0.3), (y[:, 0, 1], 0.75)):
            comp = comp.astype(float)
            for u in (0.0, 0.25, 0.5, 0.75, 0.9):
                f = u**comp
                z = _z(f.mean(), spec.pgf(1.0 + b * (u - 1.0)), f.std(ddof=1) / math.sqrt(n))
                ok &= z <= Z
            target = b * b * spec.variance + b * (1 - b) * spec.mean
            dev = (comp - comp.mean()) ** 2
            z = _z(dev.mean(), target, dev.std(ddof=1) / math.sqrt(n))
            ok &= z <= Z
            parts.append(f"{type(spec).__name__}/beta={b} var z={z:.2f}")
    criterion(9, ok, "; ".join(parts))
    assert ok
