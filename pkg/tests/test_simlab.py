import numpy as np
import pytest

from flmgof import (
    FunctionalSample,
    deviation,
    fdr_discretization_experiment,
    gen_process,
    gen_response,
    run_study,
    scenario,
    uniform_grid,
)
from flmgof.processes import (
    bb_kernel,
    bm_kernel,
    gbm_kernel,
    gbm_mean,
    ou_kernel,
)
from flmgof.simlab import _deviation_rows


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def covariance_zscores(data, kernel_matrix, n):
    emp = np.cov(data, rowvar=False, ddof=1)
    diag = np.diag(kernel_matrix)
    se = np.sqrt((np.outer(diag, diag) + kernel_matrix**2) / n)
    mask = se > 0
    # entries with zero population variance must be exactly zero
    assert np.max(np.abs(emp[~mask] - kernel_matrix[~mask]), initial=0.0) < 1e-12
    z = np.zeros_like(emp)
    z[mask] = (emp[mask] - kernel_matrix[mask]) / se[mask]
    return z


def truncated_cosine_kernel(points, decay, terms=20):
    j = np.arange(1, terms + 1)
    basis = np.sqrt(2.0) * np.cos(np.pi * np.outer(j, points))
    return (basis.T * j**-decay) @ basis


# ------------------------------------------------------------------ processes


@pytest.mark.parametrize(
    "kind,kernel",
    [
        ("bm", bm_kernel),
        ("bb", bb_kernel),
        ("ou", ou_kernel),
    ],
)
def test_gaussian_process_covariances(kind, kernel):
    grid = uniform_grid(21)
    n = 4000
    sample = gen_process(kind, n, grid, philox(hash(kind) % 2**32))
    truth = kernel(grid.points[:, None], grid.points[None, :])
    z = covariance_zscores(sample.data, truth, n)
    assert np.max(np.abs(z)) < 5.0
    assert np.max(np.abs(sample.data.mean(axis=0))) < 5.0 * np.sqrt(
        np.max(np.diag(truth)) / n
    )


@pytest.mark.parametrize("kind,decay", [("hhn1", 2.0), ("hhn2", 4.0)])
def test_cosine_expansion_covariances(kind, decay):
    grid = uniform_grid(21)
    n = 4000
    sample = gen_process(kind, n, grid, philox(11))
    truth = truncated_cosine_kernel(grid.points, decay)
    z = covariance_zscores(sample.data, truth, n)
    assert np.max(np.abs(z)) < 5.0


def test_gbm_mean_and_variance():
    grid = uniform_grid(11)
    n = 40000
    sample = gen_process("gbm", n, grid, philox(13))
    truth_mean = gbm_mean(grid.points)
    assert np.max(np.abs(sample.data.mean(axis=0) / truth_mean - 1.0)) < 0.02
    assert sample.data[0, 0] == 2.0
    truth_var = gbm_kernel(grid.points, grid.points)
    emp_var = sample.data.var(axis=0, ddof=1)
    # heavy lognormal tails: compare only where the variance is nonzero
    ratio = emp_var[1:] / truth_var[1:]
    assert np.max(np.abs(ratio - 1.0)) < 0.2


def test_bm_marginals_are_gaussian():
    grid = uniform_grid(6)
    sample = gen_process("bm", 4000, grid, philox(17))
    endpoint = sample.data[:, -1]
    skew = np.mean(endpoint**3) / np.mean(endpoint**2) ** 1.5
    assert abs(skew) < 5.0 * np.sqrt(6.0 / 4000)


def test_gen_process_determinism_and_validation():
    grid = uniform_grid(21)
    a = gen_process("bm", 3, grid, philox(5))
    b = gen_process("bm", 3, grid, philox(5))
    assert np.array_equal(a.data, b.data)
    assert a.data.shape == (3, 21)
    assert not a.centered
    with pytest.raises(ValueError):
        gen_process("weibull", 3, grid, philox(0))
    with pytest.raises(ValueError):
        gen_process("bm", 0, grid, philox(0))


# ----------------------------------------------------------------- deviations


def test_deviation_frozen_values():
    grid = uniform_grid(201)
    assert deviation(1, np.full(201, 2.0), grid) == pytest.approx(2.0, abs=1e-14)
    assert deviation(3, np.ones(201), grid) == pytest.approx(np.exp(-1.0), abs=1e-14)
    with pytest.raises(ValueError):
        deviation(4, np.ones(201), grid)
    with pytest.raises(ValueError):
        deviation(1, np.ones(200), grid)


def brute_double_integral(x, grid):
    total = 0.0
    for a in range(grid.size):
        for b in range(grid.size):
            s, t = grid.points[a], grid.points[b]
            total += (
                grid.weights[a]
                * grid.weights[b]
                * np.sin(2.0 * np.pi * t * s)
                * s
                * (1.0 - s)
                * t
                * (1.0 - t)
                * x[a]
                * x[b]
            )
    return 25.0 * total


def test_interaction_deviation_matches_double_loop():
    grid = uniform_grid(31)
    rng = philox(19)
    x = rng.standard_normal(31)
    fast = deviation(2, x, grid)
    slow = brute_double_integral(x, grid)
    assert fast == pytest.approx(slow, rel=1e-12, abs=1e-14)


def test_interaction_deviation_grid_refinement():
    curve = lambda t: np.sin(np.pi * t) + t
    values = {
        size: deviation(2, curve(uniform_grid(size).points), uniform_grid(size))
        for size in (101, 201, 401)
    }
    assert abs(values[201] - values[401]) < 1e-5
    # halving the step shrinks the error fourfold: second-order quadrature
    ratio = (values[101] - values[201]) / (values[201] - values[401])
    assert 3.0 < ratio < 5.0


def test_deviation_rows_agree_with_scalar_version():
    grid = uniform_grid(41)
    rng = philox(23)
    data = rng.standard_normal((6, 41))
    for kind in (1, 2, 3):
        rows = _deviation_rows(kind, data, grid)
        singles = [deviation(kind, row, grid) for row in data]
        assert np.allclose(rows, singles, rtol=1e-12, atol=1e-14)


# ------------------------------------------------------------------ scenarios


def test_scenario_table():
    spec = scenario(1)
    assert spec.id == "S1"
    assert spec.process == "bm"
    assert spec.deviation_kind == 1
    assert spec.deviation_sign == 1
    assert spec.deltas == (0.0, 0.25, 0.75)
    assert spec.grid.size == 201
    # slope at t = 1/2: 2 sin(pi/4) + 4 sin(3 pi/4) + 5 sin(5 pi/4)
    mid = np.flatnonzero(np.isclose(spec.grid.points, 0.5))[0]
    assert spec.rho[mid] == pytest.approx(np.sqrt(0.5), abs=1e-12)

    for index in range(1, 10):
        spec = scenario(index)
        assert spec.index == index
        assert spec.deltas[0] == 0.0
        assert spec.deltas[0] < spec.deltas[1] < spec.deltas[2]
        assert spec.rho.shape == (201,)

    assert scenario(7).process == "ou"
    assert scenario(8).deviation_kind == 3
    assert scenario(9).process == "gbm"
    assert np.array_equal(scenario(4).rho, scenario(5).rho)
    grid = uniform_grid(201)
    assert scenario(6).rho[0] == pytest.approx(np.log(10.0) + 1.0, abs=1e-12)
    assert scenario(7).rho[0] == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(ValueError):
        scenario(0)
    with pytest.raises(ValueError):
        scenario(10)


def test_quadratic_slope_integrates_to_zero():
    spec = scenario(9)
    against_one = np.sum(spec.grid.weights * spec.rho)
    assert abs(against_one) < 1e-4


def test_slope_consistent_across_grids():
    fine = uniform_grid(401)
    for index in (1, 4, 9):
        coarse_rho = scenario(index).rho
        fine_rho = scenario(index, grid=fine).rho
        assert np.max(np.abs(fine_rho[::2] - coarse_rho)) < 1e-10


def test_signal_variance_of_first_scenario():
    # analytic value sum c_j^2 lambda_j = (4 l1 + 16 l2 + 25 l3) / 2
    lam = 1.0 / ((np.arange(1, 4) - 0.5) ** 2 * np.pi**2)
    truth = (4.0 * lam[0] + 16.0 * lam[1] + 25.0 * lam[2]) / 2.0
    spec = scenario(1)
    assert abs(spec.signal_variance - truth) < 0.03 * truth
    expected_noise = spec.signal_variance * 0.05 / 0.95
    assert spec.sigma2 == pytest.approx(expected_noise, rel=1e-12)


# ------------------------------------------------------------------ responses


def test_gen_response_with_explicit_noise_variance():
    grid = uniform_grid(41)
    spec = scenario(8, grid=grid)
    X = gen_process(spec.process, 12, grid, philox(29))
    y = gen_response(spec, X, 2, philox(0), sigma2=0.0)
    manual = X.data @ (grid.weights * spec.rho)
    manual = manual + spec.deviation_sign * spec.deltas[2] * np.array(
        [deviation(spec.deviation_kind, row, grid) for row in X.data]
    )
    assert np.allclose(y, manual, rtol=1e-12, atol=1e-14)

    noisy_a = gen_response(spec, X, 0, philox(31), sigma2=2.0)
    noisy_b = gen_response(spec, X, 0, philox(31), sigma2=2.0)
    assert np.array_equal(noisy_a, noisy_b)
    null = gen_response(spec, X, 0, philox(0), sigma2=0.0)
    spread = np.std(noisy_a - null)
    assert 0.5 < spread / np.sqrt(2.0) < 2.0


def test_gen_response_validation():
    grid = uniform_grid(41)
    spec = scenario(3, grid=grid)
    X = gen_process("bm", 5, grid, philox(0))
    with pytest.raises(ValueError):
        gen_response(spec, X, 3, philox(0), sigma2=1.0)
    other = gen_process("bm", 5, uniform_grid(31), philox(0))
    with pytest.raises(ValueError):
        gen_response(spec, other, 0, philox(0), sigma2=1.0)


# ---------------------------------------------------------------- study runs


def test_run_study_smoke():
    results = run_study([1], [0, 1], [25], M=4, K=2, B=50, seed=123)
    assert len(results) == 2
    for res, d in zip(results, (0, 1)):
        assert res.scenario == "S1"
        assert res.d == d
        assert res.n == 25
        assert res.M == 4
        assert len(res.rejection_rates) == 3
        assert all(0.0 <= rate <= 1.0 for rate in res.rejection_rates)
        # rates are nested across the alpha ladder 0.01 < 0.05 < 0.10
        assert res.rejection_rates[0] <= res.rejection_rates[1] <= res.rejection_rates[2]
        assert res.mean_rank >= 1.0
        assert res.sd_rank >= 0.0
        assert res.wall_time_s > 0.0


def test_run_study_threads_do_not_change_results():
    serial = run_study([1], [0], [25], M=6, K=2, B=50, seed=7, threads=1)
    parallel = run_study([1], [0], [25], M=6, K=2, B=50, seed=7, threads=2)
    assert serial[0].rejection_rates == parallel[0].rejection_rates
    assert serial[0].mean_rank == parallel[0].mean_rank
    assert serial[0].sd_rank == parallel[0].sd_rank


def test_run_study_validation():
    with pytest.raises(ValueError):
        run_study([1], [0], [25], M=0)
    with pytest.raises(ValueError):
        run_study([1], [0], [25], M=1, threads=0)


# ------------------------------------------------------------ fdr discreteness


def test_fdr_discretization_floor():
    rows = fdr_discretization_experiment([25], [500], M=20000, seed=1)
    assert len(rows) == 3
    floor = 1.0 - (500.0 / 501.0) ** 25
    for row in rows:
        assert row["K"] == 25 and row["B"] == 500 and row["M"] == 20000
        band = 4.0 * np.sqrt(floor * (1 - floor) / row["M"])
        assert abs(row["zero_rate"] - floor) <= band
        assert row["rate"] >= row["zero_rate"]
        # the corrected p-value dominates the plain one pointwise
        assert row["rate_positive_correction"] <= row["rate"] + 1e-12
    alphas = [row["alpha"] for row in rows]
    assert alphas == [0.01, 0.05, 0.10]
    rates = [row["rate"] for row in rows]
    assert rates[0] <= rates[1] <= rates[2]


def test_fdr_discretization_validation():
    with pytest.raises(ValueError):
        fdr_discretization_experiment([5], [100], M=0)
